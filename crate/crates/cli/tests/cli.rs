use std::path::Path;
use std::process::{Command, Output};

fn aciso(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aciso")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(text.starts_with("# "));
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn constants_report() {
    let d = tempfile::tempdir().unwrap();
    let o = aciso(&["constants"], d.path());
    assert!(o.status.success());
    let r = report(d.path());
    assert!((r["tau0"].as_f64().unwrap() - 19.0 / 180.0).abs() < 1e-9);
    assert!(r["tau1"].as_f64().unwrap().abs() < 1e-12);
    assert!(r["tau0_cross_residual"].as_f64().unwrap() < 1e-7);
    assert!((r["kappa0"].as_f64().unwrap() - r["tau0"].as_f64().unwrap()).abs() < 1e-9);
    assert!(d.path().join("plot.gp").exists());
}

#[test]
fn sweep_satisfies_the_derivative_identity() {
    let d = tempfile::tempdir().unwrap();
    assert!(aciso(&["sweep", "--eps", "0.1,0.05,0.025"], d.path()).status.success());
    let rows = rows(d.path());
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let res: f64 = r[4].parse().unwrap();
        assert!(res.abs() < 1e-5, "{r:?}");
    }
    let plot = std::fs::read_to_string(d.path().join("plot.gp")).unwrap();
    assert!(plot.contains("f(x) = 7.08981540362"));
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["fuglede", "--eps", "0.1", "--samples", "8", "--seed", "11"];
    assert!(aciso(&args, a.path()).status.success());
    assert!(aciso(&[&args[..], &["--threads", "1"]].concat(), b.path()).status.success());
    let ra = std::fs::read(a.path().join("results.csv")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("results.csv")).unwrap());
    assert!(aciso(&["fuglede", "--eps", "0.1", "--samples", "8", "--seed", "12"], c.path()).status.success());
    assert_ne!(ra, std::fs::read(c.path().join("results.csv")).unwrap());
}

#[test]
fn alexandrov_from_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("exp.toml");
    std::fs::write(&cfg, "sigma = [0.05]\nell = [4.0]\n").unwrap();
    let o = aciso(&["alexandrov", "--config", cfg.to_str().unwrap()], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(d.path());
    assert_eq!(rows.len(), 1);
    let d_phi: f64 = rows[0][6].parse().unwrap();
    assert!(d_phi <= 1e-5);
}

#[test]
fn config_errors_exit_nonzero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "dim = 2\nepsilon = [0.1]\n").unwrap();
    let o = aciso(&["minimize", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
}

#[test]
fn verify_all_exit_status() {
    let good = tempfile::tempdir().unwrap();
    let o = aciso(&["verify-all", "--seed", "2"], good.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert_eq!(stdout.matches("[PASS]").count(), 17);
    assert_eq!(report(good.path())["pass"], serde_json::Value::Bool(true));

    // Too coarse for the 1e-4 multiplier agreement.
    let bad = tempfile::tempdir().unwrap();
    let cfg = bad.path().join("coarse.toml");
    std::fs::write(&cfg, "[grid]\npoints_per_eps = 16.0\n").unwrap();
    let o = aciso(&["verify-all", "--config", cfg.to_str().unwrap()], bad.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] 2 multiplier limit"));
}
