use super::*;
use crate::potentials::{chain, make_reference_well};
use crate::profile::{compute_constants, compute_profile, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};

fn setup(n: usize) -> (PotentialChain, Profile, f64) {
    let ch = chain(&make_reference_well(), n).unwrap();
    let p = compute_profile(&ch, DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap();
    let k = compute_constants(&ch, &p).unwrap();
    (ch, p, k.tau0)
}

fn solve_at(ch: &PotentialChain, p: &Profile, tau0: f64, eps: f64, opts: &MinimizerOptions) -> MinimizerResult {
    let g = Arc::new(RadialGrid::for_eps(ch.dim(), eps, &opts.grid).unwrap());
    minimize(ch, p, eps, g, tau0, opts).unwrap()
}

#[test]
fn minimizer_properties() {
    for n in [2, 3] {
        let (ch, p, tau0) = setup(n);
        let r = solve_at(&ch, &p, tau0, 0.05, &MinimizerOptions::default());
        assert!(r.converged);
        assert!(r.psi > ch.perimeter_constant(), "n = {n}");
        assert!((mass(&r.u, &ch) - 1.0).abs() < 1e-7);
        assert!(r.lambda > 0.0);
        assert!((lambda_from_formula(&r, &ch) - r.lambda).abs() < 1e-4);
        assert!(r.u.values.windows(2).all(|w| w[1] <= w[0]));
        // Strict where consecutive values are distinguishable in floating point.
        assert!(r.u.values.windows(2).all(|w| w[1] < w[0] || w[0] > 1.0 - 1e-13 || w[1] < 1e-200));
        let lam_gap = (r.lambda - ch.multiplier_limit()).abs();
        assert!(lam_gap <= MULTIPLIER_GAP_CONSTANT * 0.05, "λ gap {lam_gap}");
    }
}

#[test]
fn initializations_reach_the_same_minimizer() {
    let (ch, p, tau0) = setup(2);
    let opts = MinimizerOptions::default();
    let eps = 0.05;
    let a = solve_at(&ch, &p, tau0, eps, &opts);
    let ind = smoothed_indicator(&ch, a.u.grid.clone(), 3.0 * eps).unwrap();
    let b = minimize_from(&ch, eps, 1.0, ind, &opts).unwrap();
    assert!(p_distance(&a.u, &b.u, eps).unwrap() < 1e-6);
    assert!(b.energy_trace.len() > 2);
    assert!(b.energy_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
}

#[test]
fn multiplier_identity_gap_is_second_order() {
    let (ch, p, tau0) = setup(2);
    let gap = |ppe: f64| {
        let opts = MinimizerOptions { grid: GridSpec { points_per_eps: ppe, ..GridSpec::default() }, ..Default::default() };
        let r = solve_at(&ch, &p, tau0, 0.05, &opts);
        (lambda_from_formula(&r, &ch) - r.lambda).abs()
    };
    let ratio = gap(64.0) / gap(128.0);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn derivative_identity_for_psi() {
    let (ch, p, tau0) = setup(2);
    let opts = MinimizerOptions::default();
    let (eps, d) = (0.05, 0.0025);
    let lo = solve_at(&ch, &p, tau0, eps - d, &opts);
    let mid = solve_at(&ch, &p, tau0, eps, &opts);
    let hi = solve_at(&ch, &p, tau0, eps + d, &opts);
    let dpsi = (hi.psi - lo.psi) / (2.0 * d);
    assert!(dpsi > 0.0);
    let rhs = mid.psi - 2.0 * mid.lambda;
    assert!((eps * dpsi - rhs).abs() <= 0.02 * rhs.abs(), "{} vs {rhs}", eps * dpsi);
}

#[test]
fn penalized_problem() {
    let (ch, p, tau0) = setup(2);
    let opts = MinimizerOptions::default();
    let eps = 0.05;
    let u = solve_at(&ch, &p, tau0, eps, &opts);
    for a in [1e-6, 0.1, 10.0] {
        let pr = solve_penalized(&ch, eps, a, &u.u, &opts).unwrap();
        assert!(p_distance(&pr.result.u, &u.u, eps).unwrap() < 1e-5, "a = {a}");
    }
    let err_sup = |ppe: f64| {
        let o = MinimizerOptions { grid: GridSpec { points_per_eps: ppe, ..GridSpec::default() }, ..Default::default() };
        let base = solve_at(&ch, &p, tau0, eps, &o);
        let r0 = base.u.grid.r0();
        let bumped = RadialFunction::from_fn(base.u.grid.clone(), |r| base.u.eval(r) + 0.1 * (-((r - r0) / (2.0 * eps)).powi(2)).exp());
        let (v, _) = project_mass_by_shift(&bumped, &ch, 1.0).unwrap();
        let pr = solve_penalized(&ch, eps, 0.1, &v, &o).unwrap();
        assert!((mass(&pr.result.u, &ch) - 1.0).abs() < 1e-7);
        pr.err_sup
    };
    let (coarse, fine) = (err_sup(128.0), err_sup(256.0));
    assert!(coarse.is_finite() && fine.is_finite());
    assert!((coarse - fine).abs() < 0.05 * fine, "{coarse} vs {fine}");
}

#[test]
fn shooting_classifies_both_sides() {
    let (ch, _, _) = setup(2);
    let (sigma, ell) = (0.05, 3.5);
    let sep = find_separatrix(&ch, sigma, ell, &ShootingOptions::default()).unwrap();
    let opts = ShootingOptions::default();
    assert!(matches!(shoot(&ch, sigma, ell, sep.log_v0 - 1.0, &opts, None), ShotOutcome::Overshoot { .. }));
    assert!(matches!(shoot(&ch, sigma, ell, sep.log_v0 + 1.0, &opts, None), ShotOutcome::Undershoot { .. }));
    // Below the separatrix the trajectory reaches zero while still decreasing.
    let mut tr = Trajectory::new();
    shoot(&ch, sigma, ell, sep.log_v0 - 1.0, &opts, Some(&mut tr));
    let last = tr.last().unwrap();
    assert!(last.1 < opts.halt_level && last.2 < 0.0);
    for ell in [0.0, 1e-3] {
        assert!(matches!(find_separatrix(&ch, sigma, ell, &opts), Err(Error::NoDecayingSolution(_))), "ℓ = {ell}");
    }
}

#[test]
fn shooting_matches_minimizer() {
    let (ch, p, tau0) = setup(2);
    let row = alexandrov_match(&ch, &p, tau0, 0.05, 4.0, &MinimizerOptions::default()).unwrap();
    assert!((row.lambda_matched - 4.0).abs() < 1e-8);
    assert!(row.d_phi < 1e-5);
}

#[test]
fn small_surface() {
    let (ch, p, tau0) = setup(2);
    let t = psi_surface(&ch, &p, tau0, &[0.03, 0.04], &[0.9, 1.0, 1.1], &MinimizerOptions::default()).unwrap();
    let c = t.checks;
    assert!(c.lambda_decreasing_in_m && c.psi_increasing_in_m && c.psi_increasing_in_sigma);
    assert!(c.max_second_difference <= 1e-8);
    assert!(c.scaling_residual <= 1e-6, "{}", c.scaling_residual);
    assert!(c.derivative_mismatch <= 0.01, "{}", c.derivative_mismatch);
}

#[test]
fn regime_is_enforced() {
    let (ch, p, tau0) = setup(2);
    let g = Arc::new(RadialGrid::for_eps(2, 0.05, &GridSpec::default()).unwrap());
    assert!(matches!(minimize(&ch, &p, 0.3, g, tau0, &MinimizerOptions::default()), Err(Error::RegimeViolation(_))));
}
