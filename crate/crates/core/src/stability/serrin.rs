//! Structure conditions for uniqueness of decaying radial solutions of
//! `−Δu = f(u)`, `f = ℓV′/(2σ) − W′/(2σ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimizer::{find_separatrix, ShootingOptions};
use crate::numerics::roots;
use crate::potentials::PotentialChain;

const SCAN: usize = 20_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsReport {
    pub pass: bool,
    /// `inf{t : F(t) > 0}`.
    pub beta: f64,
    /// `min (σℓV′ − W′ + W″(t−β) − σℓV″(t−β)) / (1−t)` over `(β,1) ∩ {f > 0}`.
    pub margin: f64,
    /// `min (−W′ − n/(n−1)²·W/Φ^{(n−2)/(n−1)}) / (1−t)` over `(1−δ₀, 1)`.
    pub fine_serrin_slack: f64,
    pub beta_in_near_well: bool,
    /// Relative gap between `f(t)/t` at small `t` and `−W″(0)/(2σ²)`.
    pub small_t_gap: f64,
    /// Largest difference quotient of `f` on the scan grid.
    pub lipschitz: f64,
    pub reason: Option<String>,
}

/// `t = 1 − tc` samples clustered at both ends of `(a, 1)`.
fn samples(a: f64, k: usize) -> Vec<(f64, f64)> {
    (1..k)
        .map(|i| {
            let x = i as f64 / k as f64;
            let y = 0.5 * (1.0 - (std::f64::consts::PI * x).cos());
            let tc = (1.0 - a) * (1.0 - y);
            (1.0 - tc, tc)
        })
        .collect()
}

pub fn verify_ps_condition(chain: &PotentialChain, sigma: f64, ell: f64) -> Result<PsReport> {
    let sl = sigma * ell;
    if !(sl > 0.0) {
        return Err(Error::NoBeta(format!("σℓ = {sl} must be positive")));
    }
    let n = chain.dim() as f64;
    let big_f = |t: f64, tc: f64| {
        let v = chain.vee_split(t, tc).f;
        let w = chain.well.jet_split(t, tc).f;
        ell * v / (2.0 * sigma) - w / (2.0 * sigma * sigma)
    };
    let small_f = |t: f64, tc: f64| {
        let v1 = chain.vee_split(t, tc).d1;
        let w1 = chain.well.jet_split(t, tc).d1;
        ell * v1 / (2.0 * sigma) - w1 / (2.0 * sigma * sigma)
    };
    let grid = samples(0.0, SCAN);
    let first = grid.iter().position(|&(t, tc)| big_f(t, tc) > 0.0);
    let Some(k) = first else {
        return Err(Error::NoBeta(format!("F ≤ 0 on (0,1) for σ = {sigma}, ℓ = {ell}")));
    };
    let lo = if k == 0 { 0.0 } else { grid[k - 1].1 };
    let hi = grid[k].1;
    // Bisect on the complement for resolution near t = 1.
    let tc_beta = roots::bisect(|tc| big_f(1.0 - tc, tc), hi, lo, 1e-17, 200)?;
    let beta = 1.0 - tc_beta;

    let lipschitz = grid
        .windows(2)
        .map(|w| (small_f(w[1].0, w[1].1) - small_f(w[0].0, w[0].1)).abs() / (w[0].1 - w[1].1))
        .fold(0.0, f64::max);
    let m = chain.well.jet(0.0).d2 / (2.0 * sigma * sigma);
    let t_small = 1e-4;
    let small_t_gap = ((small_f(t_small, 1.0 - t_small) / t_small + m) / m).abs();

    let mut margin = f64::INFINITY;
    let mut positive = false;
    for (t, tc) in samples(beta, 4000) {
        if small_f(t, tc) <= 0.0 {
            continue;
        }
        positive = true;
        let w = chain.well.jet_split(t, tc);
        let v = chain.vee_split(t, tc);
        let d = tc_beta - tc;
        let slack = sl * v.d1 - w.d1 + w.d2 * d - sl * v.d2 * d;
        margin = margin.min(slack / tc);
    }
    let d0 = chain.delta0();
    let mut fine = f64::INFINITY;
    for (t, tc) in samples(1.0 - d0, 4000) {
        let w = chain.well.jet_split(t, tc);
        let phi = chain.phi_split(t, tc).f;
        let rhs = n / ((n - 1.0) * (n - 1.0)) * w.f / phi.powf((n - 2.0) / (n - 1.0));
        fine = fine.min((-w.d1 - rhs) / tc);
    }
    let b_ok = small_t_gap < 1e-2 && m > 0.0;
    let mut reason = None;
    if !b_ok {
        reason = Some(format!("f(t)/t does not approach −W″(0)/(2σ²) (gap {small_t_gap:.2e})"));
    } else if !positive {
        reason = Some("f ≤ 0 on (β,1)".into());
    } else if margin < 0.0 {
        reason = Some(format!("f(t)/(t−β) not decreasing on (β,1): slack {margin:.3e}"));
    } else if !lipschitz.is_finite() {
        reason = Some("f not Lipschitz on the scan grid".into());
    }
    Ok(PsReport {
        pass: reason.is_none(),
        beta,
        margin,
        fine_serrin_slack: fine,
        beta_in_near_well: beta > 1.0 - d0,
        small_t_gap,
        lipschitz,
        reason,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuProbe {
    pub sigma: f64,
    /// `(σℓ, structure check passed, shooting converged)`.
    pub rows: Vec<(f64, bool, bool)>,
    /// Largest probed `σℓ` below which every probe passed; `None` if the first failed.
    pub nu0: Option<f64>,
}

/// Scans increasing values of `σℓ` for the empirical threshold.
pub fn probe_nu0(chain: &PotentialChain, sigma: f64, sigma_ells: &[f64]) -> NuProbe {
    let mut rows = Vec::new();
    let mut nu0 = None;
    let mut ok_so_far = true;
    for &sl in sigma_ells {
        let ell = sl / sigma;
        let ps = verify_ps_condition(chain, sigma, ell).map(|r| r.pass).unwrap_or(false);
        let shot = find_separatrix(chain, sigma, ell, &ShootingOptions::default()).is_ok();
        rows.push((sl, ps, shot));
        if ok_so_far && ps && shot {
            nu0 = Some(sl);
        } else {
            ok_so_far = false;
        }
    }
    NuProbe { sigma, rows, nu0 }
}
