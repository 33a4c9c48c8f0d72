//! The profile wrapped around the sphere of radius `R₀`, shifted to unit
//! mass, and diagnostics comparing radial fields against it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots;
use crate::potentials::PotentialChain;
use crate::profile::Profile;
use crate::radial::{mass, RadialFunction, RadialGrid};

/// `ε` may not exceed this fraction of `R₀`.
pub const REGIME_FRACTION: f64 = 0.2;
/// Width of the search bracket around τ₀.
pub const TAU_BRACKET: f64 = 5.0;
/// Recorded empirical constant in `|τ_ε − τ₀| ≤ Cε` (quartic, n = 2, 3).
pub const TAU_SHIFT_CONSTANT: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct Ansatz {
    pub eps: f64,
    pub tau_eps: f64,
    pub field: RadialFunction,
    pub mass_residual: f64,
}

/// `r ↦ η((r − R₀)/ε − τ)` on the grid.
pub fn wrapped_profile(profile: &Profile, grid: Arc<RadialGrid>, eps: f64, tau: f64) -> RadialFunction {
    let r0 = grid.r0();
    RadialFunction::from_fn(grid, |r| profile.eval((r - r0) / eps - tau).eta)
}

fn check_regime(grid: &RadialGrid, eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps > REGIME_FRACTION * grid.r0() {
        return Err(Error::RegimeViolation(format!("ε = {eps} exceeds {REGIME_FRACTION}·R₀")));
    }
    let r0 = grid.r0();
    let h = grid.max_spacing_in(r0 - 3.0 * eps, r0 + 3.0 * eps);
    if h > 0.25 * eps {
        return Err(Error::RegimeViolation(format!("grid spacing {h:.3e} does not resolve ε = {eps}")));
    }
    Ok(())
}

/// Finds the shift with `∫V(z_ε) = 1` in the grid quadrature.
pub fn solve_tau_eps(chain: &PotentialChain, profile: &Profile, eps: f64, grid: Arc<RadialGrid>, tau0: f64) -> Result<Ansatz> {
    check_regime(&grid, eps)?;
    let f = |tau: f64| mass(&wrapped_profile(profile, grid.clone(), eps, tau), chain) - 1.0;
    let (lo, hi) = (tau0 - TAU_BRACKET, tau0 + TAU_BRACKET);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::BracketFailure(format!("mass defect {flo:.3e}, {fhi:.3e} at τ = {lo}, {hi}")));
    }
    let tau = roots::brent(f, lo, hi, 1e-15, 200)?;
    let field = wrapped_profile(profile, grid, eps, tau);
    let mass_residual = (mass(&field, chain) - 1.0).abs();
    Ok(Ansatz { eps, tau_eps: tau, field, mass_residual })
}

/// Comparison of a radial field with the ansatz in the stretched variable `s = (r − R₀)/ε`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Resolution {
    pub f_sup: f64,
    /// Envelope `|f(s)| ≤ A e^{−c|s|}`: `c` by least squares on `log|f|`, `A` the smallest valid prefactor.
    pub decay_a: f64,
    pub decay_c: f64,
}

pub fn resolution_residual(u: &RadialFunction, ansatz: &Ansatz) -> Result<Resolution> {
    if !u.same_grid(&ansatz.field) {
        return Err(Error::GridMismatch);
    }
    let r0 = u.grid.r0();
    let eps = ansatz.eps;
    let pts: Vec<(f64, f64)> = u
        .grid
        .nodes()
        .iter()
        .zip(u.values.iter().zip(&ansatz.field.values))
        .map(|(&r, (&a, &b))| (((r - r0) / eps).abs(), (a - b).abs()))
        .collect();
    let f_sup = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let fit: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 1e-12).map(|&(s, f)| (s, f.ln())).collect();
    if fit.len() < 2 {
        return Ok(Resolution { f_sup, decay_a: f_sup, decay_c: 0.0 });
    }
    let k = fit.len() as f64;
    let (ms, my) = (fit.iter().map(|p| p.0).sum::<f64>() / k, fit.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = fit.iter().map(|p| (p.0 - ms).powi(2)).sum();
    let sxy: f64 = fit.iter().map(|p| (p.0 - ms) * (p.1 - my)).sum();
    let c = if sxx > 0.0 { (-sxy / sxx).max(0.0) } else { 0.0 };
    let decay_a = pts.iter().map(|&(s, f)| f * (c * s).exp()).fold(0.0, f64::max);
    Ok(Resolution { f_sup, decay_a, decay_c: c })
}

/// Interface half-widths `(b, c)`: `u(R₀ − b) = 1 − δ₀`, `u(R₀ + c) = δ₀`.
/// Either may be negative if the level lies on the other side of `R₀`.
pub fn interface_widths(u: &RadialFunction, delta0: f64) -> Result<(f64, f64)> {
    let r0 = u.grid.r0();
    let hi = level_radius(u, 1.0 - delta0)?;
    let lo = level_radius(u, delta0)?;
    Ok((r0 - hi, lo - r0))
}

/// Outermost radius where a decreasing field crosses `level`.
pub fn level_radius(u: &RadialFunction, level: f64) -> Result<f64> {
    let x = u.grid.nodes();
    let v = &u.values;
    for i in (0..v.len() - 1).rev() {
        if v[i] >= level && v[i + 1] < level {
            let th = (v[i] - level) / (v[i] - v[i + 1]);
            return Ok(x[i] + th * (x[i + 1] - x[i]));
        }
    }
    Err(Error::InvalidArgument(format!("level {level} not crossed")))
}

/// Fitted constants for the interface slope and the two exponential tails.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShapeConstants {
    /// Smallest `C` with `−u′ ∈ [1/(Cε), C/ε]` on `[R₀ − b, R₀ + c]`.
    pub slope: f64,
    /// Smallest `C` with `u ≤ C e^{−(r−R₀)/(Cε)}` beyond `R₀ + c`.
    pub outer_tail: f64,
    /// Same for `1 − u` inside `R₀ − b`.
    pub inner_tail: f64,
}

pub fn shape_constants(u: &RadialFunction, eps: f64, delta0: f64) -> Result<ShapeConstants> {
    let (b, c) = interface_widths(u, delta0)?;
    let r0 = u.grid.r0();
    let d = u.derivative();
    let x = u.grid.nodes();
    let mut slope: f64 = 1.0;
    for (i, &r) in x.iter().enumerate() {
        if r >= r0 - b && r <= r0 + c {
            let g = -d[i] * eps;
            if !(g > 0.0) {
                slope = f64::INFINITY;
            } else {
                slope = slope.max(g).max(1.0 / g);
            }
        }
    }
    let tail = |pts: Vec<(f64, f64)>| -> f64 {
        let holds = |k: f64| pts.iter().all(|&(dist, y)| y <= k * (-dist / (k * eps)).exp());
        let (mut lo, mut hi) = (0.0f64, 1e4f64.ln());
        if !holds(hi.exp()) {
            return f64::INFINITY;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if holds(mid.exp()) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp()
    };
    let outer = x.iter().zip(&u.values).filter(|p| *p.0 >= r0 + c).map(|(&r, &v)| (r - r0, v)).collect();
    let inner = x.iter().zip(&u.values).filter(|p| *p.0 <= r0 - b).map(|(&r, &v)| (r0 - r, 1.0 - v)).collect();
    Ok(ShapeConstants { slope, outer_tail: tail(outer), inner_tail: tail(inner) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{chain, make_reference_well};
    use crate::profile::{compute_constants, compute_profile, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
    use crate::radial::{energy, GridSpec};

    #[test]
    fn unit_mass_and_tau_close_to_tau0() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let p = compute_profile(&ch, DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap();
        let k = compute_constants(&ch, &p).unwrap();
        let mut dev = Vec::new();
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let g = Arc::new(RadialGrid::for_eps(2, eps, &GridSpec::default()).unwrap());
            let a = solve_tau_eps(&ch, &p, eps, g, k.tau0).unwrap();
            assert!(a.mass_residual < 1e-8);
            let e = energy(&a.field, &ch, eps).total;
            println!("eps {eps} tau {} dev/eps {} energy {e}", a.tau_eps, (a.tau_eps - k.tau0) / eps);
            assert!((a.tau_eps - k.tau0).abs() <= TAU_SHIFT_CONSTANT * eps);
            dev.push((a.tau_eps - k.tau0).abs());
            let r = resolution_residual(&a.field, &a).unwrap();
            assert_eq!(r.f_sup, 0.0);
        }
        for w in dev.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.4..2.9).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn regime_violation() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let p = compute_profile(&ch, DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap();
        let g = Arc::new(RadialGrid::for_eps(2, 0.05, &GridSpec::default()).unwrap());
        assert!(matches!(solve_tau_eps(&ch, &p, 0.2, g, 0.1), Err(Error::RegimeViolation(_))));
    }
}
