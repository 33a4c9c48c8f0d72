//! Shooting for decaying radial solutions of
//! `−2σ²(u″ + (n−1)u′/r) = σℓV′(u) − W′(u)`, `u′(0) = 0`.
//!
//! Near the centre `1 − u` can be far below machine precision, so the
//! integration starts in `v = 1 − u` and switches to `u` once `v ≥ ½`.
//! The unknown `v(0)` is bisected in `log v(0)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{minimize_sigma_m, MinimizerOptions};
use crate::error::{Error, Result};
use crate::numerics::ode::{self, Flow, OdeOptions};
use crate::numerics::roots;
use crate::potentials::PotentialChain;
use crate::profile::Profile;
use crate::radial::{d_phi, RadialFunction, RadialGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingOptions {
    pub rtol: f64,
    pub atol: f64,
    /// A trajectory reaching `u < halt_level` counts as overshooting.
    pub halt_level: f64,
    /// The converged trajectory is continued by its exponential tail below this level.
    pub tail_level: f64,
    /// Scan step in `log v(0)` when searching for the overshoot side.
    pub scan_step: f64,
    /// Smallest admissible `log v(0)`.
    pub min_log_v0: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-300, halt_level: 1e-10, tail_level: 1e-6, scan_step: 2.0, min_log_v0: -700.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShotOutcome {
    /// `u` fell below the halt level with `u′ < 0`.
    Overshoot { r: f64 },
    /// `u′` turned positive first.
    Undershoot { r: f64 },
    /// Neither happened before the end of the interval.
    Undecided,
}

/// Dense trajectory samples `(r, u, u′)`.
pub type Trajectory = Vec<(f64, f64, f64)>;

struct Ode<'a> {
    chain: &'a PotentialChain,
    sigma: f64,
    ell: f64,
    n1: f64,
}

impl Ode<'_> {
    /// `(σℓV′ − W′)/(2σ²)` at `u = 1 − v` given both representations.
    fn forcing(&self, t: f64, tc: f64) -> f64 {
        let w1 = self.chain.well.jet_split(t, tc).d1;
        let v1 = self.chain.vee_split(t, tc).d1;
        (self.sigma * self.ell * v1 - w1) / (2.0 * self.sigma * self.sigma)
    }
}

fn r_end(chain: &PotentialChain, sigma: f64, log_v0: f64) -> f64 {
    let k0 = chain.well.jet(0.0).d2;
    let k1 = chain.well.jet(1.0).d2;
    let kappa = (0.5 * k0.min(k1)).sqrt() / sigma;
    4.0 * log_v0.abs() / kappa + 100.0 * sigma
}

/// Integrates from `v(0) = exp(log_v0)`; optionally records the trajectory.
pub fn shoot(chain: &PotentialChain, sigma: f64, ell: f64, log_v0: f64, opts: &ShootingOptions, mut record: Option<&mut Trajectory>) -> ShotOutcome {
    let ode = Ode { chain, sigma, ell, n1: (chain.dim() - 1) as f64 };
    let n = chain.dim() as f64;
    let v0 = log_v0.exp();
    let end = r_end(chain, sigma, log_v0);
    let oo = OdeOptions { rtol: opts.rtol, atol: opts.atol, h0: 1e-3 * sigma, h_max: 0.1 * sigma, ..OdeOptions::default() };

    let f0 = ode.forcing(1.0 - v0, v0);
    let r1 = 1e-6 * sigma;
    let y0 = [v0 + f0 * r1 * r1 / (2.0 * n), f0 * r1 / n];
    if let Some(rec) = record.as_deref_mut() {
        rec.clear();
        rec.push((0.0, 1.0 - v0, 0.0));
    }
    let fv = |r: f64, y: &[f64; 2]| [y[1], -ode.n1 * y[1] / r + ode.forcing(1.0 - y[0], y[0])];
    let mut verdict = ShotOutcome::Undecided;
    let out = ode::integrate(fv, r1, y0, end, &oo, |s| {
        if let Some(rec) = record.as_deref_mut() {
            rec.push((s.t1, 1.0 - s.y1[0], -s.y1[1]));
        }
        if s.y1[1] < 0.0 {
            verdict = ShotOutcome::Undershoot { r: s.t1 };
            return Flow::Stop;
        }
        if s.y1[0] >= 0.5 { Flow::Stop } else { Flow::Continue }
    });
    if verdict != ShotOutcome::Undecided || out.y[0] < 0.5 {
        return verdict;
    }
    let fu = |r: f64, y: &[f64; 2]| [y[1], -ode.n1 * y[1] / r - ode.forcing(y[0], 1.0 - y[0])];
    let start = [1.0 - out.y[0], -out.y[1]];
    ode::integrate(fu, out.t, start, end, &oo, |s| {
        if let Some(rec) = record.as_deref_mut() {
            rec.push((s.t1, s.y1[0], s.y1[1]));
        }
        if s.y1[1] > 0.0 {
            verdict = ShotOutcome::Undershoot { r: s.t1 };
            Flow::Stop
        } else if s.y1[0] < opts.halt_level {
            verdict = ShotOutcome::Overshoot { r: s.t1 };
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    verdict
}

/// Separatrix found by shooting, with its trajectory.
#[derive(Clone, Debug)]
pub struct Separatrix {
    pub sigma: f64,
    pub ell: f64,
    /// `log(1 − u(0))`.
    pub log_v0: f64,
    /// Below this radius the trajectory is integrated; beyond it the exponential tail is used.
    pub cut_radius: f64,
    pub trajectory: Trajectory,
    kappa: f64,
    n1: f64,
}

impl Separatrix {
    pub fn eval(&self, r: f64) -> f64 {
        let tr = &self.trajectory;
        if r >= self.cut_radius {
            let (rc, uc, _) = *tr.last().unwrap();
            return uc * (-self.kappa * (r - rc)).exp() * (rc / r).powf(0.5 * self.n1);
        }
        let j = tr.partition_point(|p| p.0 <= r).clamp(1, tr.len() - 1) - 1;
        let (a, b) = (tr[j], tr[j + 1]);
        ode::hermite(a.0, a.1, a.2, b.0, b.1, b.2, r).clamp(0.0, 1.0)
    }

    pub fn sample(&self, grid: Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(grid, |r| self.eval(r))
    }
}

/// Bisects `log v(0)` between undershooting and overshooting data.
pub fn find_separatrix(chain: &PotentialChain, sigma: f64, ell: f64, opts: &ShootingOptions) -> Result<Separatrix> {
    if !(sigma > 0.0) || !(ell > 0.0) {
        return Err(Error::NoDecayingSolution(format!("need σℓ > 0 (σ = {sigma}, ℓ = {ell})")));
    }
    let over = |x: f64| matches!(shoot(chain, sigma, ell, x, opts, None), ShotOutcome::Overshoot { .. });
    let mut hi = (chain.delta0()).ln();
    if over(hi) {
        return Err(Error::NoDecayingSolution(format!("u(0) = 1 − δ₀ already overshoots (σ = {sigma}, ℓ = {ell})")));
    }
    let mut lo = hi - opts.scan_step;
    while !over(lo) {
        hi = lo;
        lo -= opts.scan_step;
        if lo < opts.min_log_v0 {
            return Err(Error::NoDecayingSolution(format!("no overshoot down to 1 − u(0) = e^{} (σ = {sigma}, ℓ = {ell})", opts.min_log_v0)));
        }
    }
    let x = roots::bisect(|x| if over(x) { -1.0 } else { 1.0 }, lo, hi, 1e-15 * lo.abs(), 200)?;
    let mut lo_x = x;
    while !over(lo_x) {
        lo_x -= 1e-15 * x.abs().max(1.0);
    }
    let mut traj = Trajectory::new();
    shoot(chain, sigma, ell, lo_x, opts, Some(&mut traj));
    let cut = traj.iter().position(|p| p.1 <= opts.tail_level).unwrap_or(traj.len() - 1);
    traj.truncate(cut + 1);
    let kappa = (0.5 * chain.well.jet(0.0).d2).sqrt() / sigma;
    Ok(Separatrix {
        sigma,
        ell,
        log_v0: lo_x,
        cut_radius: traj.last().unwrap().0,
        trajectory: traj,
        kappa,
        n1: (chain.dim() - 1) as f64,
    })
}

/// Decaying critical point sampled on `grid`.
pub fn solve_critical_point(chain: &PotentialChain, sigma: f64, ell: f64, grid: Arc<RadialGrid>) -> Result<RadialFunction> {
    Ok(find_separatrix(chain, sigma, ell, &ShootingOptions::default())?.sample(grid))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AlexandrovRow {
    pub sigma: f64,
    pub ell: f64,
    /// Unit-mass width with `ελ(ε) = σℓ`.
    pub eps: f64,
    /// `m = (σ/ε)ⁿ`, so that `Λ(σ, m) = ℓ`.
    pub m: f64,
    pub lambda_matched: f64,
    pub log_v0: f64,
    pub d_phi: f64,
}

/// Matches `ℓ` to a mass through `Λ(σ, m) = ℓ` and compares the shooting
/// solution with the minimizer at that mass.
pub fn alexandrov_match(
    chain: &PotentialChain,
    profile: &Profile,
    tau0: f64,
    sigma: f64,
    ell: f64,
    opts: &MinimizerOptions,
) -> Result<AlexandrovRow> {
    let n = chain.dim() as f64;
    let lambda_of = |eps: f64| -> Result<f64> { Ok(minimize_sigma_m(chain, profile, eps, 1.0, tau0, opts)?.lambda) };
    let target = sigma * ell;
    let guess = target / chain.multiplier_limit();
    let err = std::cell::RefCell::new(None);
    let f = |eps: f64| match lambda_of(eps) {
        Ok(l) => eps * l - target,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let (mut a, mut b) = (0.8 * guess, 1.25 * guess);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut k = 0;
    while fa.is_finite() && fb.is_finite() && fa * fb > 0.0 && k < 20 {
        if fa > 0.0 {
            a *= 0.8;
            fa = f(a);
        } else {
            b *= 1.25;
            fb = f(b);
        }
        k += 1;
    }
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(err.borrow_mut().take().unwrap_or_else(|| Error::BracketFailure(format!("ελ(ε) = {target} not bracketed"))));
    }
    let eps = roots::brent(f, a, b, 1e-14 * guess, 100)?;
    let m = (sigma / eps).powf(n);
    let minimizer = minimize_sigma_m(chain, profile, sigma, m, tau0, opts)?;
    let sep = find_separatrix(chain, sigma, ell, &ShootingOptions::default())?;
    let shot = sep.sample(minimizer.u.grid.clone());
    Ok(AlexandrovRow {
        sigma,
        ell,
        eps,
        m,
        lambda_matched: minimizer.lambda,
        log_v0: sep.log_v0,
        d_phi: d_phi(&shot, &minimizer.u, chain)?,
    })
}
