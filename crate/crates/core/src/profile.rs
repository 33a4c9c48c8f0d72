//! The optimal transition profile `η`, decreasing from 1 to 0 with
//! `η′ = −√W(η)`, `η(0) = 1/2`, and the moments τ₀, τ₁, κ₀ built from it.
//!
//! Internally the profile is stored through its logit `x(s)` with
//! `η = 1/(1 + eˣ)`; `x` is nearly affine in the tails, so interpolating it
//! keeps relative accuracy of both `η` and `1 − η` far from the interface.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{self, Flow, OdeOptions};
use crate::numerics::{quad, roots};
use crate::potentials::{DoubleWell, PotentialChain};

pub const DEFAULT_HALF_LENGTH: f64 = 12.0;
pub const DEFAULT_POINTS: usize = 2049;
/// Allowed sup-norm disagreement between the quadrature and ODE routes.
pub const ROUTE_TOLERANCE: f64 = 1e-8;
const CLUSTERING: f64 = 2.0;

/// Value of the profile and its derivatives at one abscissa.
#[derive(Clone, Copy, Debug)]
pub struct ProfilePoint {
    pub eta: f64,
    /// `1 − η`, accurate when η is close to 1.
    pub eta_c: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub s: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    /// Smallest `C` with `|η − 1_{s<0}|, |η′|, |η″| ≤ C e^{−|s|/C}` on the samples.
    pub decay_constant: f64,
    /// Sup-norm gap between the quadrature and ODE constructions.
    pub route_mismatch: f64,
    logit: Vec<f64>,
    dlogit: Vec<f64>,
    well: DoubleWell,
}

fn logistic(x: f64) -> (f64, f64) {
    (1.0 / (1.0 + x.exp()), 1.0 / (1.0 + (-x).exp()))
}

/// `ds/dx = η(1−η)/√W(η)`; bounded, tends to `1/√(W″/2)` at either well.
fn speed(well: &DoubleWell, x: f64) -> f64 {
    let (t, tc) = logistic(x);
    let sw = well.sqrt_w_split(t, tc);
    let num = t * tc;
    if sw > 0.0 && num > 0.0 {
        num / sw
    } else {
        let end = if x > 0.0 { 0.0 } else { 1.0 };
        1.0 / (0.5 * well.jet(end).d2).sqrt()
    }
}

/// Clustered grid on `[−S, S]` (sinh map), symmetric about 0.
fn clustered_grid(half: f64, n: usize) -> Vec<f64> {
    let sa = CLUSTERING.sinh();
    (0..n)
        .map(|i| {
            let xi = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let s = half * (CLUSTERING * xi).sinh() / sa;
            if s.abs() < 1e-15 { 0.0 } else { s }
        })
        .collect()
}

/// Builds `η` on `[−S, S]` with `N` samples.
pub fn compute_profile(chain: &PotentialChain, half_length: f64, n: usize) -> Result<Profile> {
    if !(half_length > 0.0) || n < 64 {
        return Err(Error::InvalidArgument(format!("need S > 0 and N ≥ 64, got S = {half_length}, N = {n}")));
    }
    let well = chain.well.clone();
    let s = clustered_grid(half_length, n);
    let mid = s.partition_point(|&v| v < 0.0);

    // Quadrature route: solve ∫₀^{x} speed = s outward from the centre.
    let mut logit = vec![0.0; n];
    let g = |x: f64| speed(&well, x);
    let mut invert = |range: &mut dyn Iterator<Item = usize>| -> Result<()> {
        let (mut x_prev, mut s_prev) = (0.0f64, 0.0f64);
        for i in range {
            let target = s[i];
            let mut x = x_prev + (target - s_prev) / g(x_prev);
            for _ in 0..50 {
                let acc = quad::integrate(g, x_prev, x, 1e-16, 1e-15)?.value;
                let r = s_prev + acc - target;
                let step = r / g(x);
                x -= step;
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            logit[i] = x;
            x_prev = x;
            s_prev = target;
        }
        Ok(())
    };
    invert(&mut (mid..n))?;
    invert(&mut (0..mid).rev())?;

    let dlogit: Vec<f64> = logit.iter().map(|&x| 1.0 / g(x)).collect();
    let mut eta = Vec::with_capacity(n);
    let mut eta1 = Vec::with_capacity(n);
    let mut eta2 = Vec::with_capacity(n);
    for &x in &logit {
        let (t, tc) = logistic(x);
        let j = well.jet_split(t, tc);
        eta.push(t);
        eta1.push(-well.sqrt_w_split(t, tc));
        eta2.push(0.5 * j.d1);
    }

    // ODE route: η′ = −√W(η) from η(0) = 1/2, node to node in both directions.
    let rhs = |_: f64, y: &[f64; 1]| [-chain.well.sqrt_w_split(y[0], 1.0 - y[0])];
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-16, h0: 1e-3, ..OdeOptions::default() };
    let mut ode_eta = vec![0.0; n];
    for dir in [1i64, -1] {
        let (mut t, mut y) = (0.0, [0.5]);
        let idx: Vec<usize> = if dir > 0 { (mid..n).collect() } else { (0..mid).rev().collect() };
        for i in idx {
            let out = ode::integrate(rhs, t, y, s[i], &opts, |_| Flow::Continue);
            t = s[i];
            y = out.y;
            ode_eta[i] = y[0];
        }
    }
    let route_mismatch = eta.iter().zip(&ode_eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if !(route_mismatch <= ROUTE_TOLERANCE) {
        return Err(Error::ProfileMismatch { diff: route_mismatch, tol: ROUTE_TOLERANCE });
    }

    let mut p = Profile { s, eta, eta1, eta2, decay_constant: f64::NAN, route_mismatch, logit, dlogit, well };
    p.decay_constant = p.fit_decay_constant();
    Ok(p)
}

impl Profile {
    pub fn half_length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn logit_at(&self, s: f64) -> (f64, f64) {
        let n = self.s.len();
        if s <= self.s[0] {
            return (self.logit[0] + self.dlogit[0] * (s - self.s[0]), self.dlogit[0]);
        }
        if s >= self.s[n - 1] {
            return (self.logit[n - 1] + self.dlogit[n - 1] * (s - self.s[n - 1]), self.dlogit[n - 1]);
        }
        let j = self.s.partition_point(|&v| v <= s).clamp(1, n - 1) - 1;
        let (a, b) = (self.s[j], self.s[j + 1]);
        let x = ode::hermite(a, self.logit[j], self.dlogit[j], b, self.logit[j + 1], self.dlogit[j + 1], s);
        (x, 0.0)
    }

    /// Evaluates the profile at any `s`; tails beyond the grid follow the
    /// asymptotic exponential rate.
    pub fn eval(&self, s: f64) -> ProfilePoint {
        let (x, _) = self.logit_at(s);
        let (t, tc) = logistic(x);
        let j = self.well.jet_split(t, tc);
        ProfilePoint { eta: t, eta_c: tc, d1: -self.well.sqrt_w_split(t, tc), d2: 0.5 * j.d1 }
    }

    fn fit_decay_constant(&self) -> f64 {
        let holds = |c: f64| {
            self.s.iter().enumerate().all(|(i, &s)| {
                let bound = c * (-s.abs() / c).exp();
                let jump = if s < 0.0 { (1.0 - self.eta[i]).abs() } else { self.eta[i] };
                jump <= bound && self.eta1[i].abs() <= bound && self.eta2[i].abs() <= bound
            })
        };
        let (mut lo, mut hi) = (1e-3f64.ln(), 1e6f64.ln());
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
    }

    /// Writes `(s, η, η′, η″)` as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "eta", "eta1", "eta2"])?;
        for i in 0..self.s.len() {
            w.write_record(&[
                format!("{:.17e}", self.s[i]),
                format!("{:.17e}", self.eta[i]),
                format!("{:.17e}", self.eta1[i]),
                format!("{:.17e}", self.eta2[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProfileConstants {
    pub tau0: f64,
    pub tau1: f64,
    pub kappa0: f64,
    /// Defining integral evaluated at the returned τ₀.
    pub tau0_residual: f64,
    /// τ₀ from the moment formula `∫η′V′(η)s ds`.
    pub tau0_moment: f64,
    /// `∫W(η) ds`, equal to 1 for a normalized well.
    pub w_integral: f64,
}

fn one_minus_v(chain: &PotentialChain, t: f64, tc: f64) -> f64 {
    let c = if t <= 0.5 { 1.0 - chain.phi_value(t) } else { chain.phi_complement(1.0 - tc) };
    let _ = tc;
    -(chain.exponent() * (-c).ln_1p()).exp_m1()
}

const QTOL: f64 = 1e-15;

/// `∫_a^0 (1 − V(η(s−τ))) ds − ∫_0^b V(η(s−τ)) ds` over the window `[a, b]`.
pub fn tau_defining_integral(chain: &PotentialChain, profile: &Profile, tau: f64, window: (f64, f64)) -> Result<f64> {
    let (a, b) = window;
    let inner = quad::integrate_pieces(
        |s| {
            let p = profile.eval(s - tau);
            one_minus_v(chain, p.eta, p.eta_c)
        },
        &[a, 0.5 * a, 0.0],
        QTOL,
        0.0,
    )?;
    let outer = quad::integrate_pieces(
        |s| {
            let p = profile.eval(s - tau);
            chain.vee_split(p.eta, p.eta_c).f
        },
        &[0.0, 0.5 * b, b],
        QTOL,
        0.0,
    )?;
    Ok(inner.value - outer.value)
}

/// τ₀ as the root of the defining integral on the window `[a, b]`.
pub fn tau0_by_root(chain: &PotentialChain, profile: &Profile, window: (f64, f64)) -> Result<(f64, f64)> {
    let f = |tau: f64| tau_defining_integral(chain, profile, tau, window);
    let (lo, hi) = (-10.0, 10.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure(format!("defining integral has one sign on [-10, 10]: {flo:e}, {fhi:e}")));
    }
    let mut failure = None;
    let coarse = roots::bisect(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        lo,
        hi,
        1e-6,
        100,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    // Newton polish; the derivative is ∫V′(η(s−τ))η′(s−τ) ds.
    let mut tau = coarse;
    let (a, b) = window;
    for _ in 0..20 {
        let r = f(tau)?;
        let d = quad::integrate_pieces(
            |s| {
                let p = profile.eval(s - tau);
                chain.vee_split(p.eta, p.eta_c).d1 * p.d1
            },
            &[a, 0.0, b],
            QTOL,
            0.0,
        )?
        .value;
        let step = r / d;
        tau -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    Ok((tau, f(tau)?))
}

/// τ₀ two ways, τ₁ = ∫W(η)s ds and κ₀ = τ₀ + τ₁.
pub fn compute_constants(chain: &PotentialChain, profile: &Profile) -> Result<ProfileConstants> {
    let big = profile.half_length();
    let window = (-big, big);
    let (tau0, tau0_residual) = tau0_by_root(chain, profile, window)?;
    let pieces = [-big, -0.5 * big, 0.0, 0.5 * big, big];
    let tau0_moment = quad::integrate_pieces(
        |s| {
            let p = profile.eval(s);
            p.d1 * chain.vee_split(p.eta, p.eta_c).d1 * s
        },
        &pieces,
        QTOL,
        0.0,
    )?
    .value;
    let tau1 = quad::integrate_pieces(
        |s| {
            let p = profile.eval(s);
            chain.well.jet_split(p.eta, p.eta_c).f * s
        },
        &pieces,
        QTOL,
        0.0,
    )?
    .value;
    let w_integral = quad::integrate_pieces(
        |s| {
            let p = profile.eval(s);
            chain.well.jet_split(p.eta, p.eta_c).f
        },
        &pieces,
        QTOL,
        0.0,
    )?
    .value;
    Ok(ProfileConstants { tau0, tau1, kappa0: tau0 + tau1, tau0_residual, tau0_moment, w_integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{chain, make_reference_well};

    fn setup(n: usize) -> (PotentialChain, Profile) {
        let ch = chain(&make_reference_well(), n).unwrap();
        let p = compute_profile(&ch, DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap();
        (ch, p)
    }

    #[test]
    fn quartic_profile_is_logistic() {
        let (_, p) = setup(2);
        // Oracle: independent ODE solve of η′ = −6η(1−η), compared with the closed form.
        let out = ode::integrate(|_, y: &[f64; 1]| [-6.0 * y[0] * (1.0 - y[0])], 0.0, [0.5], 3.0, &OdeOptions::default(), |_| Flow::Continue);
        assert!((out.y[0] - 1.0 / (1.0 + 18f64.exp())).abs() < 1e-12);
        let sup = p.s.iter().zip(&p.eta).map(|(s, e)| (e - 1.0 / (1.0 + (6.0 * s).exp())).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-8, "{sup}");
        assert!(p.route_mismatch < 1e-8);
    }

    #[test]
    fn profile_invariants() {
        let (ch, p) = setup(2);
        assert!((p.eval(0.0).eta - 0.5).abs() < 1e-10);
        // Strictly decreasing wherever f64 separates η from 1; the complement
        // carries the ordering in the left tail.
        for w in p.s.windows(2) {
            let (a, b) = (p.eval(w[0]), p.eval(w[1]));
            assert!(b.eta < a.eta || (b.eta == a.eta && b.eta_c > a.eta_c), "{} {}", w[0], w[1]);
        }
        for i in 0..p.len() {
            let j = ch.well.jet(p.eta[i]);
            assert!((p.eta1[i] + j.f.sqrt()).abs() < 1e-8);
            assert!((2.0 * p.eta2[i] - j.d1).abs() < 1e-6);
        }
        assert!(p.decay_constant.is_finite() && p.decay_constant > 0.0);
    }

    #[test]
    fn tau0_routes_agree() {
        for n in [2, 3] {
            let (ch, p) = setup(n);
            let c = compute_constants(&ch, &p).unwrap();
            assert!((c.tau0 - c.tau0_moment).abs() < 1e-7, "n={n}: {} vs {}", c.tau0, c.tau0_moment);
            assert!(c.tau0_residual.abs() <= 1e-8);
            assert!((c.w_integral - 1.0).abs() < 1e-8);
            assert_eq!(c.kappa0, c.tau0 + c.tau1);
        }
    }

    #[test]
    fn shifted_window_leaves_tau0() {
        let (ch, p) = setup(2);
        let (a, _) = tau0_by_root(&ch, &p, (-12.0, 12.0)).unwrap();
        let (b, _) = tau0_by_root(&ch, &p, (-11.0, 13.0)).unwrap();
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn defining_integral_decreases_in_tau() {
        let (ch, p) = setup(2);
        let vals: Vec<f64> = (0..10)
            .map(|k| tau_defining_integral(&ch, &p, -2.0 + 0.4 * k as f64, (-12.0, 12.0)).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn doubling_the_window() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let p1 = compute_profile(&ch, 12.0, 2049).unwrap();
        let p2 = compute_profile(&ch, 24.0, 4097).unwrap();
        let c1 = compute_constants(&ch, &p1).unwrap();
        let c2 = compute_constants(&ch, &p2).unwrap();
        assert!((c1.tau0 - c2.tau0).abs() < 1e-8);
        assert!((c1.tau1 - c2.tau1).abs() < 1e-8);
    }
}
