//! Volume-constrained minimization of the Allen–Cahn energy
//! `σ∫|∇u|² + σ⁻¹∫W(u)` subject to `∫V(u) = m`.
//!
//! A semi-implicit projected gradient flow brings the initial field into
//! the basin; a bordered Newton iteration on `(u, λ)` then solves the
//! discrete Euler–Lagrange system to rounding.

mod shooting;
mod surface;

pub use shooting::{alexandrov_match, find_separatrix, shoot, solve_critical_point, AlexandrovRow, Separatrix, ShootingOptions, ShotOutcome, Trajectory};
pub use surface::{psi_surface, PsiRow, PsiTable, SurfaceChecks};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ansatz::solve_tau_eps;
use crate::error::{Error, Result};
use crate::numerics::tridiag::{dot, SymTridiag};
use crate::potentials::PotentialChain;
use crate::profile::Profile;
use crate::radial::{energy, mass, project_mass_by_shift, EnergyParts, GridSpec, RadialFunction, RadialGrid};

/// Recorded constant in `|λ(ε) − 2(n−1)ωₙ^{1/n}| ≤ Cε` (quartic well, n = 2, 3).
pub const MULTIPLIER_GAP_CONSTANT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizerOptions {
    /// Target for the sup-norm Euler–Lagrange residual.
    pub tol: f64,
    /// Flow hands over to Newton below this residual.
    pub flow_tol: f64,
    pub max_flow_steps: usize,
    pub max_newton_steps: usize,
    /// Initial flow step in units of `σ`.
    pub flow_step: f64,
    pub grid: GridSpec,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self { tol: 1e-8, flow_tol: 1e-2, max_flow_steps: 20_000, max_newton_steps: 60, flow_step: 1.0, grid: GridSpec::default() }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizerResult {
    /// Interface width `σ` (equal to ε for unit mass).
    pub eps: f64,
    pub mass: f64,
    pub u: RadialFunction,
    pub lambda: f64,
    pub psi: f64,
    pub parts: EnergyParts,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted flow step.
    pub energy_trace: Vec<f64>,
}

/// Serializable summary of a solve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResultSummary {
    pub sigma: f64,
    pub mass: f64,
    pub psi: f64,
    pub lambda: f64,
    pub lambda_formula: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub nodes: usize,
}

impl MinimizerResult {
    pub fn summary(&self, chain: &PotentialChain) -> ResultSummary {
        ResultSummary {
            sigma: self.eps,
            mass: self.mass,
            psi: self.psi,
            lambda: self.lambda,
            lambda_formula: lambda_from_formula(self, chain),
            el_residual: self.el_residual,
            iterations: self.iterations,
            converged: self.converged,
            nodes: self.u.grid.len(),
        }
    }
}

/// Grid for the problem at `(σ, m)`: the unit-mass grid at `σ/m^{1/n}`, dilated.
pub fn grid_for(dim: usize, sigma: f64, m: f64, spec: &GridSpec) -> Result<Arc<RadialGrid>> {
    let k = m.powf(1.0 / dim as f64);
    let base = RadialGrid::for_eps(dim, sigma / k, spec)?;
    Ok(Arc::new(if m == 1.0 { base } else { base.scaled(k)? }))
}

/// `a·∫|Φ(u) − Φ(v)|^p` with `v` fixed.
#[derive(Clone, Debug)]
struct Penalty {
    a: f64,
    phi_v: Vec<f64>,
}

struct Problem<'a> {
    chain: &'a PotentialChain,
    sigma: f64,
    mass: f64,
    grid: Arc<RadialGrid>,
    stiff: SymTridiag,
    penalty: Option<Penalty>,
}

/// Per-node first and second derivatives of the integrand, excluding the multiplier.
struct Local {
    /// `W′/σ + a·P′`.
    g1: Vec<f64>,
    /// `W″/σ + a·P″`.
    g2: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn objective(&self, u: &RadialFunction) -> f64 {
        let e = energy(u, self.chain, self.sigma);
        let sigma_energy = self.sigma * e.grad_sq + e.potential / self.sigma;
        sigma_energy + self.penalty_value(u)
    }

    fn penalty_value(&self, u: &RadialFunction) -> f64 {
        match &self.penalty {
            None => 0.0,
            Some(p) => {
                let e = self.chain.exponent();
                u.grid
                    .weights()
                    .iter()
                    .zip(u.values.iter().zip(&p.phi_v))
                    .map(|(w, (&x, &pv))| w * (self.chain.phi_value(x) - pv).abs().powf(e))
                    .sum::<f64>()
                    * p.a
            }
        }
    }

    fn local(&self, u: &[f64]) -> Local {
        let n = u.len();
        let mut l = Local { g1: vec![0.0; n], g2: vec![0.0; n], v1: vec![0.0; n], v2: vec![0.0; n] };
        let e = self.chain.exponent();
        for (i, &x) in u.iter().enumerate() {
            let j = self.chain.well.jet_split(x, 1.0 - x);
            let v = self.chain.vee(x);
            l.g1[i] = j.d1 / self.sigma;
            l.g2[i] = j.d2 / self.sigma;
            l.v1[i] = v.d1;
            l.v2[i] = v.d2;
            if let Some(p) = &self.penalty {
                let ph = self.chain.phi(x);
                let d = ph.f - p.phi_v[i];
                let ad = d.abs();
                // |d|^{p−2} regularized where p < 2 makes it singular.
                let pw = if e >= 2.0 { ad.powf(e - 2.0) } else { (ad + 1e-10).powf(e - 2.0) };
                l.g1[i] += p.a * e * pw * d * ph.d1;
                l.g2[i] += p.a * e * pw * ((e - 1.0) * ph.d1 * ph.d1 + d * ph.d2);
            }
        }
        l
    }

    /// Nodal gradient `2σKu + w∘g1` (without the multiplier term).
    fn gradient(&self, u: &[f64], l: &Local, w: &[f64]) -> Vec<f64> {
        let mut g = self.grid.apply_stiffness(u);
        for i in 0..u.len() {
            g[i] = 2.0 * self.sigma * g[i] + w[i] * l.g1[i];
        }
        g
    }

    /// Multiplier making the lumped-L² gradient tangent to the mass constraint.
    fn tangent_lambda(&self, g: &[f64], l: &Local, w: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..g.len() {
            num += g[i] * l.v1[i];
            den += w[i] * l.v1[i] * l.v1[i];
        }
        if den > 0.0 { num / den } else { 0.0 }
    }

    /// `sup |σ(∇J − λ∇M)ᵢ / wᵢ|`.
    fn residual(&self, g: &[f64], l: &Local, w: &[f64], lambda: f64) -> f64 {
        (0..g.len()).map(|i| (self.sigma * (g[i] / w[i] - lambda * l.v1[i])).abs()).fold(0.0, f64::max)
    }
}

struct State {
    u: RadialFunction,
    lambda: f64,
    residual: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn flow(pb: &Problem, mut u: RadialFunction, opts: &MinimizerOptions) -> Result<State> {
    let w = u.grid.weights().to_vec();
    let n = w.len();
    let w2max = (0..=200).map(|k| pb.chain.well.jet(k as f64 / 200.0).d2.abs()).fold(0.0, f64::max);
    let stab = 2.0 * w2max / pb.sigma;
    let mut dt = opts.flow_step * pb.sigma;
    let dt_min = 1e-10 * pb.sigma;
    let mut j_old = pb.objective(&u);
    let mut steps = 0;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut trace = vec![j_old];
    while steps < opts.max_flow_steps {
        let l = pb.local(&u.values);
        let g = pb.gradient(&u.values, &l, &w);
        lambda = pb.tangent_lambda(&g, &l, &w);
        residual = pb.residual(&g, &l, &w, lambda);
        if residual < opts.flow_tol {
            break;
        }
        let ku = pb.grid.apply_stiffness(&u.values);
        let mut accepted = false;
        while dt >= dt_min {
            let diag_coef = 1.0 / dt + stab;
            let mut a = pb.stiff.clone();
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                a.diag[i] = 2.0 * pb.sigma * a.diag[i] + w[i] * diag_coef;
                if i < n - 1 {
                    a.off[i] *= 2.0 * pb.sigma;
                }
                // Explicit part of the gradient excludes the implicit Dirichlet term.
                let explicit = g[i] - 2.0 * pb.sigma * ku[i] - lambda * w[i] * l.v1[i];
                rhs[i] = w[i] * diag_coef * u.values[i] - explicit;
            }
            let next = RadialFunction::new(u.grid.clone(), a.solve(&rhs))?;
            let (next, _) = match project_mass_by_shift(&next, pb.chain, pb.mass) {
                Ok(v) => v,
                Err(_) => {
                    dt *= 0.5;
                    continue;
                }
            };
            let j_new = pb.objective(&next);
            if j_new <= j_old + 1e-14 * j_old.abs() {
                u = next;
                j_old = j_new;
                trace.push(j_new);
                dt = (dt * 1.5).min(1e3 * pb.sigma);
                accepted = true;
                break;
            }
            dt *= 0.5;
        }
        steps += 1;
        if !accepted {
            break;
        }
    }
    Ok(State { u, lambda, residual, iterations: steps, trace })
}

fn newton(pb: &Problem, start: State, opts: &MinimizerOptions) -> Result<State> {
    let State { mut u, mut lambda, iterations, trace, .. } = start;
    let w = u.grid.weights().to_vec();
    let n = w.len();
    let merit = |u: &RadialFunction, lambda: f64| -> (f64, f64) {
        let l = pb.local(&u.values);
        let g = pb.gradient(&u.values, &l, &w);
        let l2: f64 = (0..n).map(|i| (g[i] - lambda * w[i] * l.v1[i]).powi(2) / w[i]).sum::<f64>().sqrt();
        let defect = (mass(u, pb.chain) - pb.mass).abs();
        (l2 * pb.sigma + defect, pb.residual(&g, &l, &w, lambda))
    };
    let mut steps = 0;
    let (mut m_cur, mut residual) = merit(&u, lambda);
    while steps < opts.max_newton_steps {
        let defect = mass(&u, pb.chain) - pb.mass;
        if residual < opts.tol && defect.abs() < 1e-13 * pb.mass {
            break;
        }
        let l = pb.local(&u.values);
        let g = pb.gradient(&u.values, &l, &w);
        let f: Vec<f64> = (0..n).map(|i| -(g[i] - lambda * w[i] * l.v1[i])).collect();
        let c: Vec<f64> = (0..n).map(|i| w[i] * l.v1[i]).collect();
        let mut h = pb.stiff.clone();
        for i in 0..n {
            h.diag[i] = 2.0 * pb.sigma * h.diag[i] + w[i] * (l.g2[i] - lambda * l.v2[i]);
            if i < n - 1 {
                h.off[i] *= 2.0 * pb.sigma;
            }
        }
        let a = h.solve(&f);
        let b = h.solve(&c);
        let cb = dot(&c, &b);
        if !(cb.is_finite() && cb != 0.0) {
            break;
        }
        let dl = (-defect - dot(&c, &a)) / cb;
        let du: Vec<f64> = (0..n).map(|i| a[i] + dl * b[i]).collect();
        if du.iter().any(|x| !x.is_finite()) {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-4 {
            let trial: Vec<f64> = (0..n).map(|i| u.values[i] + alpha * du[i]).collect();
            let cand = RadialFunction::new(u.grid.clone(), trial)?;
            let lam = lambda + alpha * dl;
            let (m_new, r_new) = merit(&cand, lam);
            if m_new < m_cur || (alpha == 1.0 && m_new <= m_cur * (1.0 + 1e-12)) {
                u = cand;
                lambda = lam;
                m_cur = m_new;
                residual = r_new;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        steps += 1;
        if !moved {
            break;
        }
    }
    Ok(State { u, lambda, residual, iterations: iterations + steps, trace })
}

fn solve(pb: &Problem, init: RadialFunction, opts: &MinimizerOptions) -> Result<MinimizerResult> {
    let (init, _) = project_mass_by_shift(&init, pb.chain, pb.mass)?;
    let mut state = flow(pb, init, opts)?;
    let mut rounds = 0;
    loop {
        state = newton(pb, state, opts)?;
        let defect = (mass(&state.u, pb.chain) - pb.mass).abs();
        if (state.residual < opts.tol && defect < 1e-12 * pb.mass) || rounds >= 3 {
            break;
        }
        // Newton stalled: flow further with a tighter hand-over threshold.
        rounds += 1;
        let tighter = MinimizerOptions { flow_tol: opts.flow_tol * 0.1f64.powi(rounds), ..*opts };
        let (it, mut trace) = (state.iterations, state.trace);
        let mut s = flow(pb, state.u, &tighter)?;
        s.iterations += it;
        trace.append(&mut s.trace);
        s.trace = trace;
        state = s;
    }
    let parts = energy(&state.u, pb.chain, pb.sigma);
    let psi = pb.sigma * parts.grad_sq + parts.potential / pb.sigma;
    let defect = (mass(&state.u, pb.chain) - pb.mass).abs();
    let converged = state.residual < opts.tol && defect < 1e-10 * pb.mass;
    Ok(MinimizerResult {
        eps: pb.sigma,
        mass: pb.mass,
        u: state.u,
        lambda: state.lambda,
        psi,
        parts,
        el_residual: state.residual,
        iterations: state.iterations,
        converged,
        energy_trace: state.trace,
    })
}

fn require_converged(r: MinimizerResult) -> Result<MinimizerResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NoConvergence { iterations: r.iterations, residual: r.el_residual, reason: "residual above tolerance".into() })
    }
}

/// Minimizer of `ψ(ε)` on `grid`, started from the ansatz.
pub fn minimize(chain: &PotentialChain, profile: &Profile, eps: f64, grid: Arc<RadialGrid>, tau0: f64, opts: &MinimizerOptions) -> Result<MinimizerResult> {
    let init = solve_tau_eps(chain, profile, eps, grid, tau0)?.field;
    minimize_from(chain, eps, 1.0, init, opts)
}

/// Minimizer at `(σ, m)` from an arbitrary initial field on its own grid.
pub fn minimize_from(chain: &PotentialChain, sigma: f64, m: f64, init: RadialFunction, opts: &MinimizerOptions) -> Result<MinimizerResult> {
    if !(sigma > 0.0 && m > 0.0) {
        return Err(Error::InvalidArgument(format!("need σ, m > 0 (σ = {sigma}, m = {m})")));
    }
    let r_m = init.grid.r0() * m.powf(1.0 / chain.dim() as f64);
    if sigma > 0.2 * r_m {
        return Err(Error::RegimeViolation(format!("σ = {sigma} exceeds 0.2·R for mass {m}")));
    }
    let pb = Problem { chain, sigma, mass: m, grid: init.grid.clone(), stiff: init.grid.stiffness(), penalty: None };
    require_converged(solve(&pb, init, opts)?)
}

/// Minimizer at `(σ, m)` started from the dilated ansatz.
pub fn minimize_sigma_m(chain: &PotentialChain, profile: &Profile, sigma: f64, m: f64, tau0: f64, opts: &MinimizerOptions) -> Result<MinimizerResult> {
    let dim = chain.dim();
    let k = m.powf(1.0 / dim as f64);
    let eps = sigma / k;
    let base = Arc::new(RadialGrid::for_eps(dim, eps, &opts.grid)?);
    let z = solve_tau_eps(chain, profile, eps, base, tau0)?.field;
    let init = if m == 1.0 { z } else { z.dilated(1.0 / m)? };
    minimize_from(chain, sigma, m, init, opts)
}

/// `λ = ((n−2)/n · σ∫|∇u|² + σ⁻¹∫W(u)) / m`, the scaling identity for the multiplier.
pub fn lambda_from_formula(result: &MinimizerResult, chain: &PotentialChain) -> f64 {
    let n = chain.dim() as f64;
    let p = &result.parts;
    ((n - 2.0) / n * result.eps * p.grad_sq + p.potential / result.eps) / result.mass
}

/// Output of the penalized problem.
#[derive(Clone, Debug)]
pub struct PenalizedResult {
    pub result: MinimizerResult,
    /// `Err = (−2ε²Δw + W′(w)) / (ε w(1−w))` at nodes with `w(1−w) > 1e−8`.
    pub err: Vec<(f64, f64)>,
    pub err_sup: f64,
}

/// Minimizes `AC_ε(w) + a·d_Φ(w, v)` at unit mass, started from `v`.
pub fn solve_penalized(chain: &PotentialChain, eps: f64, a: f64, v: &RadialFunction, opts: &MinimizerOptions) -> Result<PenalizedResult> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("penalty weight {a} must be positive")));
    }
    let phi_v = v.values.iter().map(|&x| chain.phi_value(x)).collect();
    let pb = Problem { chain, sigma: eps, mass: 1.0, grid: v.grid.clone(), stiff: v.grid.stiffness(), penalty: Some(Penalty { a, phi_v }) };
    let result = require_converged(solve(&pb, v.clone(), opts)?)?;
    let ku = pb.grid.apply_stiffness(&result.u.values);
    let w = result.u.grid.weights();
    let mut err = Vec::new();
    let mut err_sup: f64 = 0.0;
    for (i, &x) in result.u.values.iter().enumerate() {
        let q = x * (1.0 - x);
        if q > 1e-8 {
            let val = (2.0 * eps * eps * ku[i] / w[i] + chain.well.jet(x).d1) / (eps * q);
            err_sup = err_sup.max(val.abs());
            err.push((result.u.grid.nodes()[i], val));
        }
    }
    Ok(PenalizedResult { result, err, err_sup })
}

/// Mass-projected smoothed indicator `½(1 − tanh((r − R₀)/w))`.
pub fn smoothed_indicator(chain: &PotentialChain, grid: Arc<RadialGrid>, width: f64) -> Result<RadialFunction> {
    let r0 = grid.r0();
    let u = RadialFunction::from_fn(grid, |r| 0.5 * (1.0 - ((r - r0) / width).tanh()));
    Ok(project_mass_by_shift(&u, chain, 1.0)?.0)
}

/// `(∫ε|∇h|² + h²/ε)^{1/2}` of `u − v`.
pub fn p_distance(u: &RadialFunction, v: &RadialFunction, eps: f64) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let h: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
    Ok(u.grid.p_norm_sq(&h, eps).sqrt())
}

#[cfg(test)]
mod tests;
