//! Second-variation spectra, Fuglede ratios, deficit/asymmetry statistics,
//! the symmetrization gap, and the Peletier–Serrin structure check.

mod serrin;

pub use serrin::{probe_nu0, verify_ps_condition, NuProbe, PsReport};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimizer::MinimizerResult;
use crate::numerics::tridiag::{dot, lowest_eigenpairs, SymTridiag};
use crate::potentials::PotentialChain;
use crate::profile::Profile;
use crate::radial::{d_phi, energy, rearrange, RadialFunction, RadialGrid};
use crate::sampling;

/// Intervals of the uniform mesh used for the one-dimensional operator.
pub const ONE_D_INTERVALS: usize = 1 << 18;
const EIG_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// Restricted to `{∫V′(u_ε)h = 0}`.
    pub constraint_applied: bool,
    /// Mesh abscissae (`s` for the 1-D operator, `r` otherwise).
    #[serde(skip)]
    pub abscissae: Vec<f64>,
    pub nodes: usize,
}

/// `h ↦ −2h″ + W″(η)h` on `[−S, S]` with zero boundary values, three-point differences.
pub fn one_d_operator(chain: &PotentialChain, profile: &Profile, half_length: f64, intervals: usize) -> (SymTridiag, Vec<f64>) {
    let h = 2.0 * half_length / intervals as f64;
    let s: Vec<f64> = (1..intervals).map(|i| -half_length + h * i as f64).collect();
    let n = s.len();
    let mut a = SymTridiag::zeros(n);
    let k = 2.0 / (h * h);
    for (i, &x) in s.iter().enumerate() {
        let p = profile.eval(x);
        a.diag[i] = 2.0 * k + chain.well.jet_split(p.eta, p.eta_c).d2;
        if i + 1 < n {
            a.off[i] = -k;
        }
    }
    (a, s)
}

/// Lowest `k` eigenpairs of the one-dimensional operator; vectors have unit Euclidean norm.
pub fn one_d_spectrum(chain: &PotentialChain, profile: &Profile, k: usize, half_length: f64, intervals: usize) -> Result<SpectrumReport> {
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one eigenpair".into()));
    }
    let (a, s) = one_d_operator(chain, profile, half_length, intervals);
    let mut b = SymTridiag::zeros(s.len());
    b.diag.iter_mut().for_each(|d| *d = 1.0);
    let e = lowest_eigenpairs(&a, &b, None, k, EIG_TOL)?;
    Ok(SpectrumReport { eigenvalues: e.values, eigenvectors: e.vectors, constraint_applied: false, nodes: s.len(), abscissae: s })
}

/// `|cos|` between the lowest eigenvector and the sampled `η′`.
pub fn kernel_alignment(report: &SpectrumReport, profile: &Profile) -> f64 {
    let d: Vec<f64> = report.abscissae.iter().map(|&s| profile.eval(s).d1).collect();
    let v = &report.eigenvectors[0];
    dot(v, &d).abs() / (dot(v, v) * dot(&d, &d)).sqrt()
}

/// Sup norm of the discrete operator applied to the sampled `η′`.
pub fn kernel_residual(chain: &PotentialChain, profile: &Profile, half_length: f64, intervals: usize) -> f64 {
    let (a, s) = one_d_operator(chain, profile, half_length, intervals);
    let d: Vec<f64> = s.iter().map(|&x| profile.eval(x).d1).collect();
    a.mul(&d).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Matrix of the second variation `∫2σ|∇h|² + (W″(u)/σ − λV″(u))h²`.
pub fn second_variation_matrix(chain: &PotentialChain, result: &MinimizerResult) -> SymTridiag {
    let grid = &result.u.grid;
    let s = result.eps;
    let mut a = grid.stiffness();
    let w = grid.weights();
    for i in 0..a.len() {
        let x = result.u.values[i];
        let q = chain.well.jet_split(x, 1.0 - x).d2 / s - result.lambda * chain.vee(x).d2;
        a.diag[i] = 2.0 * s * a.diag[i] + w[i] * q;
        if i + 1 < a.len() {
            a.off[i] *= 2.0 * s;
        }
    }
    a
}

/// Matrix of `∫σ|∇h|² + h²/σ`.
pub fn p_matrix(grid: &RadialGrid, sigma: f64) -> SymTridiag {
    let mut b = grid.stiffness();
    let w = grid.weights();
    for i in 0..b.len() {
        b.diag[i] = sigma * b.diag[i] + w[i] / sigma;
        if i + 1 < b.len() {
            b.off[i] *= sigma;
        }
    }
    b
}

/// Constraint vector `(wᵢV′(uᵢ))`.
pub fn constraint_vector(chain: &PotentialChain, u: &RadialFunction) -> Vec<f64> {
    u.grid.weights().iter().zip(&u.values).map(|(w, &x)| w * chain.vee(x).d1).collect()
}

/// Lowest `k` eigenvalues of the second variation relative to the `P_σ`
/// inner product, with or without the mass constraint.
pub fn second_variation_spectrum(chain: &PotentialChain, result: &MinimizerResult, k: usize, constrained: bool) -> Result<SpectrumReport> {
    let a = second_variation_matrix(chain, result);
    let b = p_matrix(&result.u.grid, result.eps);
    let c = constraint_vector(chain, &result.u);
    let e = lowest_eigenpairs(&a, &b, if constrained { Some(&c) } else { None }, k, EIG_TOL)?;
    Ok(SpectrumReport {
        eigenvalues: e.values,
        eigenvectors: e.vectors,
        constraint_applied: constrained,
        nodes: result.u.grid.len(),
        abscissae: result.u.grid.nodes().to_vec(),
    })
}

/// Admissibility of perturbations: `∫h² ≤ Cσ` and `‖h‖∞ ≤ δ₀`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FugledeHypotheses {
    pub l2_constant: f64,
    pub sup_bound: f64,
}

impl FugledeHypotheses {
    pub fn for_chain(chain: &PotentialChain) -> Self {
        Self { l2_constant: 1.0, sup_bound: chain.delta0() }
    }

    pub fn admits(&self, h: &[f64], grid: &RadialGrid, eps: f64) -> bool {
        let l2 = grid.integrate(&h.iter().map(|v| v * v).collect::<Vec<_>>());
        let sup = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        l2 <= self.l2_constant * eps && sup <= self.sup_bound
    }
}

/// Random layer perturbations of `result.u` at random amplitudes, halved until
/// the difference passes `hyp`.
pub fn admissible_perturbations<R: Rng>(
    chain: &PotentialChain,
    result: &MinimizerResult,
    hyp: &FugledeHypotheses,
    count: usize,
    rng: &mut R,
) -> Result<Vec<RadialFunction>> {
    let u = &result.u;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let h = sampling::layer_perturbation(&u.grid, result.eps, rng);
        let mut amp = hyp.sup_bound * rng.gen_range(0.01..0.9);
        for _ in 0..60 {
            let v = sampling::perturb(chain, u, &h, amp)?;
            let d: Vec<f64> = v.values.iter().zip(&u.values).map(|(a, b)| a - b).collect();
            if hyp.admits(&d, &u.grid, result.eps) {
                out.push(v);
                break;
            }
            amp *= 0.5;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FugledeSample {
    pub deficit: f64,
    /// `∫ε|∇h|² + h²/ε`.
    pub p_norm_sq: f64,
    /// `None` when `h = 0`.
    pub ratio: Option<f64>,
    /// `∫|∇(h²)|`.
    pub grad_h2: f64,
    /// `(∫|h|^{2n/(n−1)})^{(n−1)/n}`.
    pub sobolev: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FugledeReport {
    pub eps: f64,
    pub samples: Vec<FugledeSample>,
    pub min_ratio: Option<f64>,
    /// Smallest `C` with `C·δ ≥ ∫|∇(h²)|` over the batch.
    pub gradient_constant: f64,
    /// Smallest `C` with `C·δ ≥ (∫|h|^{2n/(n−1)})^{(n−1)/n}` over the batch.
    pub sobolev_constant: f64,
}

fn grad_of_square(grid: &RadialGrid, h: &[f64]) -> f64 {
    let x = grid.nodes();
    (0..x.len() - 1)
        .map(|e| {
            let (l, r, _) = grid.element(e);
            (l + r) * (h[e + 1] * h[e + 1] - h[e] * h[e]).abs() / (x[e + 1] - x[e])
        })
        .sum()
}

/// Deficit against `P_ε` norm of `h = u − u_ε` for each perturbation.
pub fn fuglede_check(chain: &PotentialChain, result: &MinimizerResult, perturbations: &[RadialFunction], hyp: &FugledeHypotheses) -> Result<FugledeReport> {
    let eps = result.eps;
    let n = chain.dim() as f64;
    let q = 2.0 * n / (n - 1.0);
    let grid = &result.u.grid;
    let mut samples = Vec::with_capacity(perturbations.len());
    for u in perturbations {
        if !u.same_grid(&result.u) {
            return Err(Error::GridMismatch);
        }
        let h: Vec<f64> = u.values.iter().zip(&result.u.values).map(|(a, b)| a - b).collect();
        if !hyp.admits(&h, grid, eps) {
            return Err(Error::HypothesisViolation("perturbation exceeds the L² or sup bound".into()));
        }
        let deficit = energy(u, chain, eps).total - result.psi;
        let p_norm_sq = grid.p_norm_sq(&h, eps);
        let ratio = if p_norm_sq > 0.0 { Some(deficit / p_norm_sq) } else { None };
        let sob = grid.integrate(&h.iter().map(|v| v.abs().powf(q)).collect::<Vec<_>>()).powf((n - 1.0) / n);
        samples.push(FugledeSample { deficit, p_norm_sq, ratio, grad_h2: grad_of_square(grid, &h), sobolev: sob });
    }
    let min_ratio = samples.iter().filter_map(|s| s.ratio).reduce(f64::min);
    let calib = |f: fn(&FugledeSample) -> f64| {
        samples.iter().filter(|s| s.deficit > 0.0).map(|s| f(s) / s.deficit).fold(0.0, f64::max)
    };
    let gradient_constant = calib(|s| s.grad_h2);
    let sobolev_constant = calib(|s| s.sobolev);
    Ok(FugledeReport { eps, samples, min_ratio, gradient_constant, sobolev_constant })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AsymmetrySample {
    pub deficit: f64,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantitativeReport {
    pub eps: f64,
    pub samples: Vec<AsymmetrySample>,
    /// `sup α/√δ` over samples with positive deficit.
    pub sup_ratio: f64,
    pub max_asymmetry: f64,
    /// Largest asymmetry per deficit quintile, smallest deficits first.
    pub binned_max_asymmetry: Vec<f64>,
}

/// `(δ_ε, α_ε)` for radially decreasing unit-mass competitors.
pub fn quantitative_stability(chain: &PotentialChain, result: &MinimizerResult, competitors: &[RadialFunction]) -> Result<QuantitativeReport> {
    let mut samples = Vec::with_capacity(competitors.len());
    for u in competitors {
        let deficit = energy(u, chain, result.eps).total - result.psi;
        let asymmetry = d_phi(u, &result.u, chain)?;
        samples.push(AsymmetrySample { deficit, asymmetry });
    }
    let sup_ratio = samples.iter().filter(|s| s.deficit > 0.0).map(|s| s.asymmetry / s.deficit.sqrt()).fold(0.0, f64::max);
    let max_asymmetry = samples.iter().map(|s| s.asymmetry).fold(0.0, f64::max);
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.deficit.total_cmp(&b.deficit));
    let bins = 5.min(sorted.len());
    let binned_max_asymmetry = (0..bins)
        .map(|k| {
            let (lo, hi) = (k * sorted.len() / bins, (k + 1) * sorted.len() / bins);
            sorted[lo..hi].iter().map(|s| s.asymmetry).fold(0.0, f64::max)
        })
        .collect();
    Ok(QuantitativeReport { eps: result.eps, samples, sup_ratio, max_asymmetry, binned_max_asymmetry })
}

/// `d_Φ(u, u*)` against `(∫W(u))^{1/2} (∫|∇u|² − ∫|∇u*|²)^{1/2}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SymmetrizationSample {
    pub lhs: f64,
    /// Right-hand side without its constant.
    pub rhs_base: f64,
    pub dirichlet_gap: f64,
    pub mass_change: f64,
}

pub fn symmetrization_gap(chain: &PotentialChain, u: &RadialFunction) -> Result<SymmetrizationSample> {
    let star = rearrange(u, chain);
    let lhs = d_phi(u, &star, chain)?;
    let g = &u.grid;
    let gap = g.dirichlet(&u.values) - g.dirichlet(&star.values);
    let pot = g.integrate(&u.values.iter().map(|&x| chain.well.w(x).max(0.0)).collect::<Vec<_>>());
    let mass_change = crate::radial::mass(&star, chain) - crate::radial::mass(u, chain);
    Ok(SymmetrizationSample { lhs, rhs_base: (pot * gap.max(0.0)).sqrt(), dirichlet_gap: gap, mass_change })
}

/// Smallest constant making `lhs ≤ C·rhs_base` over the batch; infinite if
/// some sample has `lhs > 0` with a vanishing right-hand side.
pub fn symmetrization_constant(samples: &[SymmetrizationSample]) -> f64 {
    samples
        .iter()
        .filter(|s| s.lhs > 0.0)
        .map(|s| if s.rhs_base > 0.0 { s.lhs / s.rhs_base } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
