//! `Ψ(σ, m)` and `Λ(σ, m)` on a rectangular grid, computed directly and
//! through the unit-mass problem with `Ψ(σ,m) = m^{(n−1)/n} ψ(σ/m^{1/n})`,
//! `Λ(σ,m) = m^{−1/n} λ(σ/m^{1/n})`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize_sigma_m, MinimizerOptions};
use crate::error::Result;
use crate::potentials::PotentialChain;
use crate::profile::Profile;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PsiRow {
    pub sigma: f64,
    pub m: f64,
    pub eps: f64,
    pub psi_direct: f64,
    pub lambda_direct: f64,
    pub psi_scaled: f64,
    pub lambda_scaled: f64,
}

/// Structural checks over the table; `*_ok` flags and the worst margins.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SurfaceChecks {
    pub lambda_decreasing_in_m: bool,
    pub psi_increasing_in_m: bool,
    /// Largest second difference of `Ψ(σ, ·)` (concavity requires ≤ 0).
    pub max_second_difference: f64,
    pub psi_increasing_in_sigma: bool,
    /// Largest `|Ψ_direct − Ψ_scaled|` relative to `Ψ`.
    pub scaling_residual: f64,
    /// Largest relative gap between the central difference of `Ψ` in `m` and `Λ`.
    pub derivative_mismatch: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiTable {
    pub sigmas: Vec<f64>,
    pub masses: Vec<f64>,
    /// Row-major in `(σ, m)`.
    pub rows: Vec<PsiRow>,
    pub checks: SurfaceChecks,
}

impl PsiTable {
    pub fn row(&self, i: usize, j: usize) -> &PsiRow {
        &self.rows[i * self.masses.len() + j]
    }
}

/// Solves every `(σ, m)` pair both ways. Pairs run in parallel; order is deterministic.
pub fn psi_surface(
    chain: &PotentialChain,
    profile: &Profile,
    tau0: f64,
    sigmas: &[f64],
    masses: &[f64],
    opts: &MinimizerOptions,
) -> Result<PsiTable> {
    let n = chain.dim() as f64;
    let pairs: Vec<(f64, f64)> = sigmas.iter().flat_map(|&s| masses.iter().map(move |&m| (s, m))).collect();
    let rows: Result<Vec<PsiRow>> = pairs
        .par_iter()
        .map(|&(sigma, m)| {
            let eps = sigma / m.powf(1.0 / n);
            let direct = minimize_sigma_m(chain, profile, sigma, m, tau0, opts)?;
            let unit = minimize_sigma_m(chain, profile, eps, 1.0, tau0, opts)?;
            Ok(PsiRow {
                sigma,
                m,
                eps,
                psi_direct: direct.psi,
                lambda_direct: direct.lambda,
                psi_scaled: m.powf((n - 1.0) / n) * unit.psi,
                lambda_scaled: m.powf(-1.0 / n) * unit.lambda,
            })
        })
        .collect();
    let rows = rows?;
    let checks = check_surface(sigmas.len(), masses, &rows);
    Ok(PsiTable { sigmas: sigmas.to_vec(), masses: masses.to_vec(), rows, checks })
}

fn check_surface(ns: usize, masses: &[f64], rows: &[PsiRow]) -> SurfaceChecks {
    let nm = masses.len();
    let at = |i: usize, j: usize| &rows[i * nm + j];
    let mut c = SurfaceChecks {
        lambda_decreasing_in_m: true,
        psi_increasing_in_m: true,
        max_second_difference: f64::NEG_INFINITY,
        psi_increasing_in_sigma: true,
        scaling_residual: 0.0,
        derivative_mismatch: 0.0,
    };
    for i in 0..ns {
        for j in 0..nm {
            let r = at(i, j);
            c.scaling_residual = c.scaling_residual.max((r.psi_direct - r.psi_scaled).abs() / r.psi_direct);
            if j + 1 < nm {
                let s = at(i, j + 1);
                c.lambda_decreasing_in_m &= s.lambda_direct < r.lambda_direct;
                c.psi_increasing_in_m &= s.psi_direct > r.psi_direct;
            }
            if j >= 1 && j + 1 < nm {
                let (a, b) = (at(i, j - 1), at(i, j + 1));
                let (h0, h1) = (r.m - a.m, b.m - r.m);
                // Second divided difference scaled to the uniform-step form.
                let d2 = 2.0 * (h0 * b.psi_direct - (h0 + h1) * r.psi_direct + h1 * a.psi_direct) / (h0 + h1);
                c.max_second_difference = c.max_second_difference.max(d2);
                let deriv = (h0 * h0 * (b.psi_direct - r.psi_direct) + h1 * h1 * (r.psi_direct - a.psi_direct)) / (h0 * h1 * (h0 + h1));
                c.derivative_mismatch = c.derivative_mismatch.max((deriv - r.lambda_direct).abs() / r.lambda_direct);
            }
            if i + 1 < ns {
                c.psi_increasing_in_sigma &= at(i + 1, j).psi_direct > r.psi_direct;
            }
        }
    }
    c
}
