//! Seeded generators of radial test fields.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::Result;
use crate::potentials::PotentialChain;
use crate::radial::{mass, project_mass_by_shift, RadialFunction, RadialGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bump(r: f64, c: f64, w: f64) -> f64 {
    (-((r - c) / w).powi(2)).exp()
}

/// Random sum of Gaussian bumps: `k` localized within `±5ε` of `R₀`, and
/// one each in the inner and outer far field. Normalized to unit sup norm.
pub fn layer_perturbation<R: Rng>(grid: &RadialGrid, eps: f64, rng: &mut R) -> Vec<f64> {
    let r0 = grid.r0();
    let k = rng.gen_range(1..=4);
    let mut terms: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(-1.0..1.0), r0 + rng.gen_range(-5.0..5.0) * eps, rng.gen_range(0.5..3.0) * eps))
        .collect();
    terms.push((rng.gen_range(-0.3..0.3), r0 - rng.gen_range(6.0..12.0) * eps, rng.gen_range(1.0..3.0) * eps));
    terms.push((rng.gen_range(-0.3..0.3), r0 + rng.gen_range(6.0..12.0) * eps, rng.gen_range(1.0..3.0) * eps));
    let h: Vec<f64> = grid.nodes().iter().map(|&r| terms.iter().map(|&(a, c, w)| a * bump(r, c, w)).sum()).collect();
    let s = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s > 0.0 { h.iter().map(|v| v / s).collect() } else { h }
}

/// `u + t·h` clamped to `[0,1]` and shifted back to unit mass.
pub fn perturb(chain: &PotentialChain, u: &RadialFunction, h: &[f64], t: f64) -> Result<RadialFunction> {
    let vals = u.values.iter().zip(h).map(|(a, b)| a + t * b).collect();
    let v = RadialFunction::new(u.grid.clone(), vals)?;
    Ok(project_mass_by_shift(&v, chain, mass(u, chain))?.0)
}

/// Radially decreasing unit-mass competitors of three kinds: wrapped
/// profiles of other widths, monotone reparametrizations of `base`, and
/// two-step superpositions.
pub fn decreasing_competitors<R: Rng>(
    chain: &PotentialChain,
    base: &RadialFunction,
    eps: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<RadialFunction>> {
    let grid = base.grid.clone();
    let r0 = grid.r0();
    let logistic = |s: f64| 1.0 / (1.0 + (6.0 * s).exp());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = match out.len() % 3 {
            0 => {
                let w = eps * rng.gen_range(0.5..4.0);
                RadialFunction::from_fn(grid.clone(), |r| logistic((r - r0) / w))
            }
            1 => {
                let c = rng.gen_range(0.5..3.0);
                let b = rng.gen_range(-0.9..1.0) * c;
                let scale = rng.gen_range(0.0..1.0f64).powi(2);
                RadialFunction::from_fn(grid.clone(), |r| base.eval(r + scale * b * eps * ((r - r0) / (c * eps)).tanh()))
            }
            _ => {
                let q = rng.gen_range(0.3..0.9);
                let gap = (rng.gen_range(1.0..20.0) * eps).min(0.5 * r0);
                let w = eps * rng.gen_range(0.7..2.0);
                RadialFunction::from_fn(grid.clone(), |r| q * logistic((r - r0 + gap) / w) + (1.0 - q) * logistic((r - r0 - gap) / w))
            }
        };
        if let Ok((u, _)) = project_mass_by_shift(&u, chain, 1.0) {
            out.push(u);
        }
    }
    Ok(out)
}

/// Unit-mass radial fields that are not monotone: `base` plus bumps and
/// dips anywhere inside `R₀ + 4ε`, and an optional detached outer ring.
pub fn non_monotone_fields<R: Rng>(
    chain: &PotentialChain,
    base: &RadialFunction,
    eps: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<RadialFunction>> {
    let grid: Arc<RadialGrid> = base.grid.clone();
    let r0 = grid.r0();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(1..=3);
        let mut terms: Vec<(f64, f64, f64)> = (0..k)
            .map(|_| {
                let a = rng.gen_range(0.1..0.6) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (a, rng.gen_range(0.0..r0 + 4.0 * eps), rng.gen_range(1.0..4.0) * eps)
            })
            .collect();
        if rng.gen_bool(0.5) {
            terms.push((rng.gen_range(0.2..0.8), rng.gen_range(r0 + 3.0 * eps..2.0 * r0), rng.gen_range(1.0..3.0) * eps));
        }
        let vals = grid
            .nodes()
            .iter()
            .zip(&base.values)
            .map(|(&r, &b)| b + terms.iter().map(|&(a, c, w)| a * bump(r, c, w)).sum::<f64>())
            .collect();
        let u = RadialFunction::new(grid.clone(), vals)?;
        let Ok((u, _)) = project_mass_by_shift(&u, chain, 1.0) else { continue };
        if u.values.windows(2).any(|w| w[1] > w[0] + 1e-6) {
            out.push(u);
        }
    }
    Ok(out)
}
