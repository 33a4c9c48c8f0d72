use std::sync::{Arc, OnceLock};

use super::*;
use crate::minimizer::{minimize, MinimizerOptions};
use crate::potentials::{chain, make_reference_well};
use crate::profile::{compute_constants, compute_profile, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
use crate::radial::RadialGrid;
use crate::sampling;

struct Fixture {
    chain: PotentialChain,
    profile: Profile,
    result: MinimizerResult,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let p = compute_profile(&ch, DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap();
        let k = compute_constants(&ch, &p).unwrap();
        let opts = MinimizerOptions::default();
        let g = Arc::new(RadialGrid::for_eps(2, 0.05, &opts.grid).unwrap());
        let result = minimize(&ch, &p, 0.05, g, k.tau0, &opts).unwrap();
        Fixture { chain: ch, profile: p, result }
    })
}

fn admissible_batch(f: &Fixture, count: usize, seed: u64) -> Vec<RadialFunction> {
    let hyp = FugledeHypotheses::for_chain(&f.chain);
    admissible_perturbations(&f.chain, &f.result, &hyp, count, &mut sampling::rng(seed)).unwrap()
}

#[test]
fn one_d_kernel_and_bound_state() {
    let f = fixture();
    let s = one_d_spectrum(&f.chain, &f.profile, 3, DEFAULT_HALF_LENGTH, ONE_D_INTERVALS).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-5);
    assert!(kernel_alignment(&s, &f.profile) > 0.9999);
    // −2h″ + W″(η)h = 18(−∂ᵧ² + 4 − 6 sech²y) with y = 3s: bound states 0 and 54.
    assert!((s.eigenvalues[1] - 54.0).abs() < 0.1);
    assert!(kernel_residual(&f.chain, &f.profile, DEFAULT_HALF_LENGTH, ONE_D_INTERVALS) < 1e-5);
}

#[test]
fn continuum_edge_approached_from_above() {
    let f = fixture();
    let edge = f.chain.well.jet(0.0).d2.min(f.chain.well.jet(1.0).d2);
    let third = |half: f64| one_d_spectrum(&f.chain, &f.profile, 3, half, 1 << 15).unwrap().eigenvalues[2];
    let (a, b) = (third(8.0), third(16.0));
    assert!(a > b && b > edge && b - edge < 0.5 * (a - edge));
}

#[test]
fn constraint_lifts_the_spectrum() {
    let f = fixture();
    let c = second_variation_spectrum(&f.chain, &f.result, 2, true).unwrap();
    let u = second_variation_spectrum(&f.chain, &f.result, 2, false).unwrap();
    assert!(c.eigenvalues[0] > 0.0);
    assert!(u.eigenvalues[0] < c.eigenvalues[0]);
    // Rayleigh quotient of the mass-changing direction u′ lies below the constrained minimum.
    let d = f.result.u.derivative();
    let a = second_variation_matrix(&f.chain, &f.result);
    let b = p_matrix(&f.result.u.grid, f.result.eps);
    assert!(a.quad_form(&d) / b.quad_form(&d) < c.eigenvalues[0]);
}

#[test]
fn fuglede_ratio_limit_is_half_the_eigenvalue() {
    let f = fixture();
    let c = second_variation_spectrum(&f.chain, &f.result, 1, true).unwrap();
    let h = &c.eigenvectors[0];
    let hs = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let hyp = FugledeHypotheses::for_chain(&f.chain);
    let ratio = |t: f64| {
        let v = sampling::perturb(&f.chain, &f.result.u, h, t / hs).unwrap();
        fuglede_check(&f.chain, &f.result, &[v], &hyp).unwrap().min_ratio.unwrap()
    };
    let target = 0.5 * c.eigenvalues[0];
    assert!((ratio(1e-3) - target).abs() < 0.1 * target);
    assert!((ratio(1e-4) - target).abs() < (ratio(1e-2) - target).abs());
}

#[test]
fn fuglede_batch_and_zero_perturbation() {
    let f = fixture();
    let hyp = FugledeHypotheses::for_chain(&f.chain);
    let zero = fuglede_check(&f.chain, &f.result, &[f.result.u.clone()], &hyp).unwrap();
    assert_eq!(zero.samples[0].deficit, 0.0);
    assert!(zero.min_ratio.is_none());
    let r = fuglede_check(&f.chain, &f.result, &admissible_batch(f, 40, 3), &hyp).unwrap();
    assert!(r.min_ratio.unwrap() > 0.0);
    assert!(r.gradient_constant.is_finite() && r.sobolev_constant.is_finite());
    let far = RadialFunction::from_fn(f.result.u.grid.clone(), |x| f.result.u.eval(x * 1.2));
    assert!(matches!(fuglede_check(&f.chain, &f.result, &[far], &hyp), Err(Error::HypothesisViolation(_))));
}

#[test]
fn deficit_and_asymmetry() {
    let f = fixture();
    let same = quantitative_stability(&f.chain, &f.result, &[f.result.u.clone()]).unwrap();
    assert_eq!((same.samples[0].deficit, same.samples[0].asymmetry), (0.0, 0.0));
    let mut rng = sampling::rng(11);
    let comps = sampling::decreasing_competitors(&f.chain, &f.result.u, f.result.eps, 30, &mut rng).unwrap();
    let q = quantitative_stability(&f.chain, &f.result, &comps).unwrap();
    assert!(q.samples.iter().all(|s| s.deficit > -1e-7));
    assert!(q.sup_ratio.is_finite() && q.sup_ratio > 0.0);
    assert!(q.max_asymmetry <= 2f64.powf(2.0));
    assert!(q.binned_max_asymmetry.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn symmetrization_gap_behaviour() {
    let f = fixture();
    let mono = symmetrization_gap(&f.chain, &f.result.u).unwrap();
    assert_eq!((mono.lhs, mono.dirichlet_gap), (0.0, 0.0));
    let mut rng = sampling::rng(5);
    let fields = sampling::non_monotone_fields(&f.chain, &f.result.u, f.result.eps, 8, &mut rng).unwrap();
    let samples: Vec<_> = fields.iter().map(|u| symmetrization_gap(&f.chain, u).unwrap()).collect();
    assert!(samples.iter().all(|s| s.lhs > 0.0 && s.rhs_base > 0.0));
    assert!(symmetrization_constant(&samples).is_finite());
    // Under u ↦ u(t^{1/n}x) the ratio lhs/rhs scales exactly by t^{−1/n}.
    let t: f64 = 1.7;
    for (u, s) in fields.iter().zip(&samples) {
        let d = symmetrization_gap(&f.chain, &u.dilated(t).unwrap()).unwrap();
        let scale = (d.lhs / d.rhs_base) / (s.lhs / s.rhs_base);
        assert!((scale - t.powf(-0.5)).abs() < 1e-9, "{scale}");
    }
}

#[test]
fn structure_condition() {
    let f = fixture();
    let r = verify_ps_condition(&f.chain, 1.0, 0.01).unwrap();
    assert!(r.pass && r.beta_in_near_well && r.beta < 1.0);
    let betas: Vec<f64> = [1e-2, 1e-4, 1e-6].iter().map(|&sl| verify_ps_condition(&f.chain, 1.0, sl).unwrap().beta).collect();
    assert!(betas.windows(2).all(|w| w[1] > w[0]));
    assert!(1.0 - betas[2] < 1e-3);
    assert!(matches!(verify_ps_condition(&f.chain, 1.0, 0.0), Err(Error::NoBeta(_))));
    assert!(verify_ps_condition(&f.chain, 1.0, 10.0).is_ok());
}

#[test]
fn constrained_eigenvalue_is_stable_in_eps() {
    let f = fixture();
    let k = compute_constants(&f.chain, &f.profile).unwrap();
    let opts = MinimizerOptions::default();
    let mu: Vec<f64> = [0.1, 0.025]
        .iter()
        .map(|&eps| {
            let g = Arc::new(RadialGrid::for_eps(2, eps, &opts.grid).unwrap());
            let r = minimize(&f.chain, &f.profile, eps, g, k.tau0, &opts).unwrap();
            second_variation_spectrum(&f.chain, &r, 1, true).unwrap().eigenvalues[0]
        })
        .chain(std::iter::once(second_variation_spectrum(&f.chain, &f.result, 1, true).unwrap().eigenvalues[0]))
        .collect();
    let (lo, hi) = (mu.iter().cloned().fold(f64::INFINITY, f64::min), mu.iter().cloned().fold(0.0, f64::max));
    assert!(lo > 0.0 && hi <= 1.2 * lo, "{mu:?}");
}
