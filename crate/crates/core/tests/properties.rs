use std::sync::{Arc, OnceLock};

use aciso_core::potentials::{chain, make_reference_well, PotentialChain};
use aciso_core::profile::{compute_profile, tau_defining_integral, Profile, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
use aciso_core::radial::{
    d_phi, energy, mass, quasi_triangle_slack, rearrange, GridSpec, RadialFunction, RadialGrid,
};
use proptest::prelude::*;

fn quartic(n: usize) -> &'static PotentialChain {
    static C: [OnceLock<PotentialChain>; 2] = [OnceLock::new(), OnceLock::new()];
    C[n - 2].get_or_init(|| chain(&make_reference_well(), n).unwrap())
}

fn profile() -> &'static Profile {
    static P: OnceLock<Profile> = OnceLock::new();
    P.get_or_init(|| compute_profile(quartic(2), DEFAULT_HALF_LENGTH, DEFAULT_POINTS).unwrap())
}

fn grid(n: usize) -> Arc<RadialGrid> {
    let spec = GridSpec { points_per_eps: 16.0, ..GridSpec::default() };
    Arc::new(RadialGrid::for_eps(n, 0.1, &spec).unwrap())
}

type Bump = (f64, f64, f64);

/// Sum of Gaussian bumps, clamped to `[0, 1]`.
fn field(grid: Arc<RadialGrid>, bumps: &[Bump]) -> RadialFunction {
    let r0 = grid.r0();
    let f = |r: f64| bumps.iter().map(|&(c, w, a)| a * (-((r - c * r0) / (w * r0)).powi(2)).exp()).sum::<f64>();
    let values = grid.nodes().iter().map(|&r| f(r)).collect();
    RadialFunction::new(grid, values).unwrap()
}

fn bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec((0.0..2.5f64, 0.05..1.0f64, -0.5..1.5f64), 1..5)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_identities(n in 2usize..4, b in bumps(), t in 0.3..3.0f64, eps in 0.02..0.2f64) {
        let ch = quartic(n);
        let u = field(grid(n), &b);
        let ut = u.dilated(t).unwrap();
        prop_assert!(close(mass(&ut, ch), mass(&u, ch) / t, 1e-12));
        let nf = n as f64;
        let lhs = energy(&ut, ch, eps).total;
        let rhs = energy(&u, ch, eps * t.powf(1.0 / nf)).total / t.powf((nf - 1.0) / nf);
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn d_phi_is_a_quasi_metric(n in 2usize..4, a in bumps(), b in bumps(), c in bumps()) {
        let ch = quartic(n);
        let g = grid(n);
        let (u, v, w) = (field(g.clone(), &a), field(g.clone(), &b), field(g, &c));
        prop_assert_eq!(d_phi(&u, &u, ch).unwrap(), 0.0);
        let (uv, vu) = (d_phi(&u, &v, ch).unwrap(), d_phi(&v, &u, ch).unwrap());
        prop_assert!((uv - vu).abs() <= 1e-14 * uv.max(1.0));
        prop_assert!(quasi_triangle_slack(&u, &v, &w, ch).unwrap() >= -1e-12);
    }

    #[test]
    fn rearrangement_properties(n in 2usize..4, b in bumps()) {
        let ch = quartic(n);
        let u = field(grid(n), &b);
        let s = rearrange(&u, ch);
        prop_assert!((mass(&s, ch) - mass(&u, ch)).abs() <= 1e-8 * mass(&u, ch).max(1.0));
        prop_assert!(s.values.windows(2).all(|w| w[1] <= w[0]));
        let sup = |f: &RadialFunction| f.values.iter().cloned().fold(0.0, f64::max);
        prop_assert!(sup(&s) <= sup(&u));
        prop_assert!(s.grid.dirichlet(&s.values) <= s.grid.dirichlet(&u.values) * (1.0 + 1e-12));
        prop_assert!(d_phi(&s, &rearrange(&s, ch), ch).unwrap() <= 1e-12);
    }

    #[test]
    fn fields_are_clamped(v in prop::collection::vec(-2.0..3.0f64, 1..50)) {
        let g = grid(2);
        let mut values = vec![0.5; g.len()];
        values[..v.len()].copy_from_slice(&v);
        let u = RadialFunction::new(g, values).unwrap();
        prop_assert!(u.values.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn quartic_closed_forms(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let ch = quartic(2);
        let w = &ch.well;
        let ja = w.jet(a);
        let d = b - a;
        let r = w.w(b) - ja.f - ja.d1 * d - 0.5 * ja.d2 * d * d;
        // W‴ = 36(24t − 12) and W⁗ = 864 make the remainder 36(3a + b − 2)(b − a)³.
        prop_assert!((r - 36.0 * (3.0 * a + b - 2.0) * d.powi(3)).abs() <= 1e-11);
        // Φ(b) − Φ(a) = (b − a)(3(a+b) − 2(a²+ab+b²)) and the second factor is ≥ |b − a| on [0,1].
        let dphi = ch.phi_value(b) - ch.phi_value(a);
        prop_assert!(dphi.abs() >= d * d * (1.0 - 1e-9));
        prop_assert!((ch.v(a) - ch.phi_value(a).powi(2)).abs() <= 1e-12);
    }

    #[test]
    fn phi_and_v_are_increasing(n in 2usize..4, a in 0.0..1.0f64, h in 1e-6..0.5f64) {
        let ch = quartic(n);
        let b = (a + h).min(1.0);
        prop_assume!(b > a);
        prop_assert!(ch.phi_value(b) > ch.phi_value(a));
        prop_assert!(ch.v(b) >= ch.v(a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn defining_integral_decreases_in_tau(t in -1.0..1.0f64, h in 0.01..0.5f64) {
        let (ch, p) = (quartic(2), profile());
        let w = (-DEFAULT_HALF_LENGTH + 2.0, DEFAULT_HALF_LENGTH - 2.0);
        let f0 = tau_defining_integral(ch, p, t, w).unwrap();
        let f1 = tau_defining_integral(ch, p, t + h, w).unwrap();
        prop_assert!(f1 < f0);
    }
}
