//! Double-well potentials `W` on `[0, 1]` and the derived chain
//! `Φ(t) = ∫₀ᵗ √W`, `V = Φ^{n/(n−1)}`.
//!
//! Wells are evaluated with both `t` and `1 − t` available so that values near
//! the right well keep full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad;

/// Number of Chebyshev probe points used for admissibility and δ₀ checks.
pub const PROBE_POINTS: usize = 4096;
/// Largest two-sided constant accepted when probing δ₀.
pub const DELTA0_CONSTANT_CAP: f64 = 1e3;
const PHI_TABLE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellKind {
    ReferenceQuartic,
    UserSupplied,
}

/// `(W, W′, W″)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Piecewise polynomial in the global variable `t`; piece `i` lives on
/// `[breaks[i], breaks[i+1]]` with coefficients in ascending powers of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    pub breaks: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
struct Piece {
    lo: f64,
    hi: f64,
    /// Coefficients in powers of `t`.
    left: Vec<f64>,
    /// Coefficients in powers of `1 − t`.
    right: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Shape {
    Quartic,
    Pieces(Vec<Piece>),
}

/// An admissible double-well potential: `W(0) = W(1) = 0`, `W > 0` inside,
/// nondegenerate wells.
#[derive(Clone, Debug)]
pub struct DoubleWell {
    kind: WellKind,
    shape: Shape,
    scale: f64,
    normalization_residual: f64,
    w2_lipschitz: f64,
}

fn poly_jet(c: &[f64], x: f64) -> Jet {
    let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + f;
        f = f * x + a;
    }
    Jet { f, d1, d2 }
}

/// Re-expands `Σ a_k t^k` in powers of `x = 1 − t`.
fn reflect(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (k, &a) in c.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out[j] += a * binom * sign;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

/// Chebyshev-distributed probe points on `(0, 1)`, returned as `(t, 1 − t)`.
pub fn probe_grid(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let c = th.cos();
            // 1 ∓ cos θ = 2 sin²(θ/2) or 2 cos²(θ/2) keeps both ends accurate.
            let t = (0.5 * th).sin().powi(2);
            let tc = (0.5 * th).cos().powi(2);
            debug_assert!((t - (1.0 - c) / 2.0).abs() < 1e-15);
            (t, tc)
        })
        .collect()
}

impl DoubleWell {
    pub fn kind(&self) -> WellKind {
        self.kind
    }

    /// Overall multiplicative factor applied to the raw shape.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `|∫₀¹ √W − 1|`.
    pub fn normalization_residual(&self) -> f64 {
        self.normalization_residual
    }

    /// Finite-difference Lipschitz estimate of `W″` on the probe grid.
    pub fn w2_lipschitz(&self) -> f64 {
        self.w2_lipschitz
    }

    /// Builds an unnormalized well from piecewise polynomial data.
    pub fn from_pieces(pp: &PiecewisePolynomial) -> Result<Self> {
        let b = &pp.breaks;
        if b.len() < 2 || pp.coeffs.len() + 1 != b.len() {
            return Err(Error::NonAdmissible("need k+1 breaks for k pieces".into()));
        }
        if b[0] != 0.0 || *b.last().unwrap() != 1.0 || b.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonAdmissible("breaks must increase from 0 to 1".into()));
        }
        let last = pp.coeffs.len() - 1;
        let mut pieces = Vec::with_capacity(pp.coeffs.len());
        for (i, c) in pp.coeffs.iter().enumerate() {
            if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonAdmissible(format!("piece {i} has no finite coefficients")));
            }
            let mut left = c.clone();
            let mut right = reflect(c);
            let mag = c.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
            // The wells force W and W′ to vanish at the endpoints; drop the
            // rounding noise the re-expansion leaves there.
            if i == 0 {
                for a in left.iter_mut().take(2) {
                    if a.abs() <= 1e-12 * mag {
                        *a = 0.0;
                    }
                }
            }
            if i == last {
                for a in right.iter_mut().take(2) {
                    if a.abs() <= 1e-12 * mag {
                        *a = 0.0;
                    }
                }
            }
            pieces.push(Piece { lo: b[i], hi: b[i + 1], left, right });
        }
        let mut well = Self {
            kind: WellKind::UserSupplied,
            shape: Shape::Pieces(pieces),
            scale: 1.0,
            normalization_residual: f64::NAN,
            w2_lipschitz: f64::NAN,
        };
        well.validate()?;
        well.normalization_residual = (well.sqrt_integral()? - 1.0).abs();
        Ok(well)
    }

    fn raw_jet(&self, t: f64, tc: f64) -> Jet {
        match &self.shape {
            Shape::Quartic => {
                // 36 t² (1−t)² written in t and tc = 1 − t.
                Jet {
                    f: 36.0 * t * t * tc * tc,
                    d1: 72.0 * t * tc * (tc - t),
                    d2: 72.0 * (t * t - 4.0 * t * tc + tc * tc),
                }
            }
            Shape::Pieces(pieces) => {
                let idx = if t <= 0.5 {
                    pieces.iter().position(|p| t <= p.hi).unwrap_or(pieces.len() - 1)
                } else {
                    pieces.iter().rposition(|p| tc <= 1.0 - p.lo).unwrap_or(0)
                };
                let p = &pieces[idx];
                if t <= 0.5 {
                    poly_jet(&p.left, t)
                } else {
                    let j = poly_jet(&p.right, tc);
                    Jet { f: j.f, d1: -j.d1, d2: j.d2 }
                }
            }
        }
    }

    /// `(W, W′, W″)` at `t ∈ [0, 1]`.
    pub fn jet(&self, t: f64) -> Jet {
        self.jet_split(t, 1.0 - t)
    }

    /// Same as [`jet`](Self::jet) with the complement `tc = 1 − t` supplied
    /// separately (accurate near `t = 1`).
    pub fn jet_split(&self, t: f64, tc: f64) -> Jet {
        let j = self.raw_jet(t, tc);
        Jet { f: self.scale * j.f, d1: self.scale * j.d1, d2: self.scale * j.d2 }
    }

    pub fn w(&self, t: f64) -> f64 {
        self.jet(t).f
    }

    /// `√W(t)` with the complement supplied; never negative.
    pub fn sqrt_w_split(&self, t: f64, tc: f64) -> f64 {
        self.jet_split(t, tc).f.max(0.0).sqrt()
    }

    fn sqrt_integral(&self) -> Result<f64> {
        let q = quad::integrate(|t| self.sqrt_w_split(t, 1.0 - t), 0.0, 1.0, 1e-15, 1e-14)?;
        Ok(q.value)
    }

    fn validate(&mut self) -> Result<()> {
        let probes = probe_grid(PROBE_POINTS);
        let wmax = probes.iter().map(|&(t, tc)| self.jet_split(t, tc).f).fold(0.0f64, f64::max);
        if !(wmax > 0.0) || !wmax.is_finite() {
            return Err(Error::NonAdmissible("W vanishes identically on the probe grid".into()));
        }
        for &(t, tc) in &probes {
            let w = self.jet_split(t, tc).f;
            if !(w > 0.0) {
                return Err(Error::NonAdmissible(format!("W({t}) = {w:e} is not positive")));
            }
        }
        let at0 = self.jet_split(0.0, 1.0);
        let at1 = self.jet_split(1.0, 0.0);
        let tiny = 1e-12 * wmax;
        if at0.f.abs() > tiny || at1.f.abs() > tiny {
            return Err(Error::NonAdmissible("W must vanish at 0 and 1".into()));
        }
        if !(at0.d2 > 0.0 && at1.d2 > 0.0) {
            return Err(Error::NonAdmissible(format!(
                "degenerate wells: W''(0) = {:e}, W''(1) = {:e}",
                at0.d2, at1.d2
            )));
        }
        let mut lip = 0.0f64;
        for w in probes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = (self.jet_split(b.0, b.1).d2 - self.jet_split(a.0, a.1).d2).abs() / (b.0 - a.0);
            lip = lip.max(d);
        }
        self.w2_lipschitz = lip;
        Ok(())
    }
}

/// The normalized quartic `W(t) = 36 t²(1−t)²`.
pub fn make_reference_well() -> DoubleWell {
    let mut well = DoubleWell {
        kind: WellKind::ReferenceQuartic,
        shape: Shape::Quartic,
        scale: 1.0,
        normalization_residual: f64::NAN,
        w2_lipschitz: f64::NAN,
    };
    well.validate().expect("reference quartic is admissible");
    well.normalization_residual = (well.sqrt_integral().expect("smooth integrand") - 1.0).abs();
    well
}

/// Rescales `raw` by `(∫₀¹√W)⁻²` so that `∫₀¹√W = 1`.
pub fn normalize_well(raw: &DoubleWell) -> Result<DoubleWell> {
    let mut well = raw.clone();
    well.validate()?;
    let s = well.sqrt_integral()?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::NonAdmissible(format!("∫√W = {s:e}")));
    }
    well.scale *= 1.0 / (s * s);
    well.normalization_residual = (well.sqrt_integral()? - 1.0).abs();
    well.validate()?;
    Ok(well)
}

/// The well together with `Φ`, `V` in dimension `n`.
#[derive(Clone, Debug)]
pub struct PotentialChain {
    pub well: DoubleWell,
    dim: usize,
    /// `∫₀^{t_j} √W` on a uniform table, divided by the total.
    left: Vec<f64>,
    /// `∫_{t_j}^1 √W` on the same table, divided by the total.
    right: Vec<f64>,
    total: f64,
    delta0: f64,
    delta0_constant: f64,
}

/// Sample constants for the inequalities satisfied by `W`, `Φ`, `V`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WellEstimates {
    /// `sup V/W` on `(0, 1 − δ₀]`.
    pub v_over_w: f64,
    /// `sup |W(b) − W(a) − W′(a)(b−a) − W″(a)(b−a)²/2| / |b−a|³` on a 100×100 grid.
    pub taylor3: f64,
    /// `sup (b−a)² / |Φ(b) − Φ(a)|` on the same grid.
    pub phi_quadratic: f64,
}

/// Builds `Φ` and `V` for dimension `n ≥ 2`.
pub fn chain(well: &DoubleWell, n: usize) -> Result<PotentialChain> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension {n} < 2")));
    }
    let m = PHI_TABLE;
    let h = 1.0 / m as f64;
    let mut seg = Vec::with_capacity(m);
    for j in 0..m {
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        let q = quad::integrate(|t| well.sqrt_w_split(t, 1.0 - t), a, b, 1e-17, 1e-14)?;
        if !q.value.is_finite() {
            return Err(Error::QuadratureFailure(format!("segment [{a}, {b}]")));
        }
        seg.push(q.value);
    }
    let mut left = vec![0.0; m + 1];
    for j in 0..m {
        left[j + 1] = left[j] + seg[j];
    }
    let mut right = vec![0.0; m + 1];
    for j in (0..m).rev() {
        right[j] = right[j + 1] + seg[j];
    }
    let total = left[m];
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::QuadratureFailure(format!(
            "∫√W = {total} (normalize the well first)"
        )));
    }
    for v in left.iter_mut().chain(right.iter_mut()) {
        *v /= total;
    }
    let mut ch = PotentialChain {
        well: well.clone(),
        dim: n,
        left,
        right,
        total,
        delta0: f64::NAN,
        delta0_constant: f64::NAN,
    };
    let (d0, c0) = ch.probe_delta0();
    ch.delta0 = d0;
    ch.delta0_constant = c0;
    Ok(ch)
}

impl PotentialChain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n/(n−1)`.
    pub fn exponent(&self) -> f64 {
        self.dim as f64 / (self.dim as f64 - 1.0)
    }

    /// `1/(n−1)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (self.dim as f64 - 1.0)
    }

    /// Largest δ on which the two-sided near-well bounds hold with
    /// constant at most [`DELTA0_CONSTANT_CAP`].
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// The constant realized on `(0, δ₀]` and `[1 − δ₀, 1)`.
    pub fn delta0_constant(&self) -> f64 {
        self.delta0_constant
    }

    /// Volume of the unit ball in `ℝⁿ`.
    pub fn omega(&self) -> f64 {
        unit_ball_volume(self.dim)
    }

    /// Radius of the unit-volume ball, `ωₙ^{−1/n}`.
    pub fn r0(&self) -> f64 {
        self.omega().powf(-1.0 / self.dim as f64)
    }

    /// Leading energy constant `2nωₙ^{1/n}`.
    pub fn perimeter_constant(&self) -> f64 {
        let n = self.dim as f64;
        2.0 * n * self.omega().powf(1.0 / n)
    }

    /// Limit multiplier `2(n−1)ωₙ^{1/n}`.
    pub fn multiplier_limit(&self) -> f64 {
        let n = self.dim as f64;
        2.0 * (n - 1.0) * self.omega().powf(1.0 / n)
    }

    /// Slope factor `2n(n−1)ωₙ^{2/n}` multiplying κ₀ in the energy expansion.
    pub fn slope_factor(&self) -> f64 {
        let n = self.dim as f64;
        2.0 * n * (n - 1.0) * self.omega().powf(2.0 / n)
    }

    fn table_eval(&self, table: &[f64], t: f64, sign: f64) -> f64 {
        let m = PHI_TABLE;
        let x = t.clamp(0.0, 1.0) * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let (a, b) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
        let da = sign * self.well.sqrt_w_split(a, 1.0 - a) / self.total;
        let db = sign * self.well.sqrt_w_split(b, 1.0 - b) / self.total;
        crate::numerics::ode::hermite(a, table[j], da, b, table[j + 1], db, t)
    }

    /// `Φ(t)`.
    pub fn phi_value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else if t <= 0.5 {
            self.table_eval(&self.left, t, 1.0)
        } else {
            1.0 - self.table_eval(&self.right, t, -1.0)
        }
    }

    /// `1 − Φ(t)` with relative accuracy near `t = 1`.
    pub fn phi_complement(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else if t <= 0.5 {
            1.0 - self.table_eval(&self.left, t, 1.0)
        } else {
            self.table_eval(&self.right, t, -1.0)
        }
    }

    /// `Φ(t)` by direct adaptive quadrature (independent of the table).
    pub fn phi_quadrature(&self, t: f64) -> Result<f64> {
        let q = quad::integrate(|s| self.well.sqrt_w_split(s, 1.0 - s), 0.0, t.clamp(0.0, 1.0), 1e-17, 1e-14)?;
        Ok(q.value / self.total)
    }

    /// `(Φ, Φ′, Φ″)` at `t`.
    pub fn phi(&self, t: f64) -> Jet {
        self.phi_split(t, 1.0 - t)
    }

    pub fn phi_split(&self, t: f64, tc: f64) -> Jet {
        if t <= 0.0 || tc <= 0.0 {
            // Outside the open interval the chain is extended by constants;
            // Φ″ takes its one-sided limit ±√(W″/2).
            let at = if t <= 0.0 { 0.0 } else { 1.0 };
            let j = self.well.jet_split(at, 1.0 - at);
            let lim = (0.5 * j.d2).max(0.0).sqrt() / self.total;
            return Jet { f: at, d1: 0.0, d2: if t <= 0.0 { lim } else { -lim } };
        }
        let j = self.well.jet_split(t, tc);
        let s = j.f.max(0.0).sqrt();
        let d2 = if s > 0.0 { j.d1 / (2.0 * s) } else { 0.0 };
        let f = if t <= 0.5 { self.phi_value(t) } else { 1.0 - self.phi_complement(t) };
        Jet { f, d1: s / self.total, d2: d2 / self.total }
    }

    /// `(V, V′, V″)` at `t`, with `V = Φ^{n/(n−1)}`.
    pub fn vee(&self, t: f64) -> Jet {
        self.vee_split(t, 1.0 - t)
    }

    pub fn vee_split(&self, t: f64, tc: f64) -> Jet {
        let p = self.exponent();
        if t <= 0.0 {
            return Jet { f: 0.0, d1: 0.0, d2: 0.0 };
        }
        if tc <= 0.0 {
            return Jet { f: 1.0, d1: 0.0, d2: p * self.phi_split(1.0, 0.0).d2 };
        }
        let ph = self.phi_split(t, tc);
        if ph.f <= 0.0 {
            return Jet { f: 0.0, d1: 0.0, d2: 0.0 };
        }
        let pm1 = ph.f.powf(p - 1.0);
        Jet {
            f: ph.f * pm1,
            d1: p * pm1 * ph.d1,
            d2: p * (p - 1.0) * pm1 / ph.f * ph.d1 * ph.d1 + p * pm1 * ph.d2,
        }
    }

    pub fn v(&self, t: f64) -> f64 {
        let p = self.exponent();
        self.phi_value(t).powf(p)
    }

    /// Inverse of `V` on `[0, 1]`.
    pub fn v_inverse(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let target = v.powf(1.0 / self.exponent());
        self.phi_inverse(target)
    }

    /// Inverse of `Φ` on `[0, 1]` by safeguarded Newton.
    pub fn phi_inverse(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= 1.0 {
            return 1.0;
        }
        let upper = target > 0.5;
        let goal = if upper { 1.0 - target } else { target };
        // g(t) is increasing on [0,1] in both branches.
        let g = |t: f64| if upper { goal - self.phi_complement(t) } else { self.phi_value(t) - goal };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut t = 0.5;
        for _ in 0..200 {
            let gt = g(t);
            if gt == 0.0 {
                return t;
            }
            if gt < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = self.well.sqrt_w_split(t, 1.0 - t) / self.total;
            let mut next = if d > 0.0 { t - gt / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-16 * t.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * t {
                return next;
            }
            t = next;
        }
        t
    }

    /// Largest ratio deviation `max(r, 1/r)` among the near-well bounds at a
    /// probe point, for the left (`near_one = false`) or right well.
    fn near_well_spread(&self, t: f64, tc: f64, near_one: bool) -> f64 {
        let a = self.alpha();
        let w = self.well.jet_split(t, tc);
        let ph = self.phi_split(t, tc);
        let v = self.vee_split(t, tc);
        let ratios: Vec<f64> = if !near_one {
            vec![
                w.f / (t * t),
                w.d1 / t,
                w.d2,
                ph.f / (t * t),
                ph.d1 / t,
                ph.d2,
                v.f / t.powf(2.0 + 2.0 * a),
                v.d1 / t.powf(1.0 + 2.0 * a),
                v.d2 / t.powf(2.0 * a),
            ]
        } else {
            vec![
                w.f / (tc * tc),
                -w.d1 / tc,
                w.d2,
                self.phi_complement(t) / (tc * tc),
                ph.d1 / tc,
                -ph.d2,
                (1.0 - v.f) / (tc * tc),
                v.d1 / tc,
            ]
        };
        ratios
            .into_iter()
            .map(|r| if r > 0.0 && r.is_finite() { r.max(1.0 / r) } else { f64::INFINITY })
            .fold(1.0, f64::max)
    }

    fn probe_delta0(&self) -> (f64, f64) {
        let probes = probe_grid(PROBE_POINTS);
        let spreads: Vec<(f64, f64, f64, f64)> = probes
            .iter()
            .map(|&(t, tc)| (t, tc, self.near_well_spread(t, tc, false), self.near_well_spread(t, tc, true)))
            .collect();
        let worst = |delta: f64| -> f64 {
            let mut c = 1.0f64;
            for &(t, tc, s0, s1) in &spreads {
                if t <= delta {
                    c = c.max(s0);
                }
                if tc <= delta {
                    c = c.max(s1);
                }
            }
            c
        };
        let (mut lo, mut hi) = (0.0, 0.5);
        if worst(hi) <= DELTA0_CONSTANT_CAP {
            return (hi, worst(hi));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if worst(mid) <= DELTA0_CONSTANT_CAP {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Snap to the largest probe abscissa inside the accepted range.
        let snapped = spreads
            .iter()
            .map(|&(t, tc, _, _)| t.min(tc))
            .filter(|&d| d <= lo)
            .fold(0.0, f64::max);
        (snapped, worst(snapped))
    }

    /// Empirical constants of the standard inequalities for `W`, `Φ`, `V`.
    pub fn estimates(&self) -> WellEstimates {
        let probes = probe_grid(PROBE_POINTS);
        let mut v_over_w = 0.0f64;
        for &(t, tc) in &probes {
            if t <= 1.0 - self.delta0 {
                v_over_w = v_over_w.max(self.vee_split(t, tc).f / self.well.jet_split(t, tc).f);
            }
        }
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let mut taylor3 = 0.0f64;
        let mut phi_quadratic = 0.0f64;
        for &a in &grid {
            let ja = self.well.jet(a);
            let pa = self.phi_value(a);
            for &b in &grid {
                if a == b {
                    continue;
                }
                let d = b - a;
                let r = self.well.w(b) - ja.f - ja.d1 * d - 0.5 * ja.d2 * d * d;
                taylor3 = taylor3.max(r.abs() / d.abs().powi(3));
                phi_quadratic = phi_quadratic.max(d * d / (self.phi_value(b) - pa).abs());
            }
        }
        WellEstimates { v_over_w, taylor3, phi_quadratic }
    }
}

/// `ωₙ = π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    // ω₀ = 1, ω₁ = 2, ωₙ = 2π/n · ωₙ₋₂.
    let mut w = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        w *= 2.0 * pi / k as f64;
        k += 2;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> DoubleWell {
        make_reference_well()
    }

    #[test]
    fn reference_well_values() {
        let w = quartic();
        assert_eq!(w.w(0.5), 2.25);
        assert!(w.normalization_residual() < 1e-12);
        assert_eq!(w.kind(), WellKind::ReferenceQuartic);
    }

    #[test]
    fn reference_well_second_derivative_at_wells() {
        // Independent symbolic expansion: 36t²(1−t)² = 36t² − 72t³ + 36t⁴.
        let sym = |t: f64| 72.0 - 432.0 * t + 432.0 * t * t;
        let w = quartic();
        assert_eq!(sym(0.0), 72.0);
        assert_eq!(w.jet(0.0).d2, sym(0.0));
        assert_eq!(w.jet(1.0).d2, sym(1.0));
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((w.jet(t).d2 - sym(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_raw_quartic() {
        // Brute-force oracle: midpoint rule for ∫ t(1−t).
        let n = 200_000;
        let brute: f64 = (0..n).map(|i| { let t = (i as f64 + 0.5) / n as f64; t * (1.0 - t) }).sum::<f64>() / n as f64;
        let c_oracle = 1.0 / (brute * brute);
        assert!((c_oracle - 36.0).abs() < 1e-6);
        let raw = DoubleWell::from_pieces(&PiecewisePolynomial { breaks: vec![0.0, 1.0], coeffs: vec![vec![0.0, 0.0, 1.0, -2.0, 1.0]] }).unwrap();
        let w = normalize_well(&raw).unwrap();
        assert!((w.scale() - 36.0).abs() < 1e-9);
        assert!(w.normalization_residual() <= 1e-10);
    }

    #[test]
    fn normalize_is_idempotent() {
        let w = normalize_well(&quartic()).unwrap();
        assert!((w.scale() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_well_rejected() {
        let r = DoubleWell::from_pieces(&PiecewisePolynomial { breaks: vec![0.0, 1.0], coeffs: vec![vec![0.0]] });
        assert!(matches!(r, Err(Error::NonAdmissible(_))));
    }

    #[test]
    fn phi_closed_form_n2() {
        let ch = chain(&quartic(), 2).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let exact = t * t * (3.0 - 2.0 * t);
            assert!((ch.phi_value(t) - exact).abs() < 1e-14);
            assert!((ch.phi_quadrature(t).unwrap() - exact).abs() < 1e-13);
            assert!((ch.v(t) - exact * exact).abs() < 1e-13);
        }
        assert_eq!(ch.phi_value(0.5), 0.5);
        assert_eq!(ch.vee(1.0).f, 1.0);
    }

    #[test]
    fn chain_derivatives_match_finite_differences() {
        for n in [2, 3, 5] {
            let ch = chain(&quartic(), n).unwrap();
            let h = 1e-5;
            for i in 1..40 {
                let t = i as f64 / 40.0;
                let j = ch.vee(t);
                let d1 = (ch.vee(t + h).f - ch.vee(t - h).f) / (2.0 * h);
                let d2 = (ch.vee(t + h).d1 - ch.vee(t - h).d1) / (2.0 * h);
                assert!((j.d1 - d1).abs() < 1e-7, "n={n} t={t}");
                assert!((j.d2 - d2).abs() < 1e-6, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn delta0_probe_quartic() {
        let ch = chain(&quartic(), 2).unwrap();
        // W″ vanishes at (3 − √3)/6, so δ₀ must stop short of it.
        let w2_zero = (3.0 - 3f64.sqrt()) / 6.0;
        assert!(ch.delta0() > 0.1 && ch.delta0() < w2_zero, "{}", ch.delta0());
        assert!(ch.delta0_constant() <= DELTA0_CONSTANT_CAP);
        // V/t⁴ near 0 stays within the recorded constant.
        for &(t, _) in probe_grid(PROBE_POINTS).iter().filter(|p| p.0 <= ch.delta0()) {
            let r = ch.v(t) / t.powi(4);
            assert!(r <= ch.delta0_constant() && r >= 1.0 / ch.delta0_constant());
        }
    }

    #[test]
    fn inverse_of_v() {
        let ch = chain(&quartic(), 3).unwrap();
        for i in 1..50 {
            let t = i as f64 / 50.0;
            assert!((ch.v_inverse(ch.v(t)) - t).abs() < 1e-12);
        }
        let t = 1e-6;
        assert!((ch.v_inverse(ch.v(t)) - t).abs() < 1e-15);
    }

    #[test]
    fn piecewise_well_accuracy_near_one() {
        let raw = DoubleWell::from_pieces(&PiecewisePolynomial {
            breaks: vec![0.0, 0.5, 1.0],
            coeffs: vec![vec![0.0, 0.0, 1.0, -2.0, 1.0], vec![0.0, 0.0, 1.0, -2.0, 1.0]],
        })
        .unwrap();
        let w = normalize_well(&raw).unwrap();
        let q = quartic();
        let tc = 1e-9;
        let a = w.jet_split(1.0 - tc, tc);
        let b = q.jet_split(1.0 - tc, tc);
        assert!(((a.f - b.f) / b.f).abs() < 1e-8);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
