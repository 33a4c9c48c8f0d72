//! Radial meshes and `[0,1]`-valued radial fields.
//!
//! Fields are continuous piecewise linear in `r`. Dirichlet integrals are
//! exact for that representation; potential-type integrals use the lumped
//! (row-summed) weights `wᵢ = nωₙ∫φᵢ r^{n−1} dr`. The resulting discrete
//! Laplacian is the usual three-point nonuniform stencil with the natural
//! condition `u′(0) = 0`.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots;
use crate::numerics::tridiag::SymTridiag;
use crate::potentials::{unit_ball_volume, PotentialChain};

/// Mesh parameters for a solve at interface width ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Uniform spacing inside the layer is `ε / points_per_eps`.
    pub points_per_eps: f64,
    /// Half-width of the uniform layer in units of `ε·ln(1/ε)`.
    pub layer_factor: f64,
    /// `r_max = max(3R₀, R₀ + tail_factor·ε·ln(1/ε))`.
    pub tail_factor: f64,
    /// Geometric growth ratio of the spacing outside the layer.
    pub growth: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points_per_eps: 256.0, layer_factor: 10.0, tail_factor: 30.0, growth: 1.08 }
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Lumped halves `nωₙ∫φ r^{n−1}` of each element, left and right.
    elem_left: Vec<f64>,
    elem_right: Vec<f64>,
    /// `nωₙ∫_e r^{n−1} dr / h_e²`.
    stiff: Vec<f64>,
}

/// Serialized form of a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridData {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `(∫₀ʰ (h−ξ)(a+ξ)^{n−1} dξ, ∫₀ʰ ξ(a+ξ)^{n−1} dξ)`, summed termwise without cancellation.
fn element_moments(a: f64, h: f64, n: usize) -> (f64, f64) {
    let (mut l, mut r) = (0.0, 0.0);
    for k in 0..n {
        let c = binomial(n - 1, k) * a.powi((n - 1 - k) as i32) * h.powi(k as i32 + 2);
        l += c / ((k + 1) * (k + 2)) as f64;
        r += c / (k + 2) as f64;
    }
    (l, r)
}

fn log_inv(eps: f64) -> f64 {
    (1.0 / eps).ln().max(1.0)
}

impl RadialGrid {
    /// Grid on the given nodes (`r₀ = 0`, strictly increasing).
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("dimension {dim} < 2")));
        }
        if nodes.len() < 3 || nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("nodes must start at 0 and increase strictly".into()));
        }
        let m = nodes.len() - 1;
        let nw = dim as f64 * unit_ball_volume(dim);
        let mut elem_left = Vec::with_capacity(m);
        let mut elem_right = Vec::with_capacity(m);
        let mut stiff = Vec::with_capacity(m);
        let mut weights = vec![0.0; m + 1];
        for e in 0..m {
            let (a, h) = (nodes[e], nodes[e + 1] - nodes[e]);
            let (l, r) = element_moments(a, h, dim);
            let (l, r) = (nw * l / h, nw * r / h);
            elem_left.push(l);
            elem_right.push(r);
            stiff.push((l + r) / (h * h));
            weights[e] += l;
            weights[e + 1] += r;
        }
        Ok(Self { dim, nodes, weights, elem_left, elem_right, stiff })
    }

    /// Graded mesh resolving an interface of width ε around `R₀ = ωₙ^{−1/n}`.
    pub fn for_eps(dim: usize, eps: f64, spec: &GridSpec) -> Result<Self> {
        if !(eps > 0.0) || !(spec.points_per_eps > 1.0) || !(spec.growth > 1.0) || spec.tail_factor < spec.layer_factor {
            return Err(Error::InvalidArgument(format!("bad grid request: eps = {eps}, {spec:?}")));
        }
        let r0 = unit_ball_volume(dim).powf(-1.0 / dim as f64);
        let half = spec.layer_factor * eps * log_inv(eps);
        let r_max = (3.0 * r0).max(r0 + spec.tail_factor * eps * log_inv(eps));
        let a = (r0 - half).max(0.0);
        let b = (r0 + half).min(r_max);
        let h = eps / spec.points_per_eps;
        let cells = ((b - a) / h).ceil().max(1.0) as usize;
        let hf = (b - a) / cells as f64;
        let mut nodes: Vec<f64> = Vec::new();
        // Inner geometric part, built from the layer inwards.
        if a > 0.0 {
            let mut inner = Vec::new();
            let mut step = hf * spec.growth;
            let mut r = a - step;
            while r > 0.5 * step {
                inner.push(r);
                step *= spec.growth;
                r -= step;
            }
            nodes.push(0.0);
            nodes.extend(inner.into_iter().rev());
        }
        for i in 0..=cells {
            nodes.push(a + hf * i as f64);
        }
        let mut step = hf * spec.growth;
        let mut r = b + step;
        while r < r_max - 0.5 * step {
            nodes.push(r);
            step *= spec.growth;
            r += step;
        }
        if *nodes.last().unwrap() < r_max {
            nodes.push(r_max);
        }
        Self::from_nodes(dim, nodes)
    }

    /// The same mesh with every node multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_nodes(self.dim, self.nodes.iter().map(|r| r * factor).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// `R₀ = ωₙ^{−1/n}`.
    pub fn r0(&self) -> f64 {
        unit_ball_volume(self.dim).powf(-1.0 / self.dim as f64)
    }

    /// Smallest element length.
    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest element length within `[lo, hi]`.
    pub fn max_spacing_in(&self, lo: f64, hi: f64) -> f64 {
        self.nodes
            .windows(2)
            .filter(|w| w[1] > lo && w[0] < hi)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Matrix of `h ↦ ∫|∇h|²` (so `hᵀKh` is the Dirichlet integral).
    pub fn stiffness(&self) -> SymTridiag {
        let n = self.len();
        let mut k = SymTridiag::zeros(n);
        for (e, &s) in self.stiff.iter().enumerate() {
            k.diag[e] += s;
            k.diag[e + 1] += s;
            k.off[e] = -s;
        }
        k
    }

    /// `Kh` assembled from element differences, exact for constants.
    pub fn apply_stiffness(&self, h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        for (e, &s) in self.stiff.iter().enumerate() {
            let f = s * (h[e] - h[e + 1]);
            out[e] += f;
            out[e + 1] -= f;
        }
        out
    }

    /// `∫|∇h|²` of a nodal vector.
    pub fn dirichlet(&self, h: &[f64]) -> f64 {
        self.stiff.iter().enumerate().map(|(e, s)| s * (h[e + 1] - h[e]).powi(2)).sum()
    }

    /// Lumped `∫ f` for nodal samples `f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `∫ε|∇h|² + h²/ε`.
    pub fn p_norm_sq(&self, h: &[f64], eps: f64) -> f64 {
        eps * self.dirichlet(h) + self.weights.iter().zip(h).map(|(w, v)| w * v * v).sum::<f64>() / eps
    }

    /// Element `e` spans nodes `e, e+1`: `(lumped left, lumped right, stiffness)`.
    pub fn element(&self, e: usize) -> (f64, f64, f64) {
        (self.elem_left[e], self.elem_right[e], self.stiff[e])
    }

    pub fn data(&self) -> GridData {
        GridData { dim: self.dim, nodes: self.nodes.clone(), weights: self.weights.clone() }
    }

    pub fn from_data(data: &GridData) -> Result<Self> {
        Self::from_nodes(data.dim, data.nodes.clone())
    }

    fn same_as(&self, other: &RadialGrid) -> bool {
        self.dim == other.dim && self.nodes == other.nodes
    }
}

/// A `[0,1]`-valued radial field on a grid.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialFunction {
    /// Wraps nodal values, clamping them to `[0,1]`.
    pub fn new(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        for v in values.iter_mut() {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values).expect("sizes match")
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn same_grid(&self, other: &RadialFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid)
    }

    /// Piecewise linear evaluation; constant beyond `r_max`.
    pub fn eval(&self, r: f64) -> f64 {
        let x = self.grid.nodes();
        if r <= 0.0 {
            return self.values[0];
        }
        let n = x.len();
        if r >= x[n - 1] {
            return self.values[n - 1];
        }
        let j = x.partition_point(|&v| v <= r) - 1;
        let th = (r - x[j]) / (x[j + 1] - x[j]);
        self.values[j] + th * (self.values[j + 1] - self.values[j])
    }

    /// Linear re-interpolation onto another grid.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> RadialFunction {
        let values = grid.nodes().iter().map(|&r| self.eval(r)).collect();
        RadialFunction { grid, values }
    }

    /// `ρ_t u(x) = u(t^{1/n} x)` represented exactly on the rescaled mesh.
    pub fn dilated(&self, t: f64) -> Result<RadialFunction> {
        let grid = Arc::new(self.grid.scaled(t.powf(-1.0 / self.grid.dim() as f64))?);
        Ok(RadialFunction { grid, values: self.values.clone() })
    }

    /// `r ↦ u(r − δ)` (the value at the origin fills `r < δ`).
    pub fn shifted(&self, delta: f64) -> RadialFunction {
        let values = self.grid.nodes().iter().map(|&r| self.eval((r - delta).max(0.0))).collect();
        RadialFunction { grid: self.grid.clone(), values }
    }

    /// Nodal derivative by three-point nonuniform centered differences,
    /// one-sided at `r_max` and zero at the origin.
    pub fn derivative(&self) -> Vec<f64> {
        let x = self.grid.nodes();
        let u = &self.values;
        let n = x.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            d[i] = (h0 * h0 * (u[i + 1] - u[i]) + h1 * h1 * (u[i] - u[i - 1])) / (h0 * h1 * (h0 + h1));
        }
        d[n - 1] = (u[n - 1] - u[n - 2]) / (x[n - 1] - x[n - 2]);
        d
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u"])?;
        for (r, u) in self.grid.nodes().iter().zip(&self.values) {
            w.write_record(&[format!("{r:.17e}"), format!("{u:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `(r, u)` rows; the nodes define a new grid of dimension `dim`.
    pub fn read_csv<R: Read>(input: R, dim: usize) -> Result<RadialFunction> {
        let mut rd = csv::Reader::from_reader(input);
        let (mut r, mut u) = (Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad CSV row {rec:?}")))
            };
            r.push(parse(0)?);
            u.push(parse(1)?);
        }
        let grid = Arc::new(RadialGrid::from_nodes(dim, r)?);
        RadialFunction::new(grid, u)
    }
}

/// `∫ V(u)` (tail beyond `r_max` neglected).
pub fn mass(u: &RadialFunction, chain: &PotentialChain) -> f64 {
    u.grid.weights().iter().zip(&u.values).map(|(w, &v)| w * chain.v(v)).sum()
}

/// Pieces of the Allen–Cahn energy `ε∫|∇u|² + ε⁻¹∫W(u)`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct EnergyParts {
    pub total: f64,
    /// `∫|∇u|²`.
    pub grad_sq: f64,
    /// `∫W(u)`.
    pub potential: f64,
    /// `∫(√ε|∇u| − √(W(u)/ε))²`.
    pub mm_defect: f64,
    /// `2∫|∇Φ(u)| = 2∫√W(u)|∇u|`.
    pub phi_variation: f64,
}

/// Energy and its Modica–Mortola split, sharing one quadrature so that
/// `total = mm_defect + phi_variation` holds to rounding.
pub fn energy(u: &RadialFunction, chain: &PotentialChain, eps: f64) -> EnergyParts {
    let g = &u.grid;
    let x = g.nodes();
    let vals = &u.values;
    let wv: Vec<f64> = vals.iter().map(|&v| chain.well.w(v).max(0.0)).collect();
    let sw: Vec<f64> = wv.iter().map(|w| w.sqrt()).collect();
    let se = eps.sqrt();
    let mut p = EnergyParts::default();
    for e in 0..x.len() - 1 {
        let (l, r, k) = g.element(e);
        let h = x[e + 1] - x[e];
        let grad = (vals[e + 1] - vals[e]) / h;
        let d2 = k * (vals[e + 1] - vals[e]).powi(2);
        p.grad_sq += d2;
        p.potential += l * wv[e] + r * wv[e + 1];
        let a = grad.abs();
        p.mm_defect += l * (se * a - sw[e] / se).powi(2) + r * (se * a - sw[e + 1] / se).powi(2);
        p.phi_variation += 2.0 * a * (l * sw[e] + r * sw[e + 1]);
    }
    p.total = eps * p.grad_sq + p.potential / eps;
    p
}

/// `∫|Φ(u) − Φ(v)|^{n/(n−1)}`.
pub fn d_phi(u: &RadialFunction, v: &RadialFunction, chain: &PotentialChain) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let p = chain.exponent();
    Ok(u.grid
        .weights()
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(w, (&a, &b))| w * (chain.phi_value(a) - chain.phi_value(b)).abs().powf(p))
        .sum())
}

/// `c(n) = (n−1)/n`, the largest constant with
/// `c·|d(u,w) − d(v,w)| ≤ max{d(u,w), d(v,w)}^{1/n}·d(u,v)^{(n−1)/n}`.
///
/// `d^{(n−1)/n}` is an `L^{n/(n−1)}` norm, and `b^θ − a^θ ≥ θ·b^{θ−1}(b − a)`
/// for `0 ≤ a ≤ b`, `θ = (n−1)/n`.
pub fn quasi_triangle_constant(n: usize) -> f64 {
    (n as f64 - 1.0) / n as f64
}

/// Slack of the quasi-triangle bound for a triple; nonnegative when it holds.
pub fn quasi_triangle_slack(u: &RadialFunction, v: &RadialFunction, w: &RadialFunction, chain: &PotentialChain) -> Result<f64> {
    let n = chain.dim();
    let (uw, vw, uv) = (d_phi(u, w, chain)?, d_phi(v, w, chain)?, d_phi(u, v, chain)?);
    let nf = n as f64;
    Ok(uw.max(vw).powf(1.0 / nf) * uv.powf((nf - 1.0) / nf) - quasi_triangle_constant(n) * (uw - vw).abs())
}

/// Radially decreasing rearrangement.
///
/// Nodal values are sorted (stable in `r` for ties) and laid out by
/// cumulative lumped volume; each output node receives the `V`-average of
/// the sorted profile over its own volume slot. The output is decreasing and
/// `∫V(u*) = ∫V(u)` holds exactly in the lumped quadrature.
pub fn rearrange(u: &RadialFunction, chain: &PotentialChain) -> RadialFunction {
    let w = u.grid.weights();
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u.values[b].partial_cmp(&u.values[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![0.0; n];
    let (mut k, mut src_end, mut acc_end) = (0usize, w[order[0]], 0.0f64);
    let mut src_start = 0.0f64;
    for j in 0..n {
        let slot_start = acc_end;
        let slot_end = slot_start + w[j];
        acc_end = slot_end;
        // Slot covered by a single source cell: copy the value exactly.
        if slot_start >= src_start && slot_end <= src_end {
            out[j] = u.values[order[k]];
        } else {
            let mut sum = 0.0;
            let mut lo = slot_start;
            while lo < slot_end && k < n {
                let hi = slot_end.min(src_end);
                if hi > lo {
                    sum += (hi - lo) * chain.v(u.values[order[k]]);
                }
                if src_end <= slot_end && k + 1 < n {
                    k += 1;
                    src_start = src_end;
                    src_end += w[order[k]];
                    lo = hi.max(lo);
                } else {
                    break;
                }
            }
            out[j] = chain.v_inverse(sum / w[j]);
        }
        if slot_end >= src_end && k + 1 < n {
            k += 1;
            src_start = src_end;
            src_end += w[order[k]];
        }
    }
    // Enforce monotonicity against rounding in the averages.
    for j in 1..n {
        if out[j] > out[j - 1] {
            out[j] = out[j - 1];
        }
    }
    RadialFunction { grid: u.grid.clone(), values: out }
}

/// Shifts the interface radially so that `∫V(u(· − δ)) = target`.
pub fn project_mass_by_shift(u: &RadialFunction, chain: &PotentialChain, target: f64) -> Result<(RadialFunction, f64)> {
    let f = |d: f64| mass(&u.shifted(d), chain) - target;
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok((u.clone(), 0.0));
    }
    let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut step = 1e-4 * u.grid.r0();
    let mut far = dir * step;
    let mut guard = 0;
    while f(far).signum() == f0.signum() {
        step *= 2.0;
        far = dir * step;
        guard += 1;
        if guard > 60 || step > u.grid.r_max() {
            return Err(Error::BracketFailure(format!("mass {target} unreachable by shifting (mass {})", f0 + target)));
        }
    }
    let (lo, hi) = if dir > 0.0 { (0.0, far) } else { (far, 0.0) };
    let d = roots::brent(f, lo, hi, 1e-16, 200)?;
    Ok((u.shifted(d), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{chain, make_reference_well};

    fn grid(eps: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::for_eps(2, eps, &GridSpec::default()).unwrap())
    }

    #[test]
    fn weights_integrate_linear_functions_exactly() {
        for n in [2, 3, 4] {
            let g = RadialGrid::for_eps(n, 0.05, &GridSpec { points_per_eps: 8.0, ..GridSpec::default() }).unwrap();
            let rm = g.r_max();
            let nw = n as f64 * unit_ball_volume(n);
            let one: f64 = g.weights().iter().sum();
            assert!((one - nw * rm.powi(n as i32) / n as f64).abs() < 1e-10 * one);
            let lin: f64 = g.weights().iter().zip(g.nodes()).map(|(w, r)| w * r).sum();
            assert!((lin - nw * rm.powi(n as i32 + 1) / (n + 1) as f64).abs() < 1e-10 * lin);
            assert!(rm >= 3.0 * g.r0());
        }
    }

    #[test]
    fn zero_field() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let u = RadialFunction::zeros(grid(0.05));
        assert_eq!(mass(&u, &ch), 0.0);
        let e = energy(&u, &ch, 0.05);
        assert_eq!((e.total, e.grad_sq, e.potential, e.mm_defect, e.phi_variation), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn sharp_ball_has_unit_mass() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let g = grid(0.02);
        let r0 = g.r0();
        let u = RadialFunction::from_fn(g, |r| if r < r0 { 1.0 } else { 0.0 });
        assert!((mass(&u, &ch) - 1.0).abs() < 0.01);
    }

    #[test]
    fn modica_mortola_identity() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let g = grid(0.05);
        let r0 = g.r0();
        let u = RadialFunction::from_fn(g, |r| 1.0 / (1.0 + ((r - r0) / 0.03).exp()));
        let e = energy(&u, &ch, 0.05);
        assert!(e.mm_defect >= 0.0);
        assert!((e.total - e.phi_variation - e.mm_defect).abs() < 1e-10 * e.total);
    }

    #[test]
    fn d_phi_basics() {
        let ch = chain(&make_reference_well(), 3).unwrap();
        let g = Arc::new(RadialGrid::for_eps(3, 0.05, &GridSpec::default()).unwrap());
        let u = RadialFunction::from_fn(g.clone(), |r| (1.0 - r).clamp(0.0, 1.0));
        let v = RadialFunction::from_fn(g.clone(), |r| (-r * r).exp());
        assert_eq!(d_phi(&u, &u, &ch).unwrap(), 0.0);
        assert!((d_phi(&u, &v, &ch).unwrap() - d_phi(&v, &u, &ch).unwrap()).abs() < 1e-14);
        let other = RadialFunction::zeros(grid(0.05));
        assert!(matches!(d_phi(&u, &other, &ch), Err(Error::GridMismatch)));
    }

    #[test]
    fn quasi_triangle_constant_is_sharp_on_scalars() {
        for n in 2..6 {
            let th = (n as f64 - 1.0) / n as f64;
            let c = quasi_triangle_constant(n);
            let mut worst = f64::INFINITY;
            for i in 1..400 {
                for j in 0..i {
                    let (b, a) = (i as f64 / 400.0, j as f64 / 400.0);
                    worst = worst.min((b.powf(th) - a.powf(th)) / (b.powf(-1.0 / n as f64) * (b - a)));
                }
            }
            assert!(worst >= c * (1.0 - 1e-12) && worst < c * 1.01, "n = {n}: {worst}");
        }
    }

    #[test]
    fn rearranging_a_decreasing_field_is_identity() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let g = grid(0.05);
        let u = RadialFunction::from_fn(g, |r| 1.0 / (1.0 + ((r - 0.5) / 0.01).exp()));
        let s = rearrange(&u, &ch);
        assert_eq!(s.values, u.values);
    }

    #[test]
    fn rearrangement_preserves_mass_and_orders() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let g = grid(0.05);
        let u = RadialFunction::from_fn(g, |r| 0.5 + 0.45 * (12.0 * r).sin() * (-r).exp());
        let s = rearrange(&u, &ch);
        assert!((mass(&s, &ch) - mass(&u, &ch)).abs() < 1e-12);
        assert!(s.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.grid.dirichlet(&s.values) <= u.grid.dirichlet(&u.values));
    }

    #[test]
    fn shift_projection_hits_target() {
        let ch = chain(&make_reference_well(), 2).unwrap();
        let g = grid(0.05);
        let u = RadialFunction::from_fn(g, |r| 1.0 / (1.0 + ((r - 0.5) / 0.02).exp()));
        let (v, d) = project_mass_by_shift(&u, &ch, 1.0).unwrap();
        assert!((mass(&v, &ch) - 1.0).abs() < 1e-13);
        assert!(d > 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(0.1);
        let u = RadialFunction::from_fn(g, |r| (-r).exp());
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let v = RadialFunction::read_csv(&buf[..], 2).unwrap();
        assert_eq!(u.values, v.values);
        assert_eq!(u.grid.nodes(), v.grid.nodes());
        let js = serde_json::to_string(&u.grid.data()).unwrap();
        let back: GridData = serde_json::from_str(&js).unwrap();
        assert_eq!(RadialGrid::from_data(&back).unwrap().weights(), u.grid.weights());
    }
}
