//! Symmetric tridiagonal matrices: solves, inertia counts, and the lowest
//! eigenpairs of definite pencils `A x = μ B x`, optionally restricted to the
//! hyperplane `cᵀx = 0`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i+1`.
    pub off: Vec<f64>,
}

const TINY: f64 = 1e-300;

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    /// `self − σ·b`.
    pub fn shifted(&self, b: &SymTridiag, sigma: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().zip(&b.diag).map(|(a, b)| a - sigma * b).collect(),
            off: self.off.iter().zip(&b.off).map(|(a, b)| a - sigma * b).collect(),
        }
    }

    /// Pivots of the LDLᵀ factorization without pivoting; exact zeros are
    /// nudged to a tiny value so the sign count stays defined.
    fn pivots(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n];
        for i in 0..n {
            let mut p = self.diag[i];
            if i > 0 {
                p -= self.off[i - 1] * self.off[i - 1] / d[i - 1];
            }
            if p == 0.0 {
                p = -TINY;
            }
            d[i] = p;
        }
        d
    }

    /// Number of negative eigenvalues (Sylvester inertia).
    pub fn negative_count(&self) -> usize {
        self.pivots().iter().filter(|p| **p < 0.0).count()
    }

    /// Solves `self · x = rhs` by the Thomas recursion.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let d = self.pivots();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.off[i - 1] / d[i - 1] * y[i - 1];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.off[i] * x[i + 1];
            }
            x[i] = s / d[i];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues below `sigma` of the pencil `(a, b)`, optionally restricted to `cᵀx = 0`.
pub fn count_below(a: &SymTridiag, b: &SymTridiag, c: Option<&[f64]>, sigma: f64) -> usize {
    let h = a.shifted(b, sigma);
    let neg = h.negative_count();
    match c {
        None => neg,
        Some(c) => {
            // Haynsworth: In([[H, c], [cᵀ, 0]]) = In(H) + In(−cᵀH⁻¹c), and the
            // bordered matrix has exactly one more negative eigenvalue than H
            // restricted to c⊥.
            let s = dot(c, &h.solve(c));
            (neg + usize::from(s > 0.0)).saturating_sub(1)
        }
    }
}

/// Lowest `k` eigenpairs of a definite tridiagonal pencil.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Vectors normalized so that `xᵀ B x = 1`.
    pub vectors: Vec<Vec<f64>>,
}

/// Lowest `k` eigenpairs of `A x = μ B x` (B positive definite), restricted to
/// `cᵀx = 0` when `c` is given. Eigenvalues by inertia bisection, vectors by
/// inverse iteration with B-orthogonal deflation.
pub fn lowest_eigenpairs(a: &SymTridiag, b: &SymTridiag, c: Option<&[f64]>, k: usize, rel_tol: f64) -> Result<Eigenpairs> {
    let n = a.len();
    let avail = if c.is_some() { n.saturating_sub(1) } else { n };
    if k == 0 || k > avail {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a size-{avail} problem")));
    }
    // Bracket all requested eigenvalues.
    let mut lo = -1.0;
    let mut guard = 0;
    while count_below(a, b, c, lo) > 0 {
        lo = lo * 2.0 - 1.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence { iterations: guard, residual: lo, reason: "lower eigenvalue bound".into() });
        }
    }
    let mut hi = 1.0;
    guard = 0;
    while count_below(a, b, c, hi) < k {
        hi = hi * 2.0 + 1.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence { iterations: guard, residual: hi, reason: "upper eigenvalue bound".into() });
        }
    }
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        // Smallest σ with count_below(σ) > j.
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if h - l <= rel_tol * mid.abs().max(1e-12) || mid == l || mid == h {
                break;
            }
            if count_below(a, b, c, mid) > j {
                h = mid;
            } else {
                l = mid;
            }
        }
        values.push(0.5 * (l + h));
    }
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, &mu) in values.iter().enumerate() {
        let gap = if j + 1 < values.len() { values[j + 1] - mu } else { mu.abs().max(1.0) };
        let shift = mu - (1e-9 * mu.abs().max(1e-6)).min(0.1 * gap.abs().max(1e-12));
        let h = a.shifted(b, shift);
        let hc = c.map(|c| (h.solve(c), c));
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919 + j * 104_729) % 997) as f64 / 997.0).collect();
        for _ in 0..6 {
            let bx = b.mul(&x);
            let mut y = h.solve(&bx);
            if let Some((hinv_c, c)) = &hc {
                let xi = dot(c, &y) / dot(c, hinv_c);
                for i in 0..n {
                    y[i] -= xi * hinv_c[i];
                }
            }
            for v in &vectors {
                let proj = dot(v, &b.mul(&y));
                for i in 0..n {
                    y[i] -= proj * v[i];
                }
            }
            let norm = dot(&y, &b.mul(&y)).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence { iterations: 0, residual: norm, reason: "inverse iteration".into() });
            }
            x = y.iter().map(|v| v / norm).collect();
        }
        vectors.push(x);
    }
    Ok(Eigenpairs { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag { diag: vec![2.0; n], off: vec![-1.0; n - 1] }
    }

    fn identity(n: usize) -> SymTridiag {
        SymTridiag { diag: vec![1.0; n], off: vec![0.0; n - 1] }
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let e = lowest_eigenpairs(&laplacian(n), &identity(n), None, 3, 1e-14).unwrap();
        for (j, v) in e.values.iter().enumerate() {
            let th = (j + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64);
            let exact = 4.0 * th.sin().powi(2);
            assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        }
        let a = laplacian(n);
        let r: Vec<f64> = a.mul(&e.vectors[0]).iter().zip(&e.vectors[0]).map(|(ax, x)| ax - e.values[0] * x).collect();
        assert!(r.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn constrained_count_matches_projection() {
        // A = diag(1,2,3), c = (1,1,0): constrained spectrum is {1.5 ± 0.5 ... } computed densely.
        let a = SymTridiag { diag: vec![1.0, 2.0, 3.0], off: vec![0.0, 0.0] };
        let b = identity(3);
        let c = [1.0, 1.0, 0.0];
        // Basis of c⊥: (1,-1,0)/√2 and (0,0,1); restricted A = diag(1.5, 3).
        let e = lowest_eigenpairs(&a, &b, Some(&c), 2, 1e-14).unwrap();
        assert!((e.values[0] - 1.5).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!(dot(&c, &e.vectors[0]).abs() < 1e-10);
    }

    #[test]
    fn thomas_solve() {
        let a = laplacian(10);
        let x: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let y = a.solve(&a.mul(&x));
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    /// Dense oracle: eigenvalues of `L⁻¹AL⁻ᵀ` on the complement of `L⁻¹c`, `B = LLᵀ`.
    fn dense_pencil(a: &SymTridiag, b: &SymTridiag, c: Option<&[f64]>) -> Vec<f64> {
        use nalgebra::{DMatrix, DVector};
        let n = a.len();
        let full = |t: &SymTridiag| {
            DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => t.diag[i],
                1 => t.off[i.min(j)],
                _ => 0.0,
            })
        };
        let l = full(b).cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let mut m = &li * full(a) * li.transpose();
        let big = 1e3;
        if let Some(c) = c {
            let d = (&li * DVector::from_column_slice(c)).normalize();
            let p = DMatrix::identity(n, n) - &d * d.transpose();
            m = &p * m * &p + big * &d * d.transpose();
        }
        let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().filter(|&x| x < 0.5 * big).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn pencil_matches_dense_oracle() {
        let n = 40;
        let f = |i: usize, k: usize| ((i * 7 + k * 13) % 17) as f64 / 17.0 - 0.5;
        let a = SymTridiag { diag: (0..n).map(|i| 3.0 * f(i, 1)).collect(), off: (0..n - 1).map(|i| f(i, 2)).collect() };
        let b = SymTridiag { diag: (0..n).map(|i| 1.0 + f(i, 3).abs()).collect(), off: (0..n - 1).map(|i| 0.2 * f(i, 4)).collect() };
        let c: Vec<f64> = (0..n).map(|i| 1.0 + f(i, 5)).collect();
        for cons in [None, Some(c.as_slice())] {
            let oracle = dense_pencil(&a, &b, cons);
            let e = lowest_eigenpairs(&a, &b, cons, 4, 1e-14).unwrap();
            for (x, y) in e.values.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
            for (v, mu) in e.vectors.iter().zip(&e.values) {
                assert!((dot(v, &b.mul(v)) - 1.0).abs() < 1e-10);
                if cons.is_none() {
                    let r: Vec<f64> = a.mul(v).iter().zip(b.mul(v)).map(|(p, q)| p - mu * q).collect();
                    assert!(r.iter().all(|x| x.abs() < 1e-8));
                }
            }
        }
    }
}
