//! Penalized spline bases with knots at sample quantiles.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VmpError};
use crate::linalg::{DenseMatrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineKind {
    /// `z_k(x) = (x − κ_k)₊` with `K` knots.
    TruncatedLinear,
    /// Cubic B-splines on `K − 2` interior knots, transformed so the
    /// integrated squared second-derivative penalty becomes the identity.
    OsullivanLike,
}

/// Centering and scaling applied to a predictor before basis evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: f64,
    pub scale: f64,
}

impl Standardization {
    pub fn fit(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(VmpError::domain("predictor", "no values"));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(VmpError::domain("predictor", format!("entry {i} is not finite")));
        }
        let n = x.len() as f64;
        let center = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Ok(Standardization { center, scale })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    pub kind: SplineKind,
    /// Interior knots on the original predictor scale.
    pub knots: Vec<f64>,
    /// Observed predictor range on the original scale.
    pub range: (f64, f64),
    pub standardization: Standardization,
    /// Maps B-spline columns to penalized columns (O'Sullivan kind only).
    transform: Option<DenseMatrix>,
}

impl SplineBasis {
    pub fn ncols(&self) -> usize {
        match &self.transform {
            Some(t) => t.ncols(),
            None => self.knots.len(),
        }
    }

    /// True when some `x` lies outside the fitted range.
    pub fn extrapolates(&self, x: &[f64]) -> bool {
        x.iter().any(|&v| v < self.range.0 || v > self.range.1)
    }

    /// `Z` evaluated at `x`, one row per point.
    pub fn evaluate(&self, x: &[f64]) -> DenseMatrix {
        let s = self.standardization;
        match &self.transform {
            None => DenseMatrix::from_fn(x.len(), self.knots.len(), |i, k| {
                (s.apply(x[i]) - s.apply(self.knots[k])).max(0.0)
            }),
            Some(t) => {
                let full = self.full_knots();
                let nb = t.nrows();
                let b = DenseMatrix::from_fn(x.len(), nb, |i, j| bspline(&full, j, 3, s.apply(x[i]), 0));
                b * t
            }
        }
    }

    /// Cubic knot sequence on the standardized scale with fourfold boundary knots.
    fn full_knots(&self) -> Vec<f64> {
        let s = self.standardization;
        let (a, b) = (s.apply(self.range.0), s.apply(self.range.1));
        let mut t = vec![a; 4];
        t.extend(self.knots.iter().map(|&k| s.apply(k)));
        t.extend([b; 4]);
        t
    }
}

/// Type-7 sample quantile of sorted values.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn unique_sorted(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| a.total_cmp(b));
    u.dedup();
    u
}

/// Builds the `n × K` spline design for `x` and the basis that reproduces it.
pub fn spline_design(x: &[f64], k: usize, kind: SplineKind) -> Result<(DenseMatrix, SplineBasis)> {
    if k == 0 {
        return Err(VmpError::domain("K", "at least one basis function is required"));
    }
    if x.len() <= k {
        return Err(VmpError::domain("K", format!("n = {} must exceed K = {k}", x.len())));
    }
    let standardization = Standardization::fit(x)?;
    let uniq = unique_sorted(x);
    if uniq.len() < k.max(2) {
        return Err(VmpError::domain(
            "predictor",
            format!("too few distinct values ({}) for K = {k}", uniq.len()),
        ));
    }
    let range = (uniq[0], uniq[uniq.len() - 1]);
    let basis = match kind {
        SplineKind::TruncatedLinear => {
            let knots = (1..=k).map(|j| quantile_sorted(&uniq, j as f64 / (k + 1) as f64)).collect();
            SplineBasis { kind, knots, range, standardization, transform: None }
        }
        SplineKind::OsullivanLike => {
            if k < 3 {
                return Err(VmpError::domain("K", "the O'Sullivan basis needs K ≥ 3"));
            }
            let interior = k - 2;
            let knots = (1..=interior).map(|j| quantile_sorted(&uniq, j as f64 / (interior + 1) as f64)).collect();
            let mut basis = SplineBasis { kind, knots, range, standardization, transform: None };
            basis.transform = Some(osullivan_transform(&basis.full_knots(), k)?);
            basis
        }
    };
    let z = basis.evaluate(x);
    Ok((z, basis))
}

/// Cox-de Boor evaluation of the `deriv`th derivative of `B_{i,p}`.
fn bspline(t: &[f64], i: usize, p: usize, x: f64, deriv: usize) -> f64 {
    if deriv > 0 {
        if p == 0 {
            return 0.0;
        }
        let mut v = 0.0;
        let d1 = t[i + p] - t[i];
        if d1 > 0.0 {
            v += p as f64 / d1 * bspline(t, i, p - 1, x, deriv - 1);
        }
        let d2 = t[i + p + 1] - t[i + 1];
        if d2 > 0.0 {
            v -= p as f64 / d2 * bspline(t, i + 1, p - 1, x, deriv - 1);
        }
        return v;
    }
    if p == 0 {
        let right = t[t.len() - 1];
        let closes = x == right && t[i + 1] == right && t[i] < right;
        return if (t[i] <= x && x < t[i + 1]) || closes { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = t[i + p] - t[i];
    if d1 > 0.0 {
        v += (x - t[i]) / d1 * bspline(t, i, p - 1, x, 0);
    }
    let d2 = t[i + p + 1] - t[i + 1];
    if d2 > 0.0 {
        v += (t[i + p + 1] - x) / d2 * bspline(t, i + 1, p - 1, x, 0);
    }
    v
}

/// `∫ B''_i B''_j` over the boundary interval; Simpson's rule is exact
/// because each `B''` is linear between knots.
fn second_derivative_penalty(t: &[f64]) -> DenseMatrix {
    let nb = t.len() - 4;
    let mut omega = DenseMatrix::zeros(nb, nb);
    for w in t.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r <= l {
            continue;
        }
        let h = r - l;
        let m = 0.5 * (l + r);
        // Evaluate just inside the interval so each piece uses its own polynomial.
        let pts = [(l, 1.0), (m, 4.0), (r - 1e-12 * h, 1.0)];
        for (x, wgt) in pts {
            let d2: Vec<f64> = (0..nb).map(|j| bspline(t, j, 3, x.max(l), 2)).collect();
            for i in 0..nb {
                for j in 0..nb {
                    omega[(i, j)] += h / 6.0 * wgt * d2[i] * d2[j];
                }
            }
        }
    }
    omega
}

fn osullivan_transform(t: &[f64], k: usize) -> Result<DenseMatrix> {
    let omega = second_derivative_penalty(t);
    let eig = SymmetricEigen::new(omega);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let nb = eig.eigenvalues.len();
    let mut transform = DenseMatrix::zeros(nb, k);
    for (c, &j) in order.iter().take(k).enumerate() {
        let d = eig.eigenvalues[j];
        if !(d > 1e-10 * top) {
            return Err(VmpError::numeric("O'Sullivan penalty", format!("eigenvalue {d:.3e} is not positive")));
        }
        // Fix the sign so the largest-magnitude entry is positive.
        let col = eig.eigenvectors.column(j);
        let pivot = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        transform.set_column(c, &(col * (sign / d.sqrt())));
    }
    Ok(transform)
}

/// `[1, x_std]` fixed-effect design.
pub fn linear_design(x: &[f64], s: &Standardization) -> DenseMatrix {
    DenseMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { s.apply(x[i]) })
}

/// Horizontal concatenation of equally tall blocks.
pub fn hstack(blocks: &[&DenseMatrix]) -> DenseMatrix {
    let n = blocks.first().map_or(0, |b| b.nrows());
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DenseMatrix::zeros(n, m);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (n, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Second-derivative penalty of the penalized columns, exposed for checks.
pub fn penalty_in_basis(basis: &SplineBasis) -> Option<DenseMatrix> {
    basis.transform.as_ref().map(|t| {
        let omega = second_derivative_penalty(&basis.full_knots());
        t.transpose() * omega * t
    })
}

/// Constant vector helper.
pub fn ones(n: usize) -> Vector {
    Vector::from_element(n, 1.0)
}
