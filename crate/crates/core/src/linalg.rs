//! Matrix primitives used by the message algebra: `vec`, `vec⁻¹`, symmetric
//! positive definite solves and the `G_VMP` quadratic-form expectation.
//!
//! Matrices are `nalgebra::DMatrix<f64>`, whose storage is column-major, so
//! `vec` is a copy of the storage buffer.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Result, VmpError};

pub type DenseMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Column-wise stacking of a square matrix.
pub fn vec(m: &DenseMatrix) -> Result<Vector> {
    if m.nrows() != m.ncols() {
        return Err(VmpError::Dimension(format!(
            "vec expects a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Vector::from_column_slice(m.as_slice()))
}

/// Inverse of [`vec`]: unstacks a length-`d²` vector column by column.
pub fn vec_inverse(a: &[f64], d: usize) -> Result<DenseMatrix> {
    if a.len() != d * d {
        return Err(VmpError::Dimension(format!(
            "vec_inverse expects length {} for d={}, got {}",
            d * d,
            d,
            a.len()
        )));
    }
    Ok(DenseMatrix::from_column_slice(d, d, a))
}

/// Integer square root of a `d²` length, if exact.
pub fn square_dim(len: usize) -> Option<usize> {
    let d = (len as f64).sqrt().round() as usize;
    (d * d == len).then_some(d)
}

pub fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    (m + m.transpose()) * 0.5
}

/// Cholesky factor of a symmetrized SPD matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    dim: usize,
}

impl SpdFactor {
    /// Factorizes `(m + mᵀ)/2`. With `ridge`, a failed factorization is retried
    /// once after adding `1e-10·trace/d` to the diagonal.
    pub fn new(m: &DenseMatrix, context: &str, ridge: bool) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(VmpError::Dimension(format!(
                "{context}: expected square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dim = m.nrows();
        let sym = symmetrize(m);
        if !sym.iter().all(|v| v.is_finite()) {
            return Err(VmpError::numeric(context, "non-finite matrix entry"));
        }
        if let Some(chol) = Cholesky::new(sym.clone()) {
            return Ok(SpdFactor { chol, dim });
        }
        if ridge && dim > 0 {
            let eps = 1e-10 * sym.trace().abs().max(f64::MIN_POSITIVE) / dim as f64;
            let mut bumped = sym.clone();
            for i in 0..dim {
                bumped[(i, i)] += eps;
            }
            if let Some(chol) = Cholesky::new(bumped) {
                return Ok(SpdFactor { chol, dim });
            }
        }
        Err(VmpError::NotSpd { context: context.to_string(), condition: condition_estimate(&sym) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_vec(&self, b: &Vector) -> Vector {
        self.chol.solve(b)
    }

    pub fn solve(&self, b: &DenseMatrix) -> DenseMatrix {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DenseMatrix {
        symmetrize(&self.chol.inverse())
    }

    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        (0..self.dim).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
    }
}

/// Ratio of extreme eigenvalue magnitudes; infinite when an eigenvalue is not positive.
pub fn condition_estimate(sym: &DenseMatrix) -> f64 {
    if sym.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(sym.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn spd_inverse(m: &DenseMatrix, context: &str) -> Result<DenseMatrix> {
    Ok(SpdFactor::new(m, context, false)?.inverse())
}

/// Moments of a Multivariate Normal given its natural parameter vector
/// `(η₁, vec(η₂))`, with `−2·vec⁻¹(η₂)` factorized once.
#[derive(Debug, Clone)]
pub struct MvnMoments {
    pub mean: Vector,
    pub cov: DenseMatrix,
    /// Cholesky factor of the precision `−2·vec⁻¹(η₂)`.
    pub precision: SpdFactor,
}

impl MvnMoments {
    pub fn from_natural(eta: &[f64], d: usize, ridge: bool) -> Result<Self> {
        if eta.len() != d + d * d {
            return Err(VmpError::Dimension(format!(
                "MVN natural parameter of length {} does not match d={d}",
                eta.len()
            )));
        }
        let eta1 = Vector::from_column_slice(&eta[..d]);
        let s = vec_inverse(&eta[d..], d)?;
        let precision = SpdFactor::new(&(-2.0 * s), "MVN precision -2·vec⁻¹(η₂)", ridge)?;
        let mean = precision.solve_vec(&eta1);
        let cov = precision.inverse();
        Ok(MvnMoments { mean, cov, precision })
    }

    /// `E(θθᵀ) = Σ + μμᵀ`.
    pub fn second_moment(&self) -> DenseMatrix {
        &self.cov + &self.mean * self.mean.transpose()
    }
}

/// Arguments of [`g_vmp`].
#[derive(Debug, Clone)]
pub struct GvmpArgs<'a> {
    pub eta: &'a [f64],
    pub q: &'a DenseMatrix,
    pub r: &'a Vector,
    pub s: f64,
}

/// `E{−½(θᵀQθ − 2rᵀθ + s)}` for θ Multivariate Normal with natural
/// parameter `eta`, evaluated as
/// `−⅛ tr(Q S⁻¹[η₁η₁ᵀS⁻¹ − 2I]) − ½ rᵀS⁻¹η₁ − ½s` with `S = vec⁻¹(η₂)`.
pub fn g_vmp(args: &GvmpArgs<'_>) -> Result<f64> {
    let d = args.r.len();
    if args.q.nrows() != d || args.q.ncols() != d {
        return Err(VmpError::Dimension(format!(
            "G_VMP: Q is {}x{}, r has length {d}",
            args.q.nrows(),
            args.q.ncols()
        )));
    }
    if args.eta.len() != d + d * d {
        return Err(VmpError::Dimension(format!(
            "G_VMP: eta has length {}, expected {}",
            args.eta.len(),
            d + d * d
        )));
    }
    let eta1 = Vector::from_column_slice(&args.eta[..d]);
    let s = vec_inverse(&args.eta[d..], d)?;
    // S is negative definite; factor −S and flip signs.
    let neg = SpdFactor::new(&(-s), "G_VMP: −vec⁻¹(η₂)", false)?;
    let s_inv_eta1 = -neg.solve_vec(&eta1);
    let s_inv = -neg.inverse();
    let quad = s_inv_eta1.dot(&(args.q * &s_inv_eta1));
    let tr_q_sinv = (args.q.component_mul(&s_inv.transpose())).sum();
    Ok(-0.125 * (quad - 2.0 * tr_q_sinv) - 0.5 * args.r.dot(&s_inv_eta1) - 0.5 * args.s)
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[DenseMatrix]) -> DenseMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DenseMatrix::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `I_m ⊗ B`.
pub fn kron_identity(m: usize, b: &DenseMatrix) -> DenseMatrix {
    block_diag(&vec![b.clone(); m])
}

/// Natural parameter `(Σ⁻¹μ, −½vec(Σ⁻¹))` of a Multivariate Normal.
pub fn mvn_natural(mu: &Vector, sigma: &DenseMatrix, context: &str) -> Result<Vector> {
    let f = SpdFactor::new(sigma, context, false)?;
    let prec = f.inverse();
    let mut out = Vector::zeros(mu.len() + prec.len());
    out.rows_mut(0, mu.len()).copy_from(&(&prec * mu));
    out.rows_mut(mu.len(), prec.len()).copy_from_slice((prec * -0.5).as_slice());
    Ok(out)
}
