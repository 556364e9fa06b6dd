use serde::{Deserialize, Serialize};

use crate::engine::{Link, QDensity};
use crate::error::{Result, VmpError};
use crate::expfam::CommonParameters;
use crate::linalg::DenseMatrix;
use crate::special::norm_quantile;

/// Pointwise posterior mean and 95% credible band on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCurve {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower95: Vec<f64>,
    pub upper95: Vec<f64>,
    /// Set when some grid point lies outside the range the basis was fitted on.
    pub extrapolated: bool,
}

/// `z` with `Φ(z) = 0.975`.
pub fn z975() -> f64 {
    norm_quantile(0.975)
}

/// Mean and band of `rows · θ` under `q_coef`, mapped through `link`.
pub fn fitted_curve(q_coef: &QDensity, rows: &DenseMatrix, grid: &[f64], link: Link, extrapolated: bool) -> Result<FittedCurve> {
    let (mu, sigma) = match &q_coef.common {
        CommonParameters::MultivariateNormal { mu, sigma } => (mu, sigma),
        _ => {
            return Err(VmpError::domain("q_coef", format!("{} is not a Multivariate Normal density", q_coef.family)));
        }
    };
    if rows.ncols() != mu.len() || rows.nrows() != grid.len() {
        return Err(VmpError::Dimension(format!(
            "curve design is {}x{} for {} grid points and a {}-dimensional coefficient",
            rows.nrows(),
            rows.ncols(),
            grid.len(),
            mu.len()
        )));
    }
    let z = z975();
    let mean_lp = rows * mu;
    let cov_rows = rows * sigma;
    let mut curve = FittedCurve {
        grid: grid.to_vec(),
        mean: Vec::with_capacity(grid.len()),
        lower95: Vec::with_capacity(grid.len()),
        upper95: Vec::with_capacity(grid.len()),
        extrapolated,
    };
    for i in 0..grid.len() {
        let var = cov_rows.row(i).dot(&rows.row(i)).max(0.0);
        let half = z * var.sqrt();
        let m = mean_lp[i];
        curve.mean.push(link.inverse(m));
        curve.lower95.push(link.inverse(m - half));
        curve.upper95.push(link.inverse(m + half));
    }
    Ok(curve)
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::{common_to_natural, FamilyTag};
    use crate::linalg::Vector;

    fn q(mu: &[f64], sigma: DenseMatrix) -> QDensity {
        let common = CommonParameters::MultivariateNormal { mu: Vector::from_column_slice(mu), sigma };
        let family = FamilyTag::MultivariateNormal(mu.len());
        QDensity { node: "coef".into(), family, eta_q: common_to_natural(family, &common).unwrap(), common }
    }

    #[test]
    fn grid_hits_both_endpoints() {
        let lo = 0.001_234_567;
        let hi = 0.998_765_43;
        let g = uniform_grid(lo, hi, 201);
        assert_eq!((g[0], g[200]), (lo, hi));
        assert!(g.iter().all(|&x| (lo..=hi).contains(&x)));
    }

    #[test]
    fn single_point_half_width() {
        let qd = q(&[2.0], DenseMatrix::from_element(1, 1, 0.25));
        let c = fitted_curve(&qd, &DenseMatrix::from_element(1, 1, 1.0), &[0.0], Link::Identity, false).unwrap();
        assert!((c.upper95[0] - c.mean[0] - 1.959964 * 0.5).abs() < 1e-6);
        assert!((c.mean[0] - c.lower95[0] - 1.959964 * 0.5).abs() < 1e-6);
    }

    #[test]
    fn vanishing_covariance_collapses_band() {
        let qd = q(&[1.0, -1.0], DenseMatrix::identity(2, 2) * 1e-300);
        let rows = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let c = fitted_curve(&qd, &rows, &[0.0, 1.0], Link::Identity, false).unwrap();
        for i in 0..2 {
            assert!((c.upper95[i] - c.lower95[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_links_keep_order() {
        let qd = q(&[0.3, -0.7], DenseMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.4]));
        let grid = uniform_grid(-2.0, 2.0, 21);
        let rows = DenseMatrix::from_fn(21, 2, |i, j| if j == 0 { 1.0 } else { grid[i] });
        for link in [Link::Identity, Link::Logit, Link::Probit, Link::Log] {
            let c = fitted_curve(&qd, &rows, &grid, link, false).unwrap();
            for i in 0..grid.len() {
                assert!(c.lower95[i] <= c.mean[i] && c.mean[i] <= c.upper95[i]);
            }
        }
    }

    #[test]
    fn rejects_non_gaussian() {
        let common = CommonParameters::InverseChiSquared { kappa: 2.0, lambda: 1.0 };
        let qd = QDensity {
            node: "s".into(),
            family: FamilyTag::InverseChiSquared,
            eta_q: common_to_natural(FamilyTag::InverseChiSquared, &common).unwrap(),
            common,
        };
        assert!(fitted_curve(&qd, &DenseMatrix::zeros(1, 1), &[0.0], Link::Identity, false).is_err());
    }
}
