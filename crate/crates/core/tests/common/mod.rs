#![allow(dead_code)]

use fragvmp::engine::{FactorGraph, ModelSpec};
use fragvmp::expfam::{CommonParameters, FamilyTag, NaturalParameterVector};
use fragvmp::fragments::FragmentSpec;
use fragvmp::linalg::{DenseMatrix, Vector};

pub type TestResult<T> = Result<T, Box<dyn std::error::Error>>;

/// `|a − b| / max(|b|, floor)` maximized over entries.
pub fn max_rel(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(floor)).fold(0.0, f64::max)
}

/// Largest entrywise difference scaled by the largest entry of `b`.
pub fn scaled_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn mvn_of(g: &FactorGraph, node: &str) -> TestResult<(Vector, DenseMatrix)> {
    match g.q_density_by_name(node)?.common {
        CommonParameters::MultivariateNormal { mu, sigma } => Ok((mu, sigma)),
        other => Err(format!("{node} is not Gaussian: {other:?}").into()),
    }
}

pub fn inv_chisq_of(g: &FactorGraph, node: &str) -> TestResult<(f64, f64)> {
    match g.q_density_by_name(node)?.common {
        CommonParameters::InverseChiSquared { kappa, lambda } => Ok((kappa, lambda)),
        other => Err(format!("{node} is not Inverse-χ²: {other:?}").into()),
    }
}

pub fn fragment<'a>(spec: &'a ModelSpec, name: &str) -> TestResult<&'a FragmentSpec> {
    spec.factors
        .iter()
        .find(|f| f.name == name)
        .map(|f| &f.fragment)
        .ok_or_else(|| format!("no factor named {name}").into())
}

/// Directions in natural-parameter space that keep matrix blocks symmetric
/// (and diagonal for the diagonal family).
pub fn symmetric_directions(family: FamilyTag) -> Vec<Vector> {
    let len = family.eta_len();
    let unit = |idx: &[usize]| {
        let mut v = Vector::zeros(len);
        for &i in idx {
            v[i] = 1.0;
        }
        v
    };
    let (offset, d, diagonal_only) = match family {
        FamilyTag::MultivariateNormal(d) => (d, d, false),
        FamilyTag::InverseWishart(d) => (1, d, false),
        FamilyTag::InverseGWishartDiag(d) => (1, d, true),
        _ => return (0..len).map(|i| unit(&[i])).collect(),
    };
    let mut out: Vec<Vector> = (0..offset).map(|i| unit(&[i])).collect();
    for j in 0..d {
        for i in j..d {
            if i == j {
                out.push(unit(&[offset + i + j * d]));
            } else if !diagonal_only {
                out.push(unit(&[offset + i + j * d, offset + j + i * d]));
            }
        }
    }
    out
}

/// Richardson-extrapolated central difference of `f` at `x.eta` along `v`
/// from steps `h` and `h/2`.
pub fn central_difference(
    x: &NaturalParameterVector,
    v: &Vector,
    h: f64,
    f: impl Fn(&NaturalParameterVector) -> fragvmp::Result<f64>,
) -> TestResult<f64> {
    let cd = |h: f64| -> TestResult<f64> {
        let plus = NaturalParameterVector::new(x.family, &x.eta + v * h)?;
        let minus = NaturalParameterVector::new(x.family, &x.eta - v * h)?;
        Ok((f(&plus)? - f(&minus)?) / (2.0 * h))
    };
    Ok((4.0 * cd(0.5 * h)? - cd(h)?) / 3.0)
}
