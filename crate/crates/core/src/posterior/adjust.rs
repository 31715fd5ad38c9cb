//! Regression adjustment of localized particles: weighted local-linear
//! (Epanechnikov kernel) and ridge variants.

use nalgebra::DMatrix;

use super::transform::TransformSpec;
use crate::data::ReferenceTable;
use crate::error::{Error, Result};
use crate::neighbors::euclidean;

const RANK_TOL: f64 = 1e-9;

/// Adjusted posterior parameters, one vector per localized particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjusted {
    pub params: Vec<Vec<f64>>,
    /// The regression could not be fit and the rejection particles were
    /// returned unchanged.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

/// Epanechnikov weights `1 - (d / eps)^2`, `eps` the largest distance.
/// All weights are 1 when every distance is 0.
pub(crate) fn epanechnikov_weights(distances: &[f64]) -> Vec<f64> {
    let eps = distances.iter().copied().fold(0.0, f64::max);
    if eps == 0.0 {
        return vec![1.0; distances.len()];
    }
    distances
        .iter()
        .map(|d| (1.0 - (d / eps).powi(2)).max(0.0))
        .collect()
}

/// Slope matrix `B` (m x p) of the weighted regression of `theta` on `x`
/// with an unpenalized intercept. With `lambda`, slopes of the
/// column-standardized design are ridge penalized. `None` when the
/// unpenalized design is rank deficient.
pub(crate) fn weighted_slopes(
    x: &[Vec<f64>],
    theta: &[Vec<f64>],
    w: &[f64],
    lambda: Option<f64>,
) -> Option<DMatrix<f64>> {
    let n = x.len();
    let m = x.first().map_or(0, Vec::len);
    let p = theta.first().map_or(0, Vec::len);
    let sw: f64 = w.iter().sum();
    let support = w.iter().filter(|v| **v > 0.0).count();
    if sw <= 0.0 || m == 0 {
        return None;
    }
    if lambda.is_none() && support < m + 1 {
        return None;
    }
    let wmean = |col: &dyn Fn(usize) -> f64| (0..n).map(|i| w[i] * col(i)).sum::<f64>() / sw;
    let xbar: Vec<f64> = (0..m).map(|j| wmean(&|i| x[i][j])).collect();
    let tbar: Vec<f64> = (0..p).map(|k| wmean(&|i| theta[i][k])).collect();
    let mut scale = vec![1.0; m];
    for j in 0..m {
        let s = wmean(&|i| (x[i][j] - xbar[j]).powi(2)).sqrt();
        if s > 0.0 {
            scale[j] = s;
        } else if lambda.is_none() {
            return None;
        }
    }
    let a = DMatrix::from_fn(n, m, |i, j| w[i].sqrt() * (x[i][j] - xbar[j]) / scale[j]);
    let r = DMatrix::from_fn(n, p, |i, k| w[i].sqrt() * (theta[i][k] - tbar[k]));
    let beta_scaled = match lambda {
        None => {
            let svd = a.svd(true, true);
            let max_sv = svd.singular_values.max();
            if max_sv <= 0.0 || svd.singular_values.min() <= RANK_TOL * max_sv {
                return None;
            }
            svd.solve(&r, 0.0).ok()?
        }
        Some(l) => {
            let gram = a.transpose() * &a + DMatrix::identity(m, m) * (l * sw);
            gram.cholesky()?.solve(&(a.transpose() * &r))
        }
    };
    Some(DMatrix::from_fn(m, p, |j, k| beta_scaled[(j, k)] / scale[j]))
}

struct Prepared {
    x: Vec<Vec<f64>>,
    w: Vec<f64>,
    theta: Vec<Vec<f64>>,
}

fn prepare(localized: &ReferenceTable, y_obs: &[f64], transform: Option<&TransformSpec>) -> Result<Prepared> {
    if y_obs.len() != localized.n_stats() {
        return Err(Error::Dimension {
            expected: localized.n_stats(),
            found: y_obs.len(),
        });
    }
    let x: Vec<Vec<f64>> = localized
        .summaries()
        .map(|s| s.iter().zip(y_obs).map(|(a, b)| a - b).collect())
        .collect();
    let distances: Vec<f64> = localized.summaries().map(|s| euclidean(s, y_obs)).collect();
    let theta = match transform {
        Some(t) => localized.params().map(|p| t.forward(p)).collect::<Result<_>>()?,
        None => localized.params().map(<[f64]>::to_vec).collect(),
    };
    Ok(Prepared {
        x,
        w: epanechnikov_weights(&distances),
        theta,
    })
}

fn apply(prep: &Prepared, beta: &DMatrix<f64>) -> Vec<Vec<f64>> {
    prep.theta
        .iter()
        .zip(&prep.x)
        .map(|(t, x)| {
            t.iter()
                .enumerate()
                .map(|(k, tk)| tk - x.iter().enumerate().map(|(j, xj)| xj * beta[(j, k)]).sum::<f64>())
                .collect()
        })
        .collect()
}

fn finish(
    localized: &ReferenceTable,
    adjusted: Option<Vec<Vec<f64>>>,
    transform: Option<&TransformSpec>,
) -> Result<Adjusted> {
    let mut warnings = Vec::new();
    let Some(adjusted) = adjusted else {
        warnings.push("rank-deficient weighted design; rejection particles kept".into());
        return Ok(Adjusted {
            params: localized.params().map(<[f64]>::to_vec).collect(),
            fallback: true,
            warnings,
        });
    };
    let params = match transform {
        Some(t) => adjusted.iter().map(|v| t.inverse(v)).collect::<Result<_>>()?,
        None => {
            warnings.push("no parameter transform; adjusted parameters are unconstrained".into());
            adjusted
        }
    };
    Ok(Adjusted {
        params,
        fallback: false,
        warnings,
    })
}

/// Local-linear regression adjustment `theta_i - B (y_i - y_obs)` with
/// Epanechnikov weights, in transformed space when a transform is given.
/// Falls back to the unadjusted particles when the design is rank
/// deficient.
pub fn loclin_adjust(
    localized: &ReferenceTable,
    y_obs: &[f64],
    transform: Option<&TransformSpec>,
) -> Result<Adjusted> {
    let prep = prepare(localized, y_obs, transform)?;
    let adjusted = weighted_slopes(&prep.x, &prep.theta, &prep.w, None).map(|b| apply(&prep, &b));
    finish(localized, adjusted, transform)
}

/// Ridge adjustment for every penalty in `lambdas`; each particle gets
/// the coordinatewise median (in unconstrained space) of its adjustments.
pub fn ridge_adjust(
    localized: &ReferenceTable,
    y_obs: &[f64],
    lambdas: &[f64],
    transform: Option<&TransformSpec>,
) -> Result<Adjusted> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::Spec("ridge needs one or more positive lambdas".into()));
    }
    let prep = prepare(localized, y_obs, transform)?;
    let per_lambda: Vec<Vec<Vec<f64>>> = lambdas
        .iter()
        .map(|l| {
            weighted_slopes(&prep.x, &prep.theta, &prep.w, Some(*l))
                .map(|b| apply(&prep, &b))
                .ok_or_else(|| Error::Spec(format!("ridge system with lambda {l} is singular")))
        })
        .collect::<Result<_>>()?;
    let n = prep.theta.len();
    let p = prep.theta.first().map_or(0, Vec::len);
    let mut column = Vec::with_capacity(lambdas.len());
    let adjusted = (0..n)
        .map(|i| {
            (0..p)
                .map(|k| {
                    column.clear();
                    column.extend(per_lambda.iter().map(|a| a[i][k]));
                    crate::prior_gof::median(&column).expect("nonempty")
                })
                .collect()
        })
        .collect();
    finish(localized, Some(adjusted), transform)
}
