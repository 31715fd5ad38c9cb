//! Calibration of the tests under the null: p-values of PODs drawn from
//! the reference model itself should be close to Uniform(0, 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::PosteriorSpec;

use super::power::{holdout_cells, prior_cells, prior_pvalues_fresh, ExperimentSpec, ModelSource, PairSource};
use super::toy::ToyModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationTest {
    /// All PODs share one reference/calibration table per budget.
    Prior,
    /// Each POD gets its own table.
    PriorFresh,
    Holdout(PosteriorSpec),
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `pvalues`
/// and Uniform(0, 1).
pub fn ks_uniform(pvalues: &[f64]) -> f64 {
    let mut p = pvalues.to_vec();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Largest gap between sorted p-values and the uniform plotting
/// positions `(i - 0.5) / n`.
pub fn max_quantile_deviation(pvalues: &[f64]) -> f64 {
    let mut p = pvalues.to_vec();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| (x - (i as f64 + 0.5) / n).abs())
        .fold(0.0, f64::max)
}

/// P-values of null PODs for one budget and score, with their distance
/// to uniformity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub setting: String,
    pub test: String,
    pub budget: usize,
    pub n_calib: usize,
    pub score: String,
    pub method: Option<String>,
    pub n_post: Option<usize>,
    pub n_test: usize,
    pub ks: f64,
    pub max_quantile_deviation: f64,
    #[serde(skip)]
    pub pvalues: Vec<f64>,
}

impl CalibrationResult {
    /// Sorted p-values with their empirical CDF values.
    pub fn ecdf(&self) -> Vec<(f64, f64)> {
        let mut p = self.pvalues.clone();
        p.sort_by(f64::total_cmp);
        let n = p.len() as f64;
        p.iter()
            .enumerate()
            .map(|(i, &x)| (x, (i + 1) as f64 / n))
            .collect()
    }
}

/// Simulate null PODs from `model` and test them against `model`.
pub fn calibration_check(
    model: &ToyModelSpec,
    exp: &ExperimentSpec,
    test: &CalibrationTest,
) -> Result<Vec<CalibrationResult>> {
    let source = ModelSource::Toy(model.clone());
    let setting = source.name();
    let result = |test_name: &str, budget, n_calib, score: String, method, n_post, pvalues: Vec<f64>| {
        CalibrationResult {
            setting: setting.clone(),
            test: test_name.into(),
            budget,
            n_calib,
            score,
            method,
            n_post,
            n_test: pvalues.len(),
            ks: ks_uniform(&pvalues),
            max_quantile_deviation: max_quantile_deviation(&pvalues),
            pvalues,
        }
    };
    match test {
        CalibrationTest::Prior => Ok(prior_cells(&source, &source, exp)?
            .iter()
            .map(|c| {
                result("prior", c.budget, c.n_calib, c.score_spec.to_string(), None, None, c.pvalues())
            })
            .collect()),
        CalibrationTest::PriorFresh => Ok(prior_pvalues_fresh(&source, exp)?
            .into_iter()
            .flat_map(|(budget, n_calib, by_score)| {
                exp.score_specs
                    .iter()
                    .zip(by_score)
                    .map(|(spec, p)| result("prior", budget, n_calib, spec.to_string(), None, None, p))
                    .collect::<Vec<_>>()
            })
            .collect()),
        CalibrationTest::Holdout(posterior) => Ok(holdout_cells(
            &source,
            model,
            &PairSource::Toy(model.clone()),
            posterior,
            exp,
        )?
        .into_iter()
        .map(|c| {
            result(
                "holdout",
                c.budget,
                c.n_calib,
                c.score_spec.to_string(),
                Some(posterior.method.name().to_string()),
                Some(posterior.n_post),
                c.pvalues,
            )
        })
        .collect()),
    }
}

/// Summary table: one row per (budget, score).
pub fn write_calibration_csv(path: impl AsRef<std::path::Path>, results: &[CalibrationResult]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Long table of every empirical CDF.
pub fn write_ecdf_csv(path: impl AsRef<std::path::Path>, results: &[CalibrationResult]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["setting", "test", "budget", "score", "method", "p_value", "ecdf"])?;
    for r in results {
        for (p, f) in r.ecdf() {
            w.write_record([
                r.setting.clone(),
                r.test.clone(),
                r.budget.to_string(),
                r.score.clone(),
                r.method.clone().unwrap_or_default(),
                crate::data::format_float(p),
                crate::data::format_float(f),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::ScoreSpec;

    #[test]
    fn ks_examples() {
        assert!((ks_uniform(&[0.5]) - 0.5).abs() < 1e-15);
        // perfect plotting positions
        let p: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_uniform(&p) - 0.05).abs() < 1e-12);
        assert!(max_quantile_deviation(&p) < 1e-15);
        assert!((ks_uniform(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prior_pvalues_on_lattice_and_roughly_uniform() {
        let model = ToyModelSpec { d: 60, m: 6, ..ToyModelSpec::laplace() };
        let exp = ExperimentSpec {
            budgets: vec![400],
            n_test: 400,
            alpha: 0.05,
            score_specs: vec![ScoreSpec::Knn { k: 1 }],
            scaling: crate::scores::Scaling::None,
            seed: 5,
        };
        let res = calibration_check(&model, &exp, &CalibrationTest::Prior).unwrap();
        assert_eq!(res.len(), 1);
        let r = &res[0];
        for p in &r.pvalues {
            let scaled = p * r.n_calib as f64;
            assert!((scaled - scaled.round()).abs() < 1e-9);
        }
        assert!(r.ks < 0.15, "ks = {}", r.ks);
        assert_eq!(r.ecdf().last().unwrap().1, 1.0);
    }
}
