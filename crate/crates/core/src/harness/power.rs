//! Power of the prior and holdout tests against an alternative model.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split_calibration, ReferenceTable, SeedStream, SplitSpec};
use crate::error::{Error, Result};
use crate::holdout::{holdout_pvalues, HoldoutInput};
use crate::posterior::{PosteriorSpec, Resimulator};
use crate::prior_gof::{exceedance_count, PriorTest};
use crate::scores::{Scaling, ScoreSpec};

use super::toy::{simulate_toy, ToyModelSpec};

/// Budgets, Monte Carlo size, level and scores of a power or calibration
/// study. For the prior test a budget is the total number of simulations
/// (split evenly into reference and calibration); for the holdout test
/// it is the size of the reference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub budgets: Vec<usize>,
    pub n_test: usize,
    pub alpha: f64,
    pub score_specs: Vec<ScoreSpec>,
    /// Rescaling of summaries before scoring (by the reference set of
    /// each test).
    #[serde(default)]
    pub scaling: Scaling,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::Spec("no budget given".into()));
        }
        if self.n_test == 0 {
            return Err(Error::Spec("n_test must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Spec(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.score_specs.is_empty() {
            return Err(Error::Spec("no score given".into()));
        }
        for s in &self.score_specs {
            s.validate()?;
        }
        Ok(())
    }

    fn stream(&self) -> SeedStream {
        SeedStream::new(self.seed)
    }
}

/// kNN and LOF for every `k` in `ks`.
pub fn k_sweep_specs(ks: impl IntoIterator<Item = usize>) -> Vec<ScoreSpec> {
    let ks: Vec<usize> = ks.into_iter().collect();
    ks.iter()
        .map(|&k| ScoreSpec::Knn { k })
        .chain(ks.iter().map(|&k| ScoreSpec::Lof { k }))
        .collect()
}

/// Where simulations come from: the built-in toy model or a precomputed
/// table (rows are drawn without replacement).
#[derive(Debug, Clone)]
pub enum ModelSource {
    Toy(ToyModelSpec),
    Table { name: String, table: ReferenceTable },
}

impl ModelSource {
    pub fn name(&self) -> String {
        match self {
            ModelSource::Toy(m) => format!("toy-{}", m.family.name()),
            ModelSource::Table { name, .. } => name.clone(),
        }
    }

    /// `n` prior-predictive draws.
    pub fn draw(&self, n: usize, seed: u64) -> Result<ReferenceTable> {
        match self {
            ModelSource::Toy(model) => simulate_toy(model, n, seed),
            ModelSource::Table { name, table } => {
                if n > table.len() {
                    return Err(Error::Size(format!(
                        "table {name} has {} rows, {n} requested",
                        table.len()
                    )));
                }
                let mut rows = sample(&mut SeedStream::new(seed).rng(), table.len(), n).into_vec();
                rows.sort_unstable();
                table.select(&rows)
            }
        }
    }
}

/// Held-out pairs for the holdout test: the toy model (both parts drawn
/// with the same parameters) or two row-aligned tables.
#[derive(Debug, Clone)]
pub enum PairSource {
    Toy(ToyModelSpec),
    Tables {
        name: String,
        obs: ReferenceTable,
        new: ReferenceTable,
    },
}

impl PairSource {
    pub fn name(&self) -> String {
        match self {
            PairSource::Toy(m) => ModelSource::Toy(m.clone()).name(),
            PairSource::Tables { name, .. } => name.clone(),
        }
    }

    /// Pair `k`; toy pairs use child stream `k` of `seed`.
    fn pair(&self, k: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            PairSource::Toy(model) => {
                let mut rng = SeedStream::new(seed).child(k as u64).rng();
                let theta = model.sample_prior(&mut rng);
                let y_obs = model.summaries(&theta, &mut rng)?;
                let y_new = model.summaries(&theta, &mut rng)?;
                Ok((y_obs, y_new))
            }
            PairSource::Tables { obs, new, .. } => Ok((
                obs.particle(k).summaries.clone(),
                new.particle(k).summaries.clone(),
            )),
        }
    }

    fn check(&self, n_test: usize) -> Result<()> {
        if let PairSource::Tables { name, obs, new } = self {
            if obs.len() != new.len() || obs.ids() != new.ids() {
                return Err(Error::Spec(format!("pair tables of {name} are not row-aligned")));
            }
            if obs.len() < n_test {
                return Err(Error::Size(format!(
                    "pair tables of {name} have {} rows, {n_test} requested",
                    obs.len()
                )));
            }
        }
        Ok(())
    }
}

/// Largest exceedance count whose p-value `c / n_calib` is at most `alpha`.
pub fn critical_count(n_calib: usize, alpha: f64) -> usize {
    (0..=n_calib)
        .take_while(|&c| c as f64 / n_calib as f64 <= alpha)
        .last()
        .unwrap_or(0)
}

/// Rejection threshold: the `ceil((1 - alpha) n)`-th smallest calibration
/// score, with the count computed so that it agrees with the p-value
/// rule. `None` when the test rejects everything.
pub fn quantile_threshold(calib_scores: &[f64], alpha: f64) -> Option<f64> {
    let n = calib_scores.len();
    if alpha < 0.0 {
        return Some(f64::INFINITY);
    }
    let r = n - critical_count(n, alpha);
    if r == 0 {
        return None;
    }
    let mut s = calib_scores.to_vec();
    s.sort_by(f64::total_cmp);
    Some(s[r - 1])
}

/// Fraction of PODs scoring at or above the calibration quantile.
pub fn power_by_quantile(calib_scores: &[f64], pod_scores: &[f64], alpha: f64) -> f64 {
    let hits = match quantile_threshold(calib_scores, alpha) {
        None => pod_scores.len(),
        Some(q) => pod_scores.iter().filter(|&&s| s >= q).count(),
    };
    hits as f64 / pod_scores.len() as f64
}

/// Fraction of PODs whose p-value is at most `alpha`, counting
/// exceedances separately for each POD.
pub fn power_by_pvalues(calib_scores: &[f64], pod_scores: &[f64], alpha: f64) -> f64 {
    let n = calib_scores.len() as f64;
    let hits = pod_scores
        .iter()
        .filter(|&&s| exceedance_count(calib_scores, s) as f64 / n <= alpha)
        .count();
    hits as f64 / pod_scores.len() as f64
}

/// Scores of calibration draws and PODs for one budget and score.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorCell {
    pub budget: usize,
    pub n_ref: usize,
    pub n_calib: usize,
    pub score_spec: ScoreSpec,
    pub calib_scores: Vec<f64>,
    pub pod_scores: Vec<f64>,
}

impl PriorCell {
    pub fn pvalues(&self) -> Vec<f64> {
        self.pod_scores
            .par_iter()
            .map(|&s| exceedance_count(&self.calib_scores, s) as f64 / self.n_calib as f64)
            .collect()
    }
}

fn even_split(budget: usize) -> Result<usize> {
    if budget < 4 || budget % 2 == 1 {
        return Err(Error::Spec(format!(
            "budget {budget} must be even and at least 4 to split into equal reference and calibration sets"
        )));
    }
    Ok(budget / 2)
}

/// Prior-test scores for every (budget, score). One null table per budget
/// (split in halves) and one common set of `n_test` alternative PODs.
pub fn prior_cells(null: &ModelSource, alt: &ModelSource, exp: &ExperimentSpec) -> Result<Vec<PriorCell>> {
    exp.validate()?;
    let stream = exp.stream();
    let pods = alt.draw(exp.n_test, stream.named("pods").seed())?;
    let pod_points: Vec<&[f64]> = pods.summaries().collect();
    let mut cells = Vec::new();
    for &budget in &exp.budgets {
        let n_calib = even_split(budget)?;
        let table = null.draw(budget, stream.named("null").child(budget as u64).seed())?;
        if table.n_stats() != pods.n_stats() {
            return Err(Error::Dimension {
                expected: table.n_stats(),
                found: pods.n_stats(),
            });
        }
        let (reference, calibration) = split_calibration(
            &table,
            SplitSpec {
                n_calib,
                seed: stream.named("split").child(budget as u64).seed(),
            },
        )?;
        let test = PriorTest::new(&reference, &calibration, &exp.score_specs, exp.scaling)?;
        let pod_scores: Vec<Vec<f64>> = pod_points
            .par_iter()
            .map(|y| test.observed_scores(y))
            .collect::<Result<_>>()?;
        for (s, spec) in exp.score_specs.iter().enumerate() {
            cells.push(PriorCell {
                budget,
                n_ref: test.n_ref(),
                n_calib: test.n_calib(),
                score_spec: *spec,
                calib_scores: test.calibration_scores(s).to_vec(),
                pod_scores: pod_scores.iter().map(|v| v[s]).collect(),
            });
        }
    }
    Ok(cells)
}

/// `(budget, n_calib, pvalues[score][pod])` per budget.
pub type BudgetPvalues = Vec<(usize, usize, Vec<Vec<f64>>)>;

/// Prior-test p-values of null PODs where every POD is scored against its
/// own freshly drawn reference and calibration sets, so the p-values are
/// independent draws of the unconditional null distribution. Returns, per
/// budget, `(budget, n_calib, pvalues[score][pod])`.
pub fn prior_pvalues_fresh(model: &ModelSource, exp: &ExperimentSpec) -> Result<BudgetPvalues> {
    exp.validate()?;
    let stream = exp.stream();
    let pods = model.draw(exp.n_test, stream.named("pods").seed())?;
    let pod_points: Vec<&[f64]> = pods.summaries().collect();
    let mut out = Vec::new();
    for &budget in &exp.budgets {
        let n_calib = even_split(budget)?;
        let tables = stream.named("null").child(budget as u64);
        let splits = stream.named("split").child(budget as u64);
        let per_pod: Vec<Vec<f64>> = pod_points
            .par_iter()
            .enumerate()
            .map(|(k, y)| {
                let table = model.draw(budget, tables.child(k as u64).seed())?;
                let (reference, calibration) = split_calibration(
                    &table,
                    SplitSpec {
                        n_calib,
                        seed: splits.child(k as u64).seed(),
                    },
                )?;
                let test = PriorTest::new(&reference, &calibration, &exp.score_specs, exp.scaling)?;
                let counts = test.counts(y)?;
                Ok(counts.iter().map(|&c| c as f64 / n_calib as f64).collect())
            })
            .collect::<Result<_>>()?;
        let by_score = (0..exp.score_specs.len())
            .map(|s| per_pod.iter().map(|v| v[s]).collect())
            .collect();
        out.push((budget, n_calib, by_score));
    }
    Ok(out)
}

/// One row of a tidy power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub setting: String,
    pub test: String,
    pub budget: usize,
    pub n_ref: usize,
    pub n_calib: usize,
    pub score: String,
    pub method: Option<String>,
    pub n_post: Option<usize>,
    pub alpha: f64,
    pub n_test: usize,
    pub power: f64,
    /// Same power through per-POD p-values (prior test only; equals
    /// `power`).
    pub power_pvalue: Option<f64>,
    pub mc_se: f64,
}

fn mc_se(power: f64, n: usize) -> f64 {
    (power * (1.0 - power) / n as f64).sqrt()
}

/// Prior-test power per (budget, score) via the quantile formulation.
pub fn estimate_power_prior(null: &ModelSource, alt: &ModelSource, exp: &ExperimentSpec) -> Result<Vec<PowerRow>> {
    let setting = format!("{}-vs-{}", null.name(), alt.name());
    Ok(prior_cells(null, alt, exp)?
        .iter()
        .map(|c| {
            let power = power_by_quantile(&c.calib_scores, &c.pod_scores, exp.alpha);
            PowerRow {
                setting: setting.clone(),
                test: "prior".into(),
                budget: c.budget,
                n_ref: c.n_ref,
                n_calib: c.n_calib,
                score: c.score_spec.to_string(),
                method: None,
                n_post: None,
                alpha: exp.alpha,
                n_test: exp.n_test,
                power,
                power_pvalue: Some(power_by_pvalues(&c.calib_scores, &c.pod_scores, exp.alpha)),
                mc_se: mc_se(power, exp.n_test),
            }
        })
        .collect())
}

/// Holdout p-values of all PODs for one reference size and score.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutCell {
    pub budget: usize,
    pub n_calib: usize,
    pub score_spec: ScoreSpec,
    pub pvalues: Vec<f64>,
}

/// Holdout p-values for every (reference size, score); each POD gets its
/// own re-simulation and split seeds.
pub fn holdout_cells(
    null: &ModelSource,
    resim: &dyn Resimulator,
    alt: &PairSource,
    posterior: &PosteriorSpec,
    exp: &ExperimentSpec,
) -> Result<Vec<HoldoutCell>> {
    exp.validate()?;
    alt.check(exp.n_test)?;
    let stream = exp.stream();
    let pods_seed = stream.named("pods").seed();
    let mut cells = Vec::new();
    for &budget in &exp.budgets {
        let reference = null.draw(budget, stream.named("null").child(budget as u64).seed())?;
        posterior.validate(reference.len())?;
        let holdout = stream.named("holdout");
        let reports: Vec<Vec<_>> = (0..exp.n_test)
            .into_par_iter()
            .map(|k| {
                let (y_obs, y_new) = alt.pair(k, pods_seed)?;
                let input = HoldoutInput {
                    y_obs: &y_obs,
                    y_new: &y_new,
                    reference: &reference,
                    posterior: posterior.clone(),
                    score_specs: exp.score_specs.clone(),
                    scaling: exp.scaling,
                    seed: holdout.child(k as u64).seed(),
                };
                holdout_pvalues(&input, resim)
            })
            .collect::<Result<_>>()?;
        for (s, spec) in exp.score_specs.iter().enumerate() {
            cells.push(HoldoutCell {
                budget,
                n_calib: reports[0][s].n_calib,
                score_spec: *spec,
                pvalues: reports.iter().map(|r| r[s].p_hat).collect(),
            });
        }
    }
    Ok(cells)
}

/// Holdout-test power per (reference size, score): the fraction of PODs
/// with p-value at most `alpha`.
pub fn estimate_power_holdout(
    null: &ModelSource,
    resim: &dyn Resimulator,
    alt: &PairSource,
    posterior: &PosteriorSpec,
    exp: &ExperimentSpec,
) -> Result<Vec<PowerRow>> {
    let setting = format!("{}-vs-{}", null.name(), alt.name());
    Ok(holdout_cells(null, resim, alt, posterior, exp)?
        .iter()
        .map(|c| {
            let hits = c.pvalues.iter().filter(|&&p| p <= exp.alpha).count();
            let power = hits as f64 / c.pvalues.len() as f64;
            PowerRow {
                setting: setting.clone(),
                test: "holdout".into(),
                budget: c.budget,
                n_ref: c.budget,
                n_calib: c.n_calib,
                score: c.score_spec.to_string(),
                method: Some(posterior.method.name().into()),
                n_post: Some(posterior.n_post),
                alpha: exp.alpha,
                n_test: exp.n_test,
                power,
                power_pvalue: None,
                mc_se: mc_se(power, exp.n_test),
            }
        })
        .collect())
}

/// Write rows as CSV with a header.
pub fn write_power_csv(path: impl AsRef<std::path::Path>, rows: &[PowerRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
