use crate::data::{split_calibration, ReferenceTable, SeedStream, SplitSpec};
use crate::error::{Error, Result};
use crate::posterior::{localize, resimulate, Resimulator};
use crate::scores::{Query, Scaling, ScoreSpec, Scorer};

use super::report::{GofReport, TestKind};

/// Number of calibration scores strictly greater than the observed one.
pub fn exceedance_count(calib_scores: &[f64], observed: f64) -> usize {
    calib_scores.iter().filter(|&&s| s > observed).count()
}

/// Fraction of calibration scores strictly greater than the observed one.
pub fn exceedance_pvalue(calib_scores: &[f64], observed: f64) -> f64 {
    exceedance_count(calib_scores, observed) as f64 / calib_scores.len() as f64
}

/// A reference set with pre-scored calibration draws, ready to test any
/// number of observations.
#[derive(Debug)]
pub struct PriorTest {
    scorer: Scorer,
    specs: Vec<ScoreSpec>,
    // calib_scores[s][j]
    calib_scores: Vec<Vec<f64>>,
}

impl PriorTest {
    pub fn new(
        reference: &ReferenceTable,
        calibration: &ReferenceTable,
        specs: &[ScoreSpec],
        scaling: Scaling,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Spec("at least one score is required".into()));
        }
        if reference.n_stats() != calibration.n_stats() {
            return Err(Error::Dimension {
                expected: reference.n_stats(),
                found: calibration.n_stats(),
            });
        }
        let scorer = Scorer::for_specs(reference, specs, scaling)?;
        let points: Vec<&[f64]> = calibration.summaries().collect();
        let calib_scores = scorer.score_batch_multi(&points, specs)?;
        Ok(PriorTest {
            scorer,
            specs: specs.to_vec(),
            calib_scores,
        })
    }

    pub fn specs(&self) -> &[ScoreSpec] {
        &self.specs
    }

    pub fn n_ref(&self) -> usize {
        self.scorer.n_ref()
    }

    pub fn n_calib(&self) -> usize {
        self.calib_scores[0].len()
    }

    pub fn calibration_scores(&self, spec_index: usize) -> &[f64] {
        &self.calib_scores[spec_index]
    }

    /// Observed score of `y_obs` for every configured score.
    pub fn observed_scores(&self, y_obs: &[f64]) -> Result<Vec<f64>> {
        self.scorer.scores(Query::Point(y_obs), &self.specs)
    }

    /// Exceedance counts of `y_obs`, one per configured score.
    pub fn counts(&self, y_obs: &[f64]) -> Result<Vec<usize>> {
        let observed = self.observed_scores(y_obs)?;
        Ok(observed
            .iter()
            .zip(&self.calib_scores)
            .map(|(o, c)| exceedance_count(c, *o))
            .collect())
    }

    /// One report per configured score.
    pub fn reports(&self, y_obs: &[f64], seed: u64) -> Result<Vec<GofReport>> {
        let counts = self.counts(y_obs)?;
        Ok(self
            .specs
            .iter()
            .zip(counts)
            .map(|(spec, count)| {
                GofReport::new(TestKind::Prior, *spec, self.n_ref(), self.n_calib(), count, seed)
            })
            .collect())
    }
}

/// Prior goodness-of-fit p-value of `y_obs`: the fraction of calibration
/// draws whose score against `reference` strictly exceeds the observed
/// score.
pub fn prior_pvalue(
    y_obs: &[f64],
    reference: &ReferenceTable,
    calibration: &ReferenceTable,
    spec: &ScoreSpec,
) -> Result<GofReport> {
    let test = PriorTest::new(reference, calibration, &[*spec], Scaling::None)?;
    Ok(test.reports(y_obs, 0)?.remove(0))
}

/// Seed used to split the re-simulated table in
/// [`localized_prior_pvalue`].
pub fn localized_split_seed(seed: u64) -> u64 {
    SeedStream::new(seed).named("split").seed()
}

/// Localized prior test: the rows nearest `y_obs` are re-simulated from
/// their parameters, the new table is halved into reference and
/// calibration sets, and the prior p-value is computed against it.
pub fn localized_prior_pvalue(
    y_obs: &[f64],
    reference: &ReferenceTable,
    resim: &dyn Resimulator,
    n_post: usize,
    spec: &ScoreSpec,
    scaling: Scaling,
    seed: u64,
) -> Result<GofReport> {
    let localized = localize(reference, y_obs, n_post)?;
    let params: Vec<Vec<f64>> = localized.table.params().map(<[f64]>::to_vec).collect();
    let resimulated = resimulate(
        &localized.table,
        &params,
        resim,
        SeedStream::new(seed).named("resim").seed(),
    )?;
    let n_calib = n_post / 2;
    let (ref_half, calib_half) = split_calibration(
        &resimulated,
        SplitSpec {
            n_calib,
            seed: localized_split_seed(seed),
        },
    )?;
    let test = PriorTest::new(&ref_half, &calib_half, &[*spec], scaling)?;
    let mut report = test.reports(y_obs, seed)?.remove(0);
    report.test = TestKind::PriorLocal;
    report.seed = seed;
    report.n_post = Some(n_post);
    report.epsilon_implied = Some(localized.epsilon);
    report.n_ref_total = Some(reference.len());
    if n_post % 2 == 1 {
        report
            .warnings
            .push(format!("odd n_post = {n_post}; calibration half rounded down"));
    }
    Ok(report)
}
