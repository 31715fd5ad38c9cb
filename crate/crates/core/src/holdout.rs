//! Post-inference holdout goodness of fit.
//!
//! The observation is split by the caller into `y_obs` (used for
//! inference) and `y_new` (held out). The pipeline localizes the
//! reference table around `y_obs`, optionally adjusts the retained
//! parameters, re-simulates one dataset per particle, splits the
//! re-simulated table in two random halves (reference and calibration),
//! and counts how many calibration scores exceed the score of `y_new`.
//!
//! The steps are exposed separately ([`draw_posterior`],
//! [`evaluate_resimulated`]) so the re-simulation can run in an external
//! program between them.

use crate::data::{split_calibration, ReferenceTable, SeedStream, SplitSpec};
use crate::error::{Error, Result};
use crate::posterior::{localize, posterior_params, resimulate, PosteriorSpec, Resimulator};
use crate::prior_gof::{GofReport, PriorTest, TestKind};
use crate::scores::{Scaling, ScoreSpec};

/// Everything needed for one holdout evaluation.
#[derive(Debug, Clone)]
pub struct HoldoutInput<'a> {
    pub y_obs: &'a [f64],
    pub y_new: &'a [f64],
    pub reference: &'a ReferenceTable,
    pub posterior: PosteriorSpec,
    pub score_specs: Vec<ScoreSpec>,
    /// Rescaling of the re-simulated summaries before scoring.
    pub scaling: Scaling,
    pub seed: u64,
}

/// Approximate posterior sample before re-simulation.
#[derive(Debug, Clone)]
pub struct PosteriorDraw {
    /// Localized rows (original ids kept).
    pub localized: ReferenceTable,
    /// Parameters to re-simulate, aligned with `localized`.
    pub params: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub fallback: bool,
    pub warnings: Vec<String>,
}

/// Provenance copied into every report.
#[derive(Debug, Clone)]
pub struct HoldoutMeta {
    pub method: String,
    pub n_post: usize,
    pub epsilon: f64,
    pub n_ref_total: usize,
    pub scaling: Scaling,
    pub seed: u64,
    pub warnings: Vec<String>,
}

pub fn resim_seed(seed: u64) -> u64 {
    SeedStream::new(seed).named("resim").seed()
}

pub fn split_seed(seed: u64) -> u64 {
    SeedStream::new(seed).named("split").seed()
}

/// Localize around `y_obs` and compute the posterior parameters.
pub fn draw_posterior(reference: &ReferenceTable, y_obs: &[f64], spec: &PosteriorSpec) -> Result<PosteriorDraw> {
    spec.validate(reference.len())?;
    let localized = localize(reference, y_obs, spec.n_post)?;
    let adjusted = posterior_params(&localized.table, y_obs, &spec.method, spec.transform.as_ref())?;
    Ok(PosteriorDraw {
        localized: localized.table,
        params: adjusted.params,
        epsilon: localized.epsilon,
        fallback: adjusted.fallback,
        warnings: adjusted.warnings,
    })
}

/// Split a re-simulated posterior table in halves and compute one report
/// per score for the held-out point.
pub fn evaluate_resimulated(
    resimulated: &ReferenceTable,
    y_new: &[f64],
    score_specs: &[ScoreSpec],
    meta: &HoldoutMeta,
) -> Result<Vec<GofReport>> {
    if y_new.len() != resimulated.n_stats() {
        return Err(Error::Dimension {
            expected: resimulated.n_stats(),
            found: y_new.len(),
        });
    }
    let n_calib = resimulated.len() / 2;
    let (reference, calibration) = split_calibration(
        resimulated,
        SplitSpec {
            n_calib,
            seed: split_seed(meta.seed),
        },
    )?;
    let test = PriorTest::new(&reference, &calibration, score_specs, meta.scaling)?;
    let mut warnings = meta.warnings.clone();
    if resimulated.len() % 2 == 1 {
        warnings.push(format!(
            "odd n_post = {}; calibration half rounded down",
            resimulated.len()
        ));
    }
    let mut reports = test.reports(y_new, meta.seed)?;
    for r in &mut reports {
        r.test = TestKind::Holdout;
        r.method = Some(meta.method.clone());
        r.n_post = Some(meta.n_post);
        r.epsilon_implied = Some(meta.epsilon);
        r.n_ref_total = Some(meta.n_ref_total);
        r.warnings = warnings.clone();
    }
    Ok(reports)
}

/// Full holdout pipeline for several scores sharing one re-simulated
/// posterior table.
pub fn holdout_pvalues(input: &HoldoutInput<'_>, resim: &dyn Resimulator) -> Result<Vec<GofReport>> {
    if input.y_obs.len() != input.reference.n_stats() || input.y_new.len() != input.reference.n_stats() {
        return Err(Error::Dimension {
            expected: input.reference.n_stats(),
            found: if input.y_obs.len() != input.reference.n_stats() {
                input.y_obs.len()
            } else {
                input.y_new.len()
            },
        });
    }
    let draw = draw_posterior(input.reference, input.y_obs, &input.posterior)?;
    let resimulated = resimulate(&draw.localized, &draw.params, resim, resim_seed(input.seed))?;
    let meta = HoldoutMeta {
        method: input.posterior.method.name().to_string(),
        n_post: input.posterior.n_post,
        epsilon: draw.epsilon,
        n_ref_total: input.reference.len(),
        scaling: input.scaling,
        seed: input.seed,
        warnings: draw.warnings,
    };
    evaluate_resimulated(&resimulated, input.y_new, &input.score_specs, &meta)
}

/// Holdout p-value for the first configured score.
pub fn holdout_pvalue(input: &HoldoutInput<'_>, resim: &dyn Resimulator) -> Result<GofReport> {
    holdout_pvalues(input, resim)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Spec("no score configured".into()))
}
