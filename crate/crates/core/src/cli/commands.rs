use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::data::{
    load_observations, load_reference_table, write_reference_table, ColumnSchema, Particle, ReferenceTable,
    SeedStream, SplitSpec,
};
use crate::error::{Error, Result};
use crate::harness::{
    calibration_check, estimate_power_holdout, estimate_power_prior, k_sweep_specs, simulate_toy,
    write_calibration_csv, write_ecdf_csv, write_power_csv, CalibrationTest, ExperimentSpec, Family,
    ModelSource, PairSource, ToyModelSpec,
};
use crate::holdout::{draw_posterior, evaluate_resimulated, resim_seed, HoldoutMeta};
use crate::posterior::{
    export_params, import_summaries, resimulate, AdjustMethod, PosteriorSpec, TransformSpec, DEFAULT_LAMBDAS,
};
use crate::prior_gof::{
    apply_bh, bootstrap_pvalues, read_reports_json, write_reports_csv, write_reports_json, GofReport, PriorTest,
    TestKind,
};
use crate::scores::{Scaling, ScoreSpec};

use super::args::*;
use super::config::{merge, to_config_value};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_N_BOOT: usize = 500;
const DEFAULT_LEVEL: f64 = 0.95;
const DEFAULT_N_POST: usize = 1000;

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Spec(format!("missing required option --{flag}")))
}

/// Resolve shared run options in place and configure the thread pool.
fn start(run: &mut RunArgs) -> Result<PathBuf> {
    run.seed.get_or_insert(DEFAULT_SEED);
    if let Some(w) = run.workers {
        if w == 0 {
            return Err(Error::Spec("--workers must be at least 1".into()));
        }
        // fails only if the pool is already set up, e.g. in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let out = required(run.out.clone(), "out")?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

fn write_config<T: serde::Serialize>(out: &Path, resolved: &T, command: &str) -> Result<()> {
    let path = out.join("config.json");
    let mut text = serde_json::to_string_pretty(&to_config_value(resolved, command)?)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn write_reports(out: &Path, reports: &[GofReport]) -> Result<()> {
    write_reports_json(out.join("reports.json"), reports)?;
    write_reports_csv(out.join("reports.csv"), reports)
}

/// Parse the requested scores and rewrite them as full labels so the
/// saved config does not depend on `--k` and friends.
fn resolve_scores(a: &mut ScoreArgs, default: &[ScoreSpec]) -> Result<Vec<ScoreSpec>> {
    let mut specs = Vec::new();
    for name in &a.score {
        let spec = match name.trim() {
            "knn" => ScoreSpec::Knn { k: a.k.unwrap_or(1) },
            "lof" => ScoreSpec::Lof { k: a.k.unwrap_or(20) },
            "maxlof" => ScoreSpec::MaxLof {
                k_min: a.k_min.unwrap_or(5),
                k_max: a.k_max.unwrap_or(20),
            },
            label if label.contains('[') => label.parse()?,
            other => {
                return Err(Error::Spec(format!(
                    "unknown score `{other}` (expected knn, lof, maxlof or a label like knn[3])"
                )))
            }
        };
        spec.validate()?;
        if !specs.contains(&spec) {
            specs.push(spec);
        }
    }
    if specs.is_empty() {
        specs = default.to_vec();
    }
    a.score = specs.iter().map(ToString::to_string).collect();
    a.k = None;
    a.k_min = None;
    a.k_max = None;
    Ok(specs)
}

fn scaling(a: &ScoreArgs) -> Scaling {
    if a.standardize {
        Scaling::Standardize
    } else {
        Scaling::None
    }
}

fn load_schema(path: &Option<PathBuf>) -> Result<ColumnSchema> {
    match path {
        Some(p) => ColumnSchema::from_json_file(p),
        None => Ok(ColumnSchema::prefixed()),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_scenarios(entries: &[String], schema: &ColumnSchema) -> Result<Vec<(String, ReferenceTable)>> {
    if entries.is_empty() {
        return Err(Error::Spec("missing required option --reference".into()));
    }
    let mut out: Vec<(String, ReferenceTable)> = Vec::new();
    for entry in entries {
        let (name, path) = match entry.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => (stem(Path::new(entry)), PathBuf::from(entry)),
        };
        if out.iter().any(|(n, _)| *n == name) {
            return Err(Error::Spec(format!("scenario name `{name}` given twice; use NAME=PATH")));
        }
        let table = load_reference_table(&path, schema)?;
        out.push((name, table));
    }
    Ok(out)
}

fn load_labeled(path: &Path, schema: &ColumnSchema, stat_names: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    let rows = load_observations(path, schema, stat_names)?;
    let base = stem(path);
    let single = rows.len() == 1;
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, y)| {
            let label = if single { base.clone() } else { format!("{base}[{}]", i + 1) };
            (label, y)
        })
        .collect())
}

fn resolve_ci(a: &mut CiArgs) -> Result<(CiKind, usize, f64)> {
    let ci = *a.ci.get_or_insert(CiKind::Asymptotic);
    let n_boot = *a.n_boot.get_or_insert(DEFAULT_N_BOOT);
    let level = *a.level.get_or_insert(DEFAULT_LEVEL);
    if n_boot == 0 {
        return Err(Error::Spec("--n-boot must be at least 1".into()));
    }
    Ok((ci, n_boot, level))
}

/// Interval for one report whose calibration rows came from `pool`.
#[allow(clippy::too_many_arguments)]
fn attach_ci(
    report: &mut GofReport,
    ci: (CiKind, usize, f64),
    pool: &ReferenceTable,
    y: &[f64],
    scaling: Scaling,
    seed: u64,
) -> Result<()> {
    let (kind, n_boot, level) = ci;
    match kind {
        CiKind::Asymptotic => report.attach_asymptotic_ci(level),
        CiKind::Bootstrap => {
            let summary = bootstrap_pvalues(y, pool, report.n_calib, &report.score_spec, scaling, n_boot, seed, level)?;
            report.attach_bootstrap(&summary, level);
            Ok(())
        }
    }
}

/// Benjamini-Hochberg across scenarios, separately for every other
/// combination of observation, score and test configuration.
fn bh_by_group(reports: &mut [GofReport]) -> Result<()> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in reports.iter().enumerate() {
        let key = format!(
            "{:?}|{}|{:?}|{:?}|{:?}|{}",
            r.observation,
            r.score_spec,
            r.test,
            r.method,
            r.n_post,
            r.n_ref + r.n_calib
        );
        groups.entry(key).or_default().push(i);
    }
    for rows in groups.values() {
        let mut family: Vec<GofReport> = rows.iter().map(|&i| reports[i].clone()).collect();
        apply_bh(&mut family)?;
        for (&i, r) in rows.iter().zip(family) {
            reports[i].bh_adjusted = r.bh_adjusted;
        }
    }
    Ok(())
}

pub fn prior(mut a: PriorArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "prior")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let specs = resolve_scores(&mut a.score, &[ScoreSpec::DEFAULT_MAX_LOF])?;
    let scaling = scaling(&a.score);
    let ci = resolve_ci(&mut a.ci)?;
    let schema = load_schema(&a.table.schema)?;
    let observed = required(a.observed.clone(), "observed")?;
    if !a.budget.is_empty() && a.n_calib.is_some() {
        return Err(Error::Spec("--budget splits evenly; do not combine it with --n-calib".into()));
    }
    let scenarios = load_scenarios(&a.table.reference, &schema)?;
    let stream = SeedStream::new(seed);
    let mut reports = Vec::new();
    for (s, (name, table)) in scenarios.iter().enumerate() {
        let observations = load_labeled(&observed, &schema, table.stat_names())?;
        // (rows used, calibration rows)
        let cells: Vec<(usize, usize)> = if a.budget.is_empty() {
            vec![(table.len(), a.n_calib.unwrap_or(table.len() / 2))]
        } else {
            a.budget.iter().map(|&b| (b, b / 2)).collect()
        };
        for (b, &(rows, n_calib)) in cells.iter().enumerate() {
            if rows > table.len() {
                return Err(Error::Size(format!(
                    "budget {rows} exceeds the {} rows of scenario `{name}`",
                    table.len()
                )));
            }
            let pool = if rows == table.len() {
                table.clone()
            } else {
                table.select(&(0..rows).collect::<Vec<_>>())?
            };
            let cell = stream.named("scenario").child(s as u64).child(b as u64);
            let (reference, calibration) = crate::data::split_calibration(
                &pool,
                SplitSpec {
                    n_calib,
                    seed: cell.named("split").seed(),
                },
            )?;
            let test = PriorTest::new(&reference, &calibration, &specs, scaling)?;
            for (o, (label, y)) in observations.iter().enumerate() {
                for mut r in test.reports(y, seed)? {
                    let boot_seed = cell.named("bootstrap").child(o as u64).seed();
                    attach_ci(&mut r, ci, &pool, y, scaling, boot_seed)?;
                    reports.push(r.with_labels(Some(name), Some(label)));
                }
            }
        }
    }
    if a.bh {
        bh_by_group(&mut reports)?;
    }
    write_config(&out, &a, "prior")?;
    write_reports(&out, &reports)
}

enum ResimMode {
    Builtin(ToyModelSpec),
    Export,
    Import(PathBuf),
}

fn resim_mode(a: &ResimArgs, n_stats: usize) -> Result<ResimMode> {
    let chosen = [a.resimulator.is_some(), a.export_params, a.import_summaries.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if chosen != 1 {
        return Err(Error::Spec(
            "choose exactly one of --resimulator, --export-params, --import-summaries".into(),
        ));
    }
    if let Some(kind) = a.resimulator {
        let family = match kind {
            ResimKind::ToyLaplace => Family::Laplace,
            ResimKind::ToyGaussian => Family::Gaussian,
        };
        let model = ToyModelSpec {
            m: n_stats,
            ..ToyModelSpec::new(family)
        };
        model.validate()?;
        return Ok(ResimMode::Builtin(model));
    }
    Ok(match &a.import_summaries {
        Some(dir) => ResimMode::Import(dir.clone()),
        None => ResimMode::Export,
    })
}

fn file_tag(parts: &[&str]) -> String {
    parts
        .join("_")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '_' { c } else { '-' })
        .collect()
}

/// One posterior-based evaluation: localize around `y_obs`, adjust,
/// re-simulate (or export/import), and score `y_new`. Returns `None`
/// after exporting parameters.
struct PosteriorCell<'a> {
    table: &'a ReferenceTable,
    y_obs: &'a [f64],
    y_new: &'a [f64],
    posterior: PosteriorSpec,
    tag: String,
    seed: u64,
}

fn run_cell(
    cell: &PosteriorCell<'_>,
    specs: &[ScoreSpec],
    scaling: Scaling,
    ci: (CiKind, usize, f64),
    mode: &ResimMode,
    out: &Path,
) -> Result<Option<Vec<GofReport>>> {
    let draw = draw_posterior(cell.table, cell.y_obs, &cell.posterior)?;
    let resimulated = match mode {
        ResimMode::Builtin(model) => resimulate(&draw.localized, &draw.params, model, resim_seed(cell.seed))?,
        ResimMode::Export => {
            let path = out.join(format!("params_{}.csv", cell.tag));
            export_params(&path, draw.localized.ids(), &draw.params, cell.table.param_names())?;
            return Ok(None);
        }
        ResimMode::Import(dir) => {
            let path = dir.join(format!("summaries_{}.csv", cell.tag));
            let summaries = import_summaries(&path, draw.localized.ids(), cell.table.n_stats())?;
            let particles = draw
                .params
                .iter()
                .zip(summaries)
                .map(|(p, s)| Particle::new(p.clone(), s))
                .collect();
            ReferenceTable::with_ids(
                cell.table.param_names().to_vec(),
                cell.table.stat_names().to_vec(),
                particles,
                draw.localized.ids().to_vec(),
            )?
        }
    };
    let meta = HoldoutMeta {
        method: cell.posterior.method.name().to_string(),
        n_post: cell.posterior.n_post,
        epsilon: draw.epsilon,
        n_ref_total: cell.table.len(),
        scaling,
        seed: cell.seed,
        warnings: draw.warnings,
    };
    let mut reports = evaluate_resimulated(&resimulated, cell.y_new, specs, &meta)?;
    let boot_seed = SeedStream::new(cell.seed).named("bootstrap").seed();
    for r in &mut reports {
        attach_ci(r, ci, &resimulated, cell.y_new, scaling, boot_seed)?;
    }
    Ok(Some(reports))
}

fn finish_cells(out: &Path, reports: Vec<Option<Vec<GofReport>>>, mode: &ResimMode) -> Result<Option<Vec<GofReport>>> {
    if let ResimMode::Export = mode {
        eprintln!(
            "wrote {} parameter files to {}; simulate each params_<tag>.csv into summaries_<tag>.csv \
             (columns id, stat:...) and rerun with --import-summaries",
            reports.len(),
            out.display()
        );
        return Ok(None);
    }
    Ok(Some(reports.into_iter().flatten().flatten().collect()))
}

pub fn prior_local(mut a: PriorLocalArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "prior-local")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let specs = resolve_scores(&mut a.score, &[ScoreSpec::DEFAULT_MAX_LOF])?;
    let scaling = scaling(&a.score);
    let ci = resolve_ci(&mut a.ci)?;
    if a.n_post.is_empty() {
        a.n_post.push(DEFAULT_N_POST);
    }
    let schema = load_schema(&a.table.schema)?;
    let observed = required(a.observed.clone(), "observed")?;
    let scenarios = load_scenarios(&a.table.reference, &schema)?;
    let stream = SeedStream::new(seed);
    let mut cells = Vec::new();
    let mut mode = None;
    for (s, (name, table)) in scenarios.iter().enumerate() {
        let m = resim_mode(&a.resim, table.n_stats())?;
        for (o, (label, y)) in load_labeled(&observed, &schema, table.stat_names())?.iter().enumerate() {
            for &n_post in &a.n_post {
                let cell = PosteriorCell {
                    table,
                    y_obs: y,
                    y_new: y,
                    posterior: PosteriorSpec::rejection(n_post),
                    tag: file_tag(&[name, label, "local", &n_post.to_string()]),
                    seed: stream.named("local").child(s as u64).child(o as u64).seed(),
                };
                let reports = run_cell(&cell, &specs, scaling, ci, &m, &out)?.map(|rs| {
                    rs.into_iter()
                        .map(|mut r| {
                            r.test = TestKind::PriorLocal;
                            r.method = None;
                            r.with_labels(Some(name), Some(label))
                        })
                        .collect()
                });
                cells.push(reports);
            }
        }
        mode = Some(m);
    }
    write_config(&out, &a, "prior-local")?;
    if let Some(reports) = finish_cells(&out, cells, mode.as_ref().unwrap_or(&ResimMode::Export))? {
        write_reports(&out, &reports)?;
    }
    Ok(())
}

fn adjust_method(kind: MethodKind, lambdas: &[f64]) -> AdjustMethod {
    match kind {
        MethodKind::Rejection => AdjustMethod::Rejection,
        MethodKind::Loclin => AdjustMethod::LocLinear,
        MethodKind::Ridge => AdjustMethod::Ridge {
            lambdas: lambdas.to_vec(),
        },
    }
}

pub fn holdout(mut a: HoldoutArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "holdout")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let specs = resolve_scores(&mut a.score, &[ScoreSpec::DEFAULT_MAX_LOF])?;
    let scaling = scaling(&a.score);
    let ci = resolve_ci(&mut a.ci)?;
    if a.n_post.is_empty() {
        a.n_post.push(DEFAULT_N_POST);
    }
    if a.method.is_empty() {
        a.method.push(MethodKind::Rejection);
    }
    if a.lambda.is_empty() && a.method.contains(&MethodKind::Ridge) {
        a.lambda = DEFAULT_LAMBDAS.to_vec();
    }
    let transform = a.transform.as_ref().map(TransformSpec::from_json_file).transpose()?;
    let schema = load_schema(&a.table.schema)?;
    let observed = required(a.observed.clone(), "observed")?;
    let new = required(a.new.clone(), "new")?;
    let scenarios = load_scenarios(&a.table.reference, &schema)?;
    let stream = SeedStream::new(seed);
    let mut cells = Vec::new();
    let mut mode = None;
    for (s, (name, table)) in scenarios.iter().enumerate() {
        let m = resim_mode(&a.resim, table.n_stats())?;
        let obs = load_labeled(&observed, &schema, table.stat_names())?;
        let held = load_labeled(&new, &schema, table.stat_names())?;
        if obs.len() != held.len() {
            return Err(Error::Spec(format!(
                "--observed has {} rows but --new has {}",
                obs.len(),
                held.len()
            )));
        }
        let mut pairs = Vec::new();
        for ((lo, yo), (ln, yn)) in obs.iter().zip(&held) {
            pairs.push((format!("{lo}->{ln}"), yo, yn));
            if a.symmetric {
                pairs.push((format!("{ln}->{lo}"), yn, yo));
            }
        }
        for (p, (label, y_obs, y_new)) in pairs.iter().enumerate() {
            for &kind in &a.method {
                for &n_post in &a.n_post {
                    let posterior = PosteriorSpec {
                        n_post,
                        method: adjust_method(kind, &a.lambda),
                        transform: transform.clone(),
                    };
                    let cell = PosteriorCell {
                        table,
                        y_obs,
                        y_new,
                        tag: file_tag(&[name, label, posterior.method.name(), &n_post.to_string()]),
                        posterior,
                        seed: stream.named("holdout").child(s as u64).child(p as u64).seed(),
                    };
                    let reports = run_cell(&cell, &specs, scaling, ci, &m, &out)?.map(|rs| {
                        rs.into_iter()
                            .map(|r| r.with_labels(Some(name), Some(label)))
                            .collect()
                    });
                    cells.push(reports);
                }
            }
        }
        mode = Some(m);
    }
    write_config(&out, &a, "holdout")?;
    if let Some(mut reports) = finish_cells(&out, cells, mode.as_ref().unwrap_or(&ResimMode::Export))? {
        if a.bh {
            bh_by_group(&mut reports)?;
        }
        write_reports(&out, &reports)?;
    }
    Ok(())
}

fn toy(name: &str, study: &StudyArgs) -> Result<Option<ToyModelSpec>> {
    let family = match name {
        "toy-laplace" => Family::Laplace,
        "toy-gaussian" => Family::Gaussian,
        other if other.starts_with("toy-") => {
            return Err(Error::Spec(format!(
                "unknown built-in model `{other}` (expected toy-laplace or toy-gaussian)"
            )))
        }
        _ => return Ok(None),
    };
    let model = ToyModelSpec {
        d: study.d.unwrap_or(350),
        m: study.m.unwrap_or(20),
        ..ToyModelSpec::new(family)
    };
    model.validate()?;
    Ok(Some(model))
}

fn model_source(name: &str, study: &StudyArgs, schema: &ColumnSchema) -> Result<ModelSource> {
    Ok(match toy(name, study)? {
        Some(model) => ModelSource::Toy(model),
        None => {
            let path = Path::new(name);
            ModelSource::Table {
                name: stem(path),
                table: load_reference_table(path, schema)?,
            }
        }
    })
}

/// Scores from `--score` plus any `--k-sweep`.
fn study_scores(score: &mut ScoreArgs, study: &StudyArgs) -> Result<Vec<ScoreSpec>> {
    let defaults = [ScoreSpec::DEFAULT_MAX_LOF, ScoreSpec::DEFAULT_KNN];
    let mut specs = if score.score.is_empty() && !study.k_sweep.is_empty() {
        resolve_scores(score, &[])?
    } else {
        resolve_scores(score, &defaults)?
    };
    for spec in k_sweep_specs(study.k_sweep.iter().copied()) {
        if !specs.contains(&spec) {
            specs.push(spec);
        }
    }
    if specs.is_empty() {
        return Err(Error::Spec("no score given".into()));
    }
    Ok(specs)
}

fn experiment(study: &mut StudyArgs, specs: Vec<ScoreSpec>, scaling: Scaling, seed: u64, budgets: &[usize]) -> ExperimentSpec {
    if study.budget.is_empty() {
        study.budget = budgets.to_vec();
    }
    ExperimentSpec {
        budgets: study.budget.clone(),
        n_test: *study.n_test.get_or_insert(1000),
        alpha: *study.alpha.get_or_insert(0.05),
        score_specs: specs,
        scaling,
        seed,
    }
}

fn study_posterior(study: &mut StudyArgs) -> PosteriorSpec {
    let kind = *study.method.get_or_insert(MethodKind::Rejection);
    if kind == MethodKind::Ridge && study.lambda.is_empty() {
        study.lambda = DEFAULT_LAMBDAS.to_vec();
    }
    PosteriorSpec {
        n_post: *study.n_post.get_or_insert(DEFAULT_N_POST),
        method: adjust_method(kind, &study.lambda),
        transform: None,
    }
}

pub fn power(mut a: PowerArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "power")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let specs = study_scores(&mut a.score, &a.study)?;
    let scaling = scaling(&a.score);
    let schema = load_schema(&a.schema)?;
    let null_name = a.null.get_or_insert_with(|| "toy-laplace".into()).clone();
    let alt_name = a.alt.get_or_insert_with(|| "toy-gaussian".into()).clone();
    let test = *a.test.get_or_insert(PowerTest::Prior);
    let null = model_source(&null_name, &a.study, &schema)?;
    let rows = match test {
        PowerTest::Prior => {
            let exp = experiment(&mut a.study, specs, scaling, seed, &[500, 1000, 2000, 5000]);
            let alt = model_source(&alt_name, &a.study, &schema)?;
            estimate_power_prior(&null, &alt, &exp)?
        }
        PowerTest::Holdout => {
            let ModelSource::Toy(resim) = &null else {
                return Err(Error::Spec("the holdout power study needs a built-in null model".into()));
            };
            let pairs = match toy(&alt_name, &a.study)? {
                Some(model) => PairSource::Toy(model),
                None => {
                    let new = required(a.alt_new.clone(), "alt-new")?;
                    PairSource::Tables {
                        name: stem(Path::new(&alt_name)),
                        obs: load_reference_table(&alt_name, &schema)?,
                        new: load_reference_table(&new, &schema)?,
                    }
                }
            };
            let posterior = study_posterior(&mut a.study);
            let exp = experiment(&mut a.study, specs, scaling, seed, &[50_000]);
            estimate_power_holdout(&null, resim, &pairs, &posterior, &exp)?
        }
    };
    write_config(&out, &a, "power")?;
    write_power_csv(out.join("power.csv"), &rows)
}

pub fn calibration(mut a: CalibrationArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "calibration")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let specs = study_scores(&mut a.score, &a.study)?;
    let scaling = scaling(&a.score);
    let null_name = a.null.get_or_insert_with(|| "toy-laplace".into()).clone();
    let model = toy(&null_name, &a.study)?
        .ok_or_else(|| Error::Spec("calibration needs a built-in null model (toy-laplace or toy-gaussian)".into()))?;
    let kind = *a.test.get_or_insert(CalibrationKind::Prior);
    let (test, budgets): (CalibrationTest, &[usize]) = match kind {
        CalibrationKind::Prior => (CalibrationTest::Prior, &[2000]),
        CalibrationKind::PriorFresh => (CalibrationTest::PriorFresh, &[2000]),
        CalibrationKind::Holdout => (CalibrationTest::Holdout(study_posterior(&mut a.study)), &[50_000]),
    };
    let exp = experiment(&mut a.study, specs, scaling, seed, budgets);
    let results = calibration_check(&model, &exp, &test)?;
    write_config(&out, &a, "calibration")?;
    write_calibration_csv(out.join("calibration.csv"), &results)?;
    write_ecdf_csv(out.join("ecdf.csv"), &results)
}

pub fn bh(mut a: BhArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "bh")?;
    let out = start(&mut a.run)?;
    if a.reports.is_empty() {
        return Err(Error::Spec("missing required option --reports".into()));
    }
    let mut reports = Vec::new();
    for path in &a.reports {
        reports.extend(read_reports_json(path)?);
    }
    bh_by_group(&mut reports)?;
    write_config(&out, &a, "bh")?;
    write_reports(&out, &reports)
}

pub fn simulate(mut a: SimulateArgs) -> Result<()> {
    a = merge(&a, a.run.config.as_deref(), "simulate")?;
    let out = start(&mut a.run)?;
    let seed = a.run.seed.unwrap_or(DEFAULT_SEED);
    let name = a.model.get_or_insert_with(|| "toy-laplace".into()).clone();
    let study = StudyArgs {
        d: Some(*a.d.get_or_insert(350)),
        m: Some(*a.m.get_or_insert(20)),
        ..StudyArgs::default()
    };
    let model = toy(&name, &study)?.ok_or_else(|| Error::Spec(format!("`{name}` is not a built-in model")))?;
    let n = required(a.n, "n")?;
    let table = simulate_toy(&model, n, seed)?;
    write_config(&out, &a, "simulate")?;
    write_reference_table(out.join("reftable.csv"), &table, false)
}
