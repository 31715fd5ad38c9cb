use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scores::ScoreSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Prior,
    PriorLocal,
    Holdout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    Asymptotic,
    BootstrapHdi,
}

mod score_label {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scores::ScoreSpec;

    pub fn serialize<S: Serializer>(spec: &ScoreSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(spec)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ScoreSpec, D::Error> {
        let label = String::deserialize(d)?;
        label.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of one goodness-of-fit test, with provenance.
///
/// The holdout fields (`method`, `n_post`, `epsilon_implied`,
/// `n_ref_total`) are `null` for prior tests; `n_post`, `epsilon_implied`
/// and `n_ref_total` are also filled by the localized prior test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub scenario: Option<String>,
    pub observation: Option<String>,
    pub test: TestKind,
    #[serde(with = "score_label")]
    pub score_spec: ScoreSpec,
    pub n_ref: usize,
    pub n_calib: usize,
    pub exceed_count: usize,
    pub p_hat: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ci_method: Option<CiMethod>,
    pub ci_level: Option<f64>,
    /// Set when the interval collapsed to a point (asymptotic CI at
    /// `p_hat` 0 or 1); a bootstrap interval is more informative there.
    pub ci_degenerate: bool,
    pub seed: u64,
    pub method: Option<String>,
    pub n_post: Option<usize>,
    pub epsilon_implied: Option<f64>,
    pub n_ref_total: Option<usize>,
    pub bh_adjusted: Option<f64>,
    pub warnings: Vec<String>,
}

impl GofReport {
    pub fn new(
        test: TestKind,
        score_spec: ScoreSpec,
        n_ref: usize,
        n_calib: usize,
        exceed_count: usize,
        seed: u64,
    ) -> Self {
        GofReport {
            scenario: None,
            observation: None,
            test,
            score_spec,
            n_ref,
            n_calib,
            exceed_count,
            p_hat: exceed_count as f64 / n_calib as f64,
            ci_low: None,
            ci_high: None,
            ci_method: None,
            ci_level: None,
            ci_degenerate: false,
            seed,
            method: None,
            n_post: None,
            epsilon_implied: None,
            n_ref_total: None,
            bh_adjusted: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_labels(mut self, scenario: Option<&str>, observation: Option<&str>) -> Self {
        self.scenario = scenario.map(str::to_string);
        self.observation = observation.map(str::to_string);
        self
    }

    /// Attach the plug-in asymptotic interval.
    pub fn attach_asymptotic_ci(&mut self, level: f64) -> Result<()> {
        let (lo, hi) = super::asymptotic_ci(self.p_hat, self.n_calib, level)?;
        self.ci_low = Some(lo);
        self.ci_high = Some(hi);
        self.ci_method = Some(CiMethod::Asymptotic);
        self.ci_level = Some(level);
        self.ci_degenerate = lo == hi;
        if self.ci_degenerate {
            self.warnings.push(
                "asymptotic interval is degenerate at this p-value; use the bootstrap".into(),
            );
        }
        Ok(())
    }

    /// Attach a bootstrap interval; `p_hat` becomes the bootstrap median.
    pub fn attach_bootstrap(&mut self, summary: &super::BootstrapSummary, level: f64) {
        self.p_hat = summary.median;
        self.ci_low = Some(summary.hdi_low);
        self.ci_high = Some(summary.hdi_high);
        self.ci_method = Some(CiMethod::BootstrapHdi);
        self.ci_level = Some(level);
        self.ci_degenerate = summary.hdi_low == summary.hdi_high;
    }
}

const CSV_HEADER: [&str; 21] = [
    "scenario",
    "observation",
    "test",
    "score_spec",
    "n_ref",
    "n_calib",
    "exceed_count",
    "p_hat",
    "ci_low",
    "ci_high",
    "ci_method",
    "ci_level",
    "ci_degenerate",
    "seed",
    "method",
    "n_post",
    "epsilon_implied",
    "n_ref_total",
    "bh_adjusted",
    "warnings",
    "schema_version",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn enum_label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

/// JSON array of reports.
pub fn write_reports_json(path: impl AsRef<Path>, reports: &[GofReport]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, reports)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_reports_json(path: impl AsRef<Path>) -> Result<Vec<GofReport>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Tidy CSV mirror of the JSON reports, one row per report.
pub fn write_reports_csv(path: impl AsRef<Path>, reports: &[GofReport]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            opt(&r.scenario),
            opt(&r.observation),
            enum_label(&r.test),
            r.score_spec.to_string(),
            r.n_ref.to_string(),
            r.n_calib.to_string(),
            r.exceed_count.to_string(),
            r.p_hat.to_string(),
            opt(&r.ci_low),
            opt(&r.ci_high),
            r.ci_method.map(|m| enum_label(&m)).unwrap_or_default(),
            opt(&r.ci_level),
            r.ci_degenerate.to_string(),
            r.seed.to_string(),
            opt(&r.method),
            opt(&r.n_post),
            opt(&r.epsilon_implied),
            opt(&r.n_ref_total),
            opt(&r.bh_adjusted),
            r.warnings.join("; "),
            "1".to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
