use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{ReferenceTable, SeedStream};
use crate::error::{Error, Result};

/// Draws a fresh summary vector from the model at given parameters.
pub trait Resimulator: Sync {
    /// Length of the summary vectors produced.
    fn n_stats(&self) -> usize;

    fn simulate(&self, params: &[f64], rng: &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String>;
}

/// Test simulator returning the parameters as summaries.
#[derive(Debug, Clone, Copy)]
pub struct IdentityResimulator {
    pub dim: usize,
}

impl Resimulator for IdentityResimulator {
    fn n_stats(&self) -> usize {
        self.dim
    }

    fn simulate(&self, params: &[f64], _rng: &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String> {
        Ok(params.to_vec())
    }
}

/// Closure-backed simulator.
pub struct FnResimulator<F> {
    n_stats: usize,
    f: F,
}

impl<F> FnResimulator<F>
where
    F: Fn(&[f64], &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String> + Sync,
{
    pub fn new(n_stats: usize, f: F) -> Self {
        FnResimulator { n_stats, f }
    }
}

impl<F> Resimulator for FnResimulator<F>
where
    F: Fn(&[f64], &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String> + Sync,
{
    fn n_stats(&self) -> usize {
        self.n_stats
    }

    fn simulate(&self, params: &[f64], rng: &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String> {
        (self.f)(params, rng)
    }
}

/// Re-simulate one summary vector per parameter vector. Particle `i` is
/// drawn from child stream `i` of `seed`. The result keeps the columns and
/// ids of `source`, with `params` as its parameters.
pub fn resimulate(
    source: &ReferenceTable,
    params: &[Vec<f64>],
    resim: &dyn Resimulator,
    seed: u64,
) -> Result<ReferenceTable> {
    if params.len() != source.len() {
        return Err(Error::Size(format!(
            "{} parameter vectors for {} particles",
            params.len(),
            source.len()
        )));
    }
    if resim.n_stats() != source.n_stats() {
        return Err(Error::Dimension {
            expected: source.n_stats(),
            found: resim.n_stats(),
        });
    }
    let master = SeedStream::new(seed);
    let results: Vec<std::result::Result<Vec<f64>, String>> = params
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = master.child(i as u64).rng();
            let y = resim.simulate(p, &mut rng)?;
            if y.len() != resim.n_stats() {
                return Err(format!("produced {} statistics, expected {}", y.len(), resim.n_stats()));
            }
            if let Some(v) = y.iter().find(|v| !v.is_finite()) {
                return Err(format!("produced non-finite statistic {v}"));
            }
            Ok(y)
        })
        .collect();
    let mut summaries = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        summaries.push(r.map_err(|message| Error::Resimulation { index, message })?);
    }
    let particles = params
        .iter()
        .zip(summaries)
        .map(|(p, s)| crate::data::Particle::new(p.clone(), s))
        .collect();
    ReferenceTable::with_ids(
        source.param_names().to_vec(),
        source.stat_names().to_vec(),
        particles,
        source.ids().to_vec(),
    )
}

/// Write `id,param:...` rows for an external simulator.
pub fn export_params(
    path: impl AsRef<Path>,
    ids: &[usize],
    params: &[Vec<f64>],
    param_names: &[String],
) -> Result<()> {
    let path = path.as_ref();
    if ids.len() != params.len() {
        return Err(Error::Size("ids and parameter rows differ in length".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["id".to_string()];
    header.extend(param_names.iter().map(|n| format!("param:{n}")));
    w.write_record(&header)?;
    for (id, p) in ids.iter().zip(params) {
        if p.len() != param_names.len() {
            return Err(Error::Dimension {
                expected: param_names.len(),
                found: p.len(),
            });
        }
        let mut rec = vec![id.to_string()];
        rec.extend(p.iter().map(|v| crate::data::format_float(*v)));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Read `id,stat:...` rows produced externally and align them with
/// `expected_ids`. Missing, unknown or duplicated ids are errors.
pub fn import_summaries(
    path: impl AsRef<Path>,
    expected_ids: &[usize],
    n_stats: usize,
) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let id_col = header
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| Error::Schema("summary file has no `id` column".into()))?;
    let stat_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("stat:"))
        .map(|(i, _)| i)
        .collect();
    if stat_cols.len() != n_stats {
        return Err(Error::Schema(format!(
            "summary file has {} `stat:` columns, expected {n_stats}",
            stat_cols.len()
        )));
    }
    let position: HashMap<usize, usize> = expected_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut out: Vec<Option<Vec<f64>>> = vec![None; expected_ids.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let id: usize = rec[id_col].parse().map_err(|_| Error::Validation {
            row,
            column: "id".into(),
            message: format!("bad id `{}`", &rec[id_col]),
        })?;
        let slot = *position
            .get(&id)
            .ok_or_else(|| Error::Schema(format!("unexpected particle id {id} at row {row}")))?;
        if out[slot].is_some() {
            return Err(Error::Schema(format!("duplicate particle id {id} at row {row}")));
        }
        let values = stat_cols
            .iter()
            .map(|&c| {
                rec[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Validation {
                        row,
                        column: header[c].clone(),
                        message: format!("invalid statistic `{}`", &rec[c]),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        out[slot] = Some(values);
    }
    out.into_iter()
        .zip(expected_ids)
        .map(|(v, id)| v.ok_or_else(|| Error::Schema(format!("no summaries for particle id {id}"))))
        .collect()
}
