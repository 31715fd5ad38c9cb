//! Outlier scores of a point relative to a reference table: mean kNN
//! distance, local reachable density, LOF and max-LOF.
//!
//! Neighborhoods always hold exactly `k` points, ties broken by row id.
//! A point that is itself a reference row is excluded from its own
//! neighborhood ([`Query::Row`]); external points are scored against all
//! rows ([`Query::Point`]).

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ReferenceTable;
use crate::error::{Error, Result};
use crate::neighbors::{Neighbor, NeighborIndex};

/// Which outlier score to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScoreSpec {
    Knn { k: usize },
    Lof { k: usize },
    MaxLof { k_min: usize, k_max: usize },
}

impl ScoreSpec {
    pub const DEFAULT_KNN: ScoreSpec = ScoreSpec::Knn { k: 1 };
    pub const DEFAULT_MAX_LOF: ScoreSpec = ScoreSpec::MaxLof { k_min: 5, k_max: 20 };

    /// Largest neighborhood size the score needs.
    pub fn max_k(&self) -> usize {
        match *self {
            ScoreSpec::Knn { k } | ScoreSpec::Lof { k } => k,
            ScoreSpec::MaxLof { k_max, .. } => k_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScoreSpec::Knn { k } | ScoreSpec::Lof { k } if k == 0 => {
                Err(Error::Spec("k must be at least 1".into()))
            }
            ScoreSpec::MaxLof { k_min, k_max } if k_min == 0 || k_min > k_max => Err(Error::Spec(
                format!("empty or invalid k range [{k_min}, {k_max}]"),
            )),
            _ => Ok(()),
        }
    }

    /// Valid for a reference set of `n_ref` rows.
    pub fn validate_for(&self, n_ref: usize) -> Result<()> {
        self.validate()?;
        if self.max_k() >= n_ref {
            return Err(Error::Size(format!(
                "score {self} needs more than {} reference rows, got {n_ref}",
                self.max_k()
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoreSpec::Knn { .. } => "knn",
            ScoreSpec::Lof { .. } => "lof",
            ScoreSpec::MaxLof { .. } => "maxlof",
        }
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreSpec::Knn { k } => write!(f, "knn[{k}]"),
            ScoreSpec::Lof { k } => write!(f, "lof[{k}]"),
            ScoreSpec::MaxLof { k_min, k_max } => write!(f, "maxlof[{k_min},{k_max}]"),
        }
    }
}

impl std::str::FromStr for ScoreSpec {
    type Err = Error;

    /// Parses the display form: `knn[1]`, `lof[10]`, `maxlof[5,20]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Spec(format!("cannot parse score `{s}`"));
        let (name, rest) = s.trim().split_once('[').ok_or_else(bad)?;
        let args = rest.strip_suffix(']').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match (name, nums.as_slice()) {
            ("knn", [k]) => ScoreSpec::Knn { k: *k },
            ("lof", [k]) => ScoreSpec::Lof { k: *k },
            ("maxlof", [lo, hi]) => ScoreSpec::MaxLof { k_min: *lo, k_max: *hi },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A point to score.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    /// A point outside the reference set.
    Point(&'a [f64]),
    /// Reference row `i`, excluded from its own neighborhood.
    Row(usize),
}

/// Summary rescaling applied before distances are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Raw summaries.
    #[default]
    None,
    /// Center and divide by the reference-table standard deviation.
    Standardize,
}

/// Reference set prepared for repeated scoring.
///
/// Neighbor lists, k-distances and local reachable densities of every
/// reference row are computed once for all `k <= k_max`, on first use,
/// and shared by all queries. Pure kNN scoring of outside points never
/// needs them.
#[derive(Debug)]
pub struct Scorer {
    index: NeighborIndex,
    k_max: usize,
    density: OnceLock<Density>,
    center: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug)]
struct Density {
    // k_max self-excluded neighbors per reference row
    neighbors: Vec<Vec<Neighbor>>,
    // lrd[k - 1][row]
    lrd: Vec<Vec<f64>>,
}

impl Density {
    fn new(index: &NeighborIndex, k_max: usize) -> Density {
        let neighbors: Vec<Vec<Neighbor>> = (0..index.len())
            .into_par_iter()
            .map(|i| index.knn(index.point(i), k_max, Some(i)).expect("valid reference query"))
            .collect();
        let lrd = (1..=k_max)
            .map(|k| {
                neighbors
                    .iter()
                    .map(|nn| {
                        let reach = mean(
                            nn[..k]
                                .iter()
                                .map(|n| n.distance.max(neighbors[n.id][k - 1].distance)),
                            k,
                        );
                        1.0 / reach
                    })
                    .collect()
            })
            .collect();
        Density { neighbors, lrd }
    }
}

// Exact when all values are equal, so equal densities give LOF = 1.
fn mean(values: impl Iterator<Item = f64>, k: usize) -> f64 {
    let mut first = None;
    let mut same = true;
    let mut sum = 0.0;
    for v in values {
        same &= *first.get_or_insert(v) == v;
        sum += v;
    }
    match first {
        Some(v) if same => v,
        _ => sum / k as f64,
    }
}

/// LOF ratio with the conventions for infinite densities.
fn lof_ratio(mean_neighbor_lrd: f64, own_lrd: f64) -> f64 {
    if own_lrd.is_infinite() {
        if mean_neighbor_lrd.is_infinite() {
            1.0
        } else {
            0.0
        }
    } else {
        mean_neighbor_lrd / own_lrd
    }
}

impl Scorer {
    pub fn new(reference: &ReferenceTable, k_max: usize) -> Result<Self> {
        Self::with_scaling(reference, k_max, Scaling::None)
    }

    pub fn for_specs(reference: &ReferenceTable, specs: &[ScoreSpec], scaling: Scaling) -> Result<Self> {
        let mut k_max = 1;
        for spec in specs {
            spec.validate_for(reference.len())?;
            k_max = k_max.max(spec.max_k());
        }
        Self::with_scaling(reference, k_max, scaling)
    }

    pub fn with_scaling(reference: &ReferenceTable, k_max: usize, scaling: Scaling) -> Result<Self> {
        let points: Vec<Vec<f64>> = reference.summaries().map(<[f64]>::to_vec).collect();
        let center = match scaling {
            Scaling::None => None,
            Scaling::Standardize => {
                let (mean, sd) = reference.summary_moments();
                let sd = sd.into_iter().map(|s| if s > 0.0 { s } else { 1.0 }).collect();
                Some((mean, sd))
            }
        };
        Self::from_points(&points, k_max, center)
    }

    fn from_points(points: &[Vec<f64>], k_max: usize, center: Option<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::Spec("k must be at least 1".into()));
        }
        if k_max >= points.len() {
            return Err(Error::Size(format!(
                "k = {k_max} requires more than {k_max} reference rows, got {}",
                points.len()
            )));
        }
        let points: Vec<Vec<f64>> = match &center {
            None => points.to_vec(),
            Some((mu, sd)) => points.iter().map(|p| rescale(p, mu, sd)).collect(),
        };
        let index = NeighborIndex::build(&points)?;
        Ok(Scorer {
            index,
            k_max,
            density: OnceLock::new(),
            center,
        })
    }

    fn density(&self) -> &Density {
        self.density.get_or_init(|| Density::new(&self.index, self.k_max))
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_ref(&self) -> usize {
        self.index.len()
    }

    /// The `k_max` nearest reference rows of the query.
    pub fn neighbors(&self, query: Query<'_>) -> Result<Vec<Neighbor>> {
        match query {
            Query::Row(i) => {
                if i >= self.n_ref() {
                    return Err(Error::Query(format!("row {i} out of range")));
                }
                Ok(self.density().neighbors[i].clone())
            }
            Query::Point(y) => match &self.center {
                None => self.index.knn(y, self.k_max, None),
                Some((mu, sd)) => self.index.knn(&rescale(y, mu, sd), self.k_max, None),
            },
        }
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k_max {
            return Err(Error::Size(format!(
                "k = {k} outside the prepared range 1..={}",
                self.k_max
            )));
        }
        Ok(())
    }

    /// k-distance of reference row `row`.
    pub fn k_dist(&self, row: usize, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.density().neighbors[row][k - 1].distance)
    }

    /// Mean distance to the `k` nearest reference rows.
    pub fn knn_score(&self, query: Query<'_>, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(knn_from(&self.neighbors(query)?, k))
    }

    /// Local reachable density; `+inf` when every reachability distance is 0.
    pub fn lrd(&self, query: Query<'_>, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.lrd_from(&self.neighbors(query)?, k))
    }

    pub fn lof(&self, query: Query<'_>, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.lof_from(&self.neighbors(query)?, k))
    }

    pub fn max_lof(&self, query: Query<'_>, k_min: usize, k_max: usize) -> Result<f64> {
        ScoreSpec::MaxLof { k_min, k_max }.validate()?;
        self.check_k(k_max)?;
        let nn = self.neighbors(query)?;
        Ok(self.max_lof_from(&nn, k_min, k_max))
    }

    fn lrd_from(&self, nn: &[Neighbor], k: usize) -> f64 {
        let reach = mean(
            nn[..k]
                .iter()
                .map(|n| n.distance.max(self.density().neighbors[n.id][k - 1].distance)),
            k,
        );
        1.0 / reach
    }

    fn lof_from(&self, nn: &[Neighbor], k: usize) -> f64 {
        let lrd_k = &self.density().lrd[k - 1];
        let neighbor_lrd = mean(nn[..k].iter().map(|n| lrd_k[n.id]), k);
        lof_ratio(neighbor_lrd, self.lrd_from(nn, k))
    }

    fn max_lof_from(&self, nn: &[Neighbor], k_min: usize, k_max: usize) -> f64 {
        (k_min..=k_max)
            .map(|k| self.lof_from(nn, k))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn score_from(&self, nn: &[Neighbor], spec: &ScoreSpec) -> f64 {
        match *spec {
            ScoreSpec::Knn { k } => knn_from(nn, k),
            ScoreSpec::Lof { k } => self.lof_from(nn, k),
            ScoreSpec::MaxLof { k_min, k_max } => self.max_lof_from(nn, k_min, k_max),
        }
    }

    fn check_spec(&self, spec: &ScoreSpec) -> Result<()> {
        spec.validate_for(self.n_ref())?;
        self.check_k(spec.max_k())
    }

    pub fn score(&self, query: Query<'_>, spec: &ScoreSpec) -> Result<f64> {
        self.check_spec(spec)?;
        Ok(self.score_from(&self.neighbors(query)?, spec))
    }

    /// Several scores of one query from a single neighbor search.
    pub fn scores(&self, query: Query<'_>, specs: &[ScoreSpec]) -> Result<Vec<f64>> {
        for spec in specs {
            self.check_spec(spec)?;
        }
        let nn = self.neighbors(query)?;
        Ok(specs.iter().map(|s| self.score_from(&nn, s)).collect())
    }

    /// Scores of many external points, in input order.
    pub fn score_batch<P: AsRef<[f64]> + Sync>(&self, points: &[P], spec: &ScoreSpec) -> Result<Vec<f64>> {
        self.check_spec(spec)?;
        points
            .par_iter()
            .map(|p| Ok(self.score_from(&self.neighbors(Query::Point(p.as_ref()))?, spec)))
            .collect()
    }

    /// `result[s][i]` is score `specs[s]` of point `i`.
    pub fn score_batch_multi<P: AsRef<[f64]> + Sync>(
        &self,
        points: &[P],
        specs: &[ScoreSpec],
    ) -> Result<Vec<Vec<f64>>> {
        for spec in specs {
            self.check_spec(spec)?;
        }
        let per_point: Vec<Vec<f64>> = points
            .par_iter()
            .map(|p| {
                let nn = self.neighbors(Query::Point(p.as_ref()))?;
                Ok(specs.iter().map(|s| self.score_from(&nn, s)).collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..specs.len())
            .map(|s| per_point.iter().map(|row| row[s]).collect())
            .collect())
    }

    #[cfg(test)]
    pub(crate) fn lrd_plain_distance(&self, query: Query<'_>, k: usize) -> Result<f64> {
        self.check_k(k)?;
        let nn = self.neighbors(query)?;
        Ok(1.0 / mean(nn[..k].iter().map(|n| n.distance), k))
    }
}

fn knn_from(nn: &[Neighbor], k: usize) -> f64 {
    mean(nn[..k].iter().map(|n| n.distance), k)
}

fn rescale(p: &[f64], mu: &[f64], sd: &[f64]) -> Vec<f64> {
    p.iter().zip(mu).zip(sd).map(|((v, m), s)| (v - m) / s).collect()
}

/// Mean distance from `y` to its `k` nearest rows of `reference`.
pub fn knn_score(y: &[f64], reference: &ReferenceTable, k: usize) -> Result<f64> {
    Scorer::new(reference, k)?.knn_score(Query::Point(y), k)
}

pub fn lrd(y: &[f64], reference: &ReferenceTable, k: usize) -> Result<f64> {
    Scorer::new(reference, k)?.lrd(Query::Point(y), k)
}

pub fn lof(y: &[f64], reference: &ReferenceTable, k: usize) -> Result<f64> {
    Scorer::new(reference, k)?.lof(Query::Point(y), k)
}

pub fn max_lof(y: &[f64], reference: &ReferenceTable, k_min: usize, k_max: usize) -> Result<f64> {
    ScoreSpec::MaxLof { k_min, k_max }.validate()?;
    Scorer::new(reference, k_max)?.max_lof(Query::Point(y), k_min, k_max)
}

pub fn score_batch<P: AsRef<[f64]> + Sync>(
    points: &[P],
    reference: &ReferenceTable,
    spec: &ScoreSpec,
) -> Result<Vec<f64>> {
    Scorer::for_specs(reference, &[*spec], Scaling::None)?.score_batch(points, spec)
}
