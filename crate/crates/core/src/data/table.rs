use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One simulated draw: a parameter vector and its summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub params: Vec<f64>,
    pub summaries: Vec<f64>,
}

impl Particle {
    pub fn new(params: Vec<f64>, summaries: Vec<f64>) -> Self {
        Particle { params, summaries }
    }
}

/// Ordered, immutable collection of particles sharing dimensions.
///
/// Validation errors report 1-based data rows.
///
/// Each row carries a stable id. Freshly built tables number their rows
/// `0..n`; tables derived by selection keep the ids of the source rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    particles: Vec<Particle>,
    ids: Vec<usize>,
    param_names: Vec<String>,
    stat_names: Vec<String>,
}

impl ReferenceTable {
    pub fn new(
        param_names: Vec<String>,
        stat_names: Vec<String>,
        particles: Vec<Particle>,
    ) -> Result<Self> {
        let ids = (0..particles.len()).collect();
        Self::with_ids(param_names, stat_names, particles, ids)
    }

    pub fn with_ids(
        param_names: Vec<String>,
        stat_names: Vec<String>,
        particles: Vec<Particle>,
        ids: Vec<usize>,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::EmptyTable);
        }
        if ids.len() != particles.len() {
            return Err(Error::Size(format!(
                "{} ids for {} particles",
                ids.len(),
                particles.len()
            )));
        }
        let (p, m) = (param_names.len(), stat_names.len());
        for (i, particle) in particles.iter().enumerate() {
            let row = i + 1;
            if particle.params.len() != p {
                return Err(Error::Validation {
                    row,
                    column: "params".into(),
                    message: format!("expected {p} parameters, found {}", particle.params.len()),
                });
            }
            if particle.summaries.len() != m {
                return Err(Error::Validation {
                    row,
                    column: "summaries".into(),
                    message: format!(
                        "expected {m} statistics, found {}",
                        particle.summaries.len()
                    ),
                });
            }
            if let Some(j) = particle.summaries.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation {
                    row,
                    column: stat_names[j].clone(),
                    message: format!("non-finite statistic {}", particle.summaries[j]),
                });
            }
        }
        Ok(ReferenceTable {
            particles,
            ids,
            param_names,
            stat_names,
        })
    }

    /// Table with generated column names `theta1..`, `s1..`.
    pub fn from_particles(particles: Vec<Particle>) -> Result<Self> {
        let first = particles.first().ok_or(Error::EmptyTable)?;
        let params = (1..=first.params.len()).map(|i| format!("theta{i}")).collect();
        let stats = (1..=first.summaries.len()).map(|i| format!("s{i}")).collect();
        Self::new(params, stats, particles)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn n_stats(&self) -> usize {
        self.stat_names.len()
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn stat_names(&self) -> &[String] {
        &self.stat_names
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particle(&self, row: usize) -> &Particle {
        &self.particles[row]
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn summaries(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.particles.iter().map(|p| p.summaries.as_slice())
    }

    pub fn params(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.particles.iter().map(|p| p.params.as_slice())
    }

    /// Summary vectors laid out row-major in one buffer.
    pub fn summary_matrix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.n_stats());
        for p in &self.particles {
            out.extend_from_slice(&p.summaries);
        }
        out
    }

    /// New table made of the given rows, in the given order, keeping ids.
    pub fn select(&self, rows: &[usize]) -> Result<ReferenceTable> {
        let particles = rows.iter().map(|&r| self.particles[r].clone()).collect();
        let ids = rows.iter().map(|&r| self.ids[r]).collect();
        Self::with_ids(
            self.param_names.clone(),
            self.stat_names.clone(),
            particles,
            ids,
        )
    }

    /// Same rows with the summaries replaced, e.g. after re-simulation.
    pub fn with_summaries(&self, summaries: Vec<Vec<f64>>) -> Result<ReferenceTable> {
        if summaries.len() != self.len() {
            return Err(Error::Size(format!(
                "{} summary rows for a {}-row table",
                summaries.len(),
                self.len()
            )));
        }
        let particles = self
            .particles
            .iter()
            .zip(summaries)
            .map(|(p, s)| Particle::new(p.params.clone(), s))
            .collect();
        Self::with_ids(
            self.param_names.clone(),
            self.stat_names.clone(),
            particles,
            self.ids.clone(),
        )
    }

    /// Concatenation of two tables with identical columns; ids are kept.
    pub fn concat(&self, other: &ReferenceTable) -> Result<ReferenceTable> {
        if self.param_names != other.param_names || self.stat_names != other.stat_names {
            return Err(Error::Schema("tables have different columns".into()));
        }
        let mut particles = self.particles.clone();
        particles.extend(other.particles.iter().cloned());
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        Self::with_ids(
            self.param_names.clone(),
            self.stat_names.clone(),
            particles,
            ids,
        )
    }

    /// Column-wise mean and (n-1) standard deviation of the summaries.
    pub fn summary_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.n_stats();
        let n = self.len() as f64;
        let mut mean = vec![0.0; m];
        for s in self.summaries() {
            for (acc, v) in mean.iter_mut().zip(s) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m];
        for s in self.summaries() {
            for ((acc, v), mu) in var.iter_mut().zip(s).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let denom = (n - 1.0).max(1.0);
        let sd = var.into_iter().map(|v| (v / denom).sqrt()).collect();
        (mean, sd)
    }
}
