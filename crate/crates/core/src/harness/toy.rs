//! Location-scale toy model: a raw sample of length `d` drawn from a
//! Laplace or Gaussian distribution, summarized by its first `m` sample
//! L-moments.

use rand::distributions::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Particle, ReferenceTable, SeedStream};
use crate::error::{Error, Result};
use crate::posterior::{ParamBounds, Resimulator, TransformSpec};

use super::lmoments::sample_lmoments;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Laplace,
    Gaussian,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Laplace => "laplace",
            Family::Gaussian => "gaussian",
        }
    }
}

/// Toy simulator with `mu ~ U(mu_bounds)` and `sigma ~ U(sigma_bounds)`.
/// Both families have mean `mu` and variance `sigma^2` (the Laplace scale
/// is `sigma / sqrt(2)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyModelSpec {
    pub family: Family,
    pub d: usize,
    pub m: usize,
    pub mu_bounds: (f64, f64),
    pub sigma_bounds: (f64, f64),
}

impl ToyModelSpec {
    pub fn new(family: Family) -> Self {
        ToyModelSpec {
            family,
            d: 350,
            m: 20,
            mu_bounds: (-5.0, 5.0),
            sigma_bounds: (1.0, 4.0),
        }
    }

    pub fn laplace() -> Self {
        Self::new(Family::Laplace)
    }

    pub fn gaussian() -> Self {
        Self::new(Family::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > self.d {
            return Err(Error::Spec(format!(
                "need 1 <= m <= d, got m = {}, d = {}",
                self.m, self.d
            )));
        }
        let (a, b) = self.mu_bounds;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Spec(format!("invalid mu bounds ({a}, {b})")));
        }
        let (a, b) = self.sigma_bounds;
        if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b) {
            return Err(Error::Spec(format!("invalid sigma bounds ({a}, {b})")));
        }
        Ok(())
    }

    pub fn param_names(&self) -> Vec<String> {
        vec!["mu".into(), "sigma".into()]
    }

    pub fn stat_names(&self) -> Vec<String> {
        (1..=self.m)
            .map(|r| if r <= 2 { format!("l{r}") } else { format!("t{r}") })
            .collect()
    }

    /// Prior bounds as a transform for regression adjustment.
    pub fn transform(&self) -> TransformSpec {
        TransformSpec::independent(vec![
            ParamBounds {
                name: "mu".into(),
                lower: self.mu_bounds.0,
                upper: self.mu_bounds.1,
                integer: false,
            },
            ParamBounds {
                name: "sigma".into(),
                lower: self.sigma_bounds.0,
                upper: self.sigma_bounds.1,
                integer: false,
            },
        ])
    }

    pub fn sample_prior(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mu = rng.gen_range(self.mu_bounds.0..self.mu_bounds.1);
        let sigma = rng.gen_range(self.sigma_bounds.0..self.sigma_bounds.1);
        vec![mu, sigma]
    }

    /// Raw sample of length `d`.
    pub fn raw_sample(&self, mu: f64, sigma: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::Spec(format!("invalid parameters mu = {mu}, sigma = {sigma}")));
        }
        Ok(match self.family {
            Family::Laplace => {
                let b = sigma / std::f64::consts::SQRT_2;
                (0..self.d)
                    .map(|_| {
                        let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                        mu - b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                    })
                    .collect()
            }
            Family::Gaussian => {
                let normal = Normal::new(mu, sigma).expect("positive sigma");
                (0..self.d).map(|_| normal.sample(rng)).collect()
            }
        })
    }

    pub fn summaries(&self, params: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        if params.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: params.len(),
            });
        }
        let z = self.raw_sample(params[0], params[1], rng)?;
        sample_lmoments(&z, self.m)
    }

    /// One particle from a fresh stream: prior draw, then the data.
    pub fn particle(&self, rng: &mut ChaCha8Rng) -> Result<Particle> {
        let params = self.sample_prior(rng);
        let summaries = self.summaries(&params, rng)?;
        Ok(Particle::new(params, summaries))
    }
}

impl Resimulator for ToyModelSpec {
    fn n_stats(&self) -> usize {
        self.m
    }

    fn simulate(&self, params: &[f64], rng: &mut ChaCha8Rng) -> std::result::Result<Vec<f64>, String> {
        self.summaries(params, rng).map_err(|e| e.to_string())
    }
}

/// `n` prior-predictive particles; row `i` uses child stream `i` of
/// `seed`, so any prefix of a larger table is reproduced exactly.
pub fn simulate_toy(model: &ToyModelSpec, n: usize, seed: u64) -> Result<ReferenceTable> {
    model.validate()?;
    if n == 0 {
        return Err(Error::Size("cannot simulate an empty table".into()));
    }
    let stream = SeedStream::new(seed);
    let particles = (0..n)
        .into_par_iter()
        .map(|i| model.particle(&mut stream.child(i as u64).rng()))
        .collect::<Result<Vec<_>>>()?;
    ReferenceTable::new(model.param_names(), model.stat_names(), particles)
}
