use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{split_calibration, ReferenceTable, SeedStream, SplitSpec};
use crate::error::{Error, Result};
use crate::scores::{Scaling, ScoreSpec};

use super::pvalue::PriorTest;
use super::report::GofReport;

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Spec(format!("confidence level {level} outside (0, 1)")))
    }
}

/// Plug-in normal interval `p ± z * sqrt(p (1 - p) / n)`, clipped to [0, 1].
pub fn asymptotic_ci(p_hat: f64, n_calib: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::Spec(format!("p-value {p_hat} outside [0, 1]")));
    }
    if n_calib == 0 {
        return Err(Error::Spec("n_calib must be positive".into()));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf((1.0 + level) / 2.0);
    let se = (p_hat * (1.0 - p_hat) / n_calib as f64).sqrt();
    Ok(((p_hat - z * se).max(0.0), (p_hat + z * se).min(1.0)))
}

pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Spec("median of an empty sample".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    })
}

/// Shortest window of the sorted sample holding `ceil(level * n)` points;
/// the leftmost one among equally short windows.
pub fn hdi(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if samples.is_empty() {
        return Err(Error::Spec("HDI of an empty sample".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let width = ((level * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut best = 0;
    for start in 1..=n - width {
        if s[start + width - 1] - s[start] < s[best + width - 1] - s[best] {
            best = start;
        }
    }
    Ok((s[best], s[best + width - 1]))
}

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Spec(format!("p-value {p} outside [0, 1]")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let p = pvalues[i];
        // p * m / m need not round back to p
        let scaled = if rank + 1 == m { p } else { (p * m as f64 / (rank + 1) as f64).max(p) };
        running = running.min(scaled);
        adjusted[i] = running.min(1.0);
    }
    Ok(adjusted)
}

/// Fill `bh_adjusted` across a family of reports, adjusting the interval
/// upper bound when present and the point estimate otherwise.
pub fn apply_bh(reports: &mut [GofReport]) -> Result<()> {
    let raw: Vec<f64> = reports
        .iter()
        .map(|r| r.ci_high.unwrap_or(r.p_hat))
        .collect();
    for (r, adj) in reports.iter_mut().zip(bh_adjust(&raw)?) {
        r.bh_adjusted = Some(adj);
    }
    Ok(())
}

/// Bootstrap distribution of p-values over random calibration/reference
/// splits of a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub median: f64,
    pub hdi_low: f64,
    pub hdi_high: f64,
    pub samples: Vec<f64>,
}

impl BootstrapSummary {
    pub fn from_samples(samples: Vec<f64>, level: f64) -> Result<Self> {
        let (hdi_low, hdi_high) = hdi(&samples, level)?;
        Ok(BootstrapSummary {
            median: median(&samples)?,
            hdi_low,
            hdi_high,
            samples,
        })
    }
}

/// `n_boot` re-splits of `pool` into `n_calib` calibration rows and a
/// reference set, one p-value of `y` per split. Replicate `b` uses child
/// stream `b` of `seed`, so the result does not depend on thread count.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_pvalues(
    y: &[f64],
    pool: &ReferenceTable,
    n_calib: usize,
    spec: &ScoreSpec,
    scaling: Scaling,
    n_boot: usize,
    seed: u64,
    level: f64,
) -> Result<BootstrapSummary> {
    check_level(level)?;
    if n_boot == 0 {
        return Err(Error::Spec("n_boot must be at least 1".into()));
    }
    spec.validate_for(pool.len().saturating_sub(n_calib))?;
    let master = SeedStream::new(seed);
    let samples = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let split = SplitSpec {
                n_calib,
                seed: master.child(b as u64).seed(),
            };
            let (reference, calib) = split_calibration(pool, split)?;
            let test = PriorTest::new(&reference, &calib, &[*spec], scaling)?;
            Ok(test.counts(y)?[0] as f64 / n_calib as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    BootstrapSummary::from_samples(samples, level)
}
