//! Synthetic three-population model laid out like a diyabc export:
//! population sizes N1..N4 (N4 ancestral), ordered split times
//! t2 < t3 < t4, and thirteen SNP-style summaries that are smooth noisy
//! functions of the parameters. Shared by the data generator example and
//! the CLI acceptance test, which plays the external simulator.

#![allow(dead_code)]

use std::error::Error;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const PARAM_NAMES: [&str; 7] = ["N1", "N2", "N3", "N4", "t2", "t3", "t4"];

pub const STAT_NAMES: [&str; 13] = [
    "HP0_1", "HP0_2", "HP0_3", "HM1_1", "HM1_2", "HM1_3", "FP0_1_2", "FP0_1_3", "FP0_2_3", "NP0_1_2", "NP0_1_3",
    "NP0_2_3", "AP0_1_2_3",
];

pub const N_BOUNDS: (f64, f64) = (1000.0, 10000.0);
pub const T_BOUNDS: [(f64, f64); 3] = [(100.0, 998.0), (101.0, 999.0), (102.0, 1000.0)];

/// Integer draw from the prior, split times sorted.
pub fn sample_prior<R: Rng>(rng: &mut R) -> Vec<f64> {
    let mut theta: Vec<f64> = (0..4)
        .map(|_| rng.gen_range(N_BOUNDS.0 as i64..=N_BOUNDS.1 as i64) as f64)
        .collect();
    let times = loop {
        let mut t: Vec<i64> = (0..3).map(|_| rng.gen_range(100..=1000)).collect();
        t.sort_unstable();
        if t[0] < t[1] && t[1] < t[2] {
            break t;
        }
    };
    theta.extend(times.into_iter().map(|t| t as f64));
    theta
}

fn diversity(n: f64) -> f64 {
    let theta = 4e-4 * n;
    theta / (1.0 + theta)
}

fn drift(t: f64, n: f64) -> f64 {
    1.0 - (-t / (2.0 * n)).exp()
}

/// One summary vector at `theta`.
pub fn simulate<R: Rng>(theta: &[f64], rng: &mut R) -> Vec<f64> {
    let (n, t) = (&theta[..4], &theta[4..]);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut e = |sd: f64| sd * noise.sample(rng);
    let h: Vec<f64> = (0..3).map(|i| diversity(n[i]) * (1.0 - drift(t[0], n[i]) / 4.0)).collect();
    let mut stats = Vec::with_capacity(STAT_NAMES.len());
    for hi in &h {
        stats.push(hi + e(0.01));
    }
    for hi in &h {
        stats.push(hi * hi.sqrt() + 0.05 * drift(t[2], n[3]) + e(0.01));
    }
    // pop 1 and 2 split at t2, pop 3 joins at t3
    let split = [(0, 1, t[0]), (0, 2, t[1]), (1, 2, t[1])];
    for &(i, j, tij) in &split {
        stats.push(drift(tij, (n[i] + n[j]) / 2.0) + e(0.005));
    }
    for &(i, j, tij) in &split {
        stats.push(tij / (n[i] + n[j]) + e(0.005));
    }
    stats.push(drift(t[2] - t[1], n[3]) + e(0.005));
    stats
}

/// External-simulator step of the two-phase workflow: read
/// `id,param:...` rows and write `id,stat:...` rows. Row `id` uses its own
/// stream of `seed`.
pub fn simulate_file(params: &Path, summaries: &Path, seed: u64) -> Result<(), Box<dyn Error>> {
    let mut reader = csv::Reader::from_path(params)?;
    let mut out = String::from("id");
    for s in STAT_NAMES {
        write!(out, ",stat:{s}")?;
    }
    out.push('\n');
    for record in reader.records() {
        let record = record?;
        let id: u64 = record[0].parse()?;
        let theta = record.iter().skip(1).map(str::parse).collect::<Result<Vec<f64>, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ id.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        write!(out, "{id}")?;
        for v in simulate(&theta, &mut rng) {
            write!(out, ",{v}")?;
        }
        out.push('\n');
    }
    std::fs::write(summaries, out)?;
    Ok(())
}
