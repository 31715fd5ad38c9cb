use rand::seq::index::sample;

use super::seed::SeedStream;
use super::table::ReferenceTable;
use crate::error::{Error, Result};

/// How many rows go to calibration, and the seed that picks them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_calib: usize,
    pub seed: u64,
}

/// Row indices `(reference, calibration)` of a uniform split without
/// replacement. Both lists are in ascending row order.
pub fn split_indices(n: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.n_calib == 0 || spec.n_calib >= n {
        return Err(Error::Size(format!(
            "n_calib = {} must lie in 1..{n}",
            spec.n_calib
        )));
    }
    let mut rng = SeedStream::new(spec.seed).rng();
    let mut is_calib = vec![false; n];
    for i in sample(&mut rng, n, spec.n_calib) {
        is_calib[i] = true;
    }
    let (calib, reference): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_calib[i]);
    Ok((reference, calib))
}

/// Partition a table into `(reference, calibration)`.
pub fn split_calibration(
    table: &ReferenceTable,
    spec: SplitSpec,
) -> Result<(ReferenceTable, ReferenceTable)> {
    let (reference, calib) = split_indices(table.len(), spec)?;
    Ok((table.select(&reference)?, table.select(&calib)?))
}
