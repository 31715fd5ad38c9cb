//! Simulation studies: the Laplace/Gaussian toy model, power of the
//! tests against an alternative, and calibration under the null.

mod calibration;
mod lmoments;
mod power;
mod toy;

pub use calibration::{
    calibration_check, ks_uniform, max_quantile_deviation, write_calibration_csv, write_ecdf_csv,
    CalibrationResult, CalibrationTest,
};
pub use lmoments::sample_lmoments;
pub use power::{
    critical_count, estimate_power_holdout, estimate_power_prior, holdout_cells, k_sweep_specs,
    power_by_pvalues, power_by_quantile, prior_cells, quantile_threshold, write_power_csv,
    ExperimentSpec, HoldoutCell, ModelSource, PairSource, PowerRow, PriorCell,
};
pub use toy::{simulate_toy, Family, ToyModelSpec};
