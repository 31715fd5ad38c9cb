//! Pre-inference goodness of fit: exceedance p-values against the prior
//! predictive, the localized variant, and uncertainty on p-values.

mod pvalue;
mod report;
mod uncertainty;

pub use pvalue::{
    exceedance_count, exceedance_pvalue, localized_prior_pvalue, localized_split_seed, prior_pvalue,
    PriorTest,
};
pub use report::{read_reports_json, write_reports_csv, write_reports_json, CiMethod, GofReport, TestKind};
pub use uncertainty::{
    apply_bh, asymptotic_ci, bh_adjust, bootstrap_pvalues, hdi, median, BootstrapSummary,
};
