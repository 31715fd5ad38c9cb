//! ABC posterior approximation used by the holdout test: rejection
//! localization, local-linear and ridge regression adjustment, bounded
//! parameter transforms, and re-simulation.

mod adjust;
mod localize;
mod resim;
mod transform;

use serde::{Deserialize, Serialize};

pub use adjust::{loclin_adjust, ridge_adjust, Adjusted};
pub use localize::{localize, Localized};
pub use resim::{
    export_params, import_summaries, resimulate, FnResimulator, IdentityResimulator, Resimulator,
};
pub use transform::{ParamBounds, TransformSpec, BOUND_MARGIN, ORDER_FLOOR};

use crate::data::ReferenceTable;
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDAS: [f64; 3] = [1e-4, 1e-3, 1e-2];

/// How localized particles are turned into posterior parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdjustMethod {
    Rejection,
    #[serde(rename = "loclin")]
    LocLinear,
    Ridge { lambdas: Vec<f64> },
}

impl AdjustMethod {
    pub fn ridge_default() -> Self {
        AdjustMethod::Ridge {
            lambdas: DEFAULT_LAMBDAS.to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AdjustMethod::Rejection => "rejection",
            AdjustMethod::LocLinear => "loclin",
            AdjustMethod::Ridge { .. } => "ridge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSpec {
    pub n_post: usize,
    pub method: AdjustMethod,
    #[serde(default)]
    pub transform: Option<TransformSpec>,
}

impl PosteriorSpec {
    pub fn rejection(n_post: usize) -> Self {
        PosteriorSpec {
            n_post,
            method: AdjustMethod::Rejection,
            transform: None,
        }
    }

    pub fn validate(&self, n_ref: usize) -> Result<()> {
        if self.n_post == 0 || self.n_post > n_ref {
            return Err(Error::Size(format!(
                "n_post = {} must lie in 1..={n_ref}",
                self.n_post
            )));
        }
        if let AdjustMethod::Ridge { lambdas } = &self.method {
            if lambdas.is_empty() {
                return Err(Error::Spec("ridge needs at least one lambda".into()));
            }
            if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::Spec("ridge lambdas must be positive".into()));
            }
        }
        if let Some(t) = &self.transform {
            t.validate()?;
        }
        Ok(())
    }
}

/// Posterior parameters for the localized particles under `method`.
pub fn posterior_params(
    localized: &ReferenceTable,
    y_obs: &[f64],
    method: &AdjustMethod,
    transform: Option<&TransformSpec>,
) -> Result<Adjusted> {
    match method {
        AdjustMethod::Rejection => Ok(Adjusted {
            params: localized.params().map(<[f64]>::to_vec).collect(),
            fallback: false,
            warnings: Vec::new(),
        }),
        AdjustMethod::LocLinear => loclin_adjust(localized, y_obs, transform),
        AdjustMethod::Ridge { lambdas } => ridge_adjust(localized, y_obs, lambdas, transform),
    }
}
