//! Maps between bounded (optionally integer, optionally ordered)
//! parameters and unconstrained space for regression adjustment.
//!
//! Independent parameters use a logit on bounds widened by
//! [`BOUND_MARGIN`] for integer parameters, so inclusive integer bounds
//! stay finite, and rounding on the way back lands inside the bounds.
//! Ordered groups `t1 < t2 < ...` of integer parameters are mapped
//! through the gaps `t_j - base_j`, floored at [`ORDER_FLOOR`], each with
//! a logit whose upper bound depends on the previous element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOUND_MARGIN: f64 = 0.49;
pub const ORDER_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub integer: bool,
}

impl ParamBounds {
    fn margin(&self) -> f64 {
        if self.integer {
            BOUND_MARGIN
        } else {
            0.0
        }
    }
}

/// Bounds for every parameter plus strictly ordered groups of parameter
/// indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub params: Vec<ParamBounds>,
    #[serde(default)]
    pub ordered: Vec<Vec<usize>>,
}

fn logit(x: f64, a: f64, b: f64) -> f64 {
    ((x - a) / (b - x)).ln()
}

fn logistic(v: f64, a: f64, b: f64) -> f64 {
    a + (b - a) / (1.0 + (-v).exp())
}

impl TransformSpec {
    pub fn independent(params: Vec<ParamBounds>) -> Self {
        TransformSpec {
            params,
            ordered: Vec::new(),
        }
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: TransformSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn err(&self, i: usize, message: impl Into<String>) -> Error {
        Error::Transform {
            param: self
                .params
                .get(i)
                .map_or_else(|| format!("#{i}"), |p| p.name.clone()),
            message: message.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.params.iter().enumerate() {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(self.err(i, format!("invalid bounds [{}, {}]", p.lower, p.upper)));
            }
            if p.integer && (p.lower.fract() != 0.0 || p.upper.fract() != 0.0) {
                return Err(self.err(i, "integer parameter needs integer bounds"));
            }
        }
        let mut seen = vec![false; self.params.len()];
        for group in &self.ordered {
            if group.len() < 2 {
                return Err(Error::Spec("ordered groups need at least two parameters".into()));
            }
            for (pos, &i) in group.iter().enumerate() {
                if i >= self.params.len() {
                    return Err(Error::Spec(format!("ordered group index {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(self.err(i, "parameter appears in more than one ordered group"));
                }
                if !self.params[i].integer {
                    return Err(self.err(i, "ordered groups must be integer parameters"));
                }
                if pos > 0 {
                    let prev = &self.params[group[pos - 1]];
                    if prev.upper + 1.0 > self.params[i].upper {
                        return Err(self.err(
                            i,
                            "upper bound must exceed the previous group member's upper bound",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn group_of(&self) -> Vec<Option<(usize, usize)>> {
        let mut g = vec![None; self.params.len()];
        for (gi, group) in self.ordered.iter().enumerate() {
            for (pos, &i) in group.iter().enumerate() {
                g[i] = Some((gi, pos));
            }
        }
        g
    }

    /// Constrained parameters to unconstrained space.
    pub fn forward(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                found: theta.len(),
            });
        }
        for (i, (t, p)) in theta.iter().zip(&self.params).enumerate() {
            let inside = if p.integer {
                *t >= p.lower && *t <= p.upper
            } else {
                *t > p.lower && *t < p.upper
            };
            if !inside {
                return Err(self.err(i, format!("value {t} outside [{}, {}]", p.lower, p.upper)));
            }
        }
        let groups = self.group_of();
        let mut out = vec![0.0; theta.len()];
        for (i, p) in self.params.iter().enumerate() {
            out[i] = match groups[i] {
                Some((gi, pos)) if pos > 0 => {
                    let prev = theta[self.ordered[gi][pos - 1]];
                    if theta[i] <= prev {
                        return Err(self.err(i, format!("order violated: {} <= {prev}", theta[i])));
                    }
                    let base = (prev + 1.0).max(p.lower);
                    let gap = (theta[i] - base).max(ORDER_FLOOR);
                    logit(gap, 0.0, p.upper - base + BOUND_MARGIN)
                }
                _ => logit(theta[i], p.lower - p.margin(), p.upper + p.margin()),
            };
        }
        Ok(out)
    }

    /// Unconstrained values back to parameters. Integer parameters are
    /// rounded; the output always satisfies bounds and orderings.
    pub fn inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                found: v.len(),
            });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(self.err(i, "non-finite unconstrained value"));
        }
        let groups = self.group_of();
        let mut out = vec![f64::NAN; v.len()];
        // group heads and free parameters first, then chains in order
        for (i, p) in self.params.iter().enumerate() {
            if matches!(groups[i], Some((_, pos)) if pos > 0) {
                continue;
            }
            let x = logistic(v[i], p.lower - p.margin(), p.upper + p.margin());
            out[i] = if p.integer {
                x.round().clamp(p.lower, p.upper)
            } else {
                x.clamp(p.lower, p.upper)
            };
        }
        for group in &self.ordered {
            for pos in 1..group.len() {
                let i = group[pos];
                let p = &self.params[i];
                let base = (out[group[pos - 1]] + 1.0).max(p.lower);
                let gap = logistic(v[i], 0.0, p.upper - base + BOUND_MARGIN);
                out[i] = (gap + base).round().clamp(base, p.upper);
            }
        }
        Ok(out)
    }

    /// Bounds and order constraints hold for `theta`.
    pub fn satisfies(&self, theta: &[f64]) -> bool {
        theta.len() == self.params.len()
            && theta
                .iter()
                .zip(&self.params)
                .all(|(t, p)| *t >= p.lower && *t <= p.upper && (!p.integer || t.fract() == 0.0))
            && self
                .ordered
                .iter()
                .all(|g| g.windows(2).all(|w| theta[w[0]] < theta[w[1]]))
    }
}
