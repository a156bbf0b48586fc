//! Distance thresholds for a target false positive rate.
//!
//! The model-based threshold inverts a fitted class model's CDF; the two
//! data-driven baselines interpolate between order statistics of observed
//! inter-class distances, either pooled over all classes or per class.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{FittedModel, InterClassDistances};
use crate::specfun::{noncentral_chi2_quantile, SeriesConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Quantile of the fitted per-class distance model.
    Model,
    /// One interpolated threshold over the pooled distances of all classes.
    GenericData,
    /// Interpolated threshold over one class's own distances.
    ClassData,
}

impl ThresholdMethod {
    pub const ALL: [ThresholdMethod; 3] = [Self::GenericData, Self::ClassData, Self::Model];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Model => "model",
            Self::GenericData => "generic_data",
            Self::ClassData => "class_data",
        }
    }

    /// Column heading used in evaluation tables.
    pub fn title(self) -> &'static str {
        match self {
            Self::Model => "Proposed",
            Self::GenericData => "Generic data-driven",
            Self::ClassData => "Class-specific data-driven",
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(Self::Model),
            "generic_data" | "generic" => Ok(Self::GenericData),
            "class_data" | "class" => Ok(Self::ClassData),
            other => Err(Error::InvalidConfig(format!(
                "unknown threshold method `{other}` (expected model, generic_data or class_data)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub target_fpr: f64,
    pub method: ThresholdMethod,
    pub threshold: f64,
}

impl ThresholdSpec {
    pub fn new(target_fpr: f64, method: ThresholdMethod, threshold: f64) -> Result<Self> {
        check_fpr(target_fpr)?;
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(Error::Domain(format!(
                "threshold must be > 0, got {threshold}"
            )));
        }
        Ok(Self {
            target_fpr,
            method,
            threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

pub(crate) fn check_fpr(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "target false positive rate must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `sigma * sqrt(q)` where `q` is the `epsilon` quantile of `chi'^2(dim, lambda)`.
pub fn model_threshold(m: &FittedModel, epsilon: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_fpr(epsilon)?;
    if !(m.sigma > 0.0 && m.lambda >= 0.0 && m.dim >= 1) {
        return Err(Error::Domain(format!("invalid fitted model {m:?}")));
    }
    let q = noncentral_chi2_quantile(epsilon, m.dim as f64, m.lambda, cfg)?;
    Ok(m.sigma * q.sqrt())
}

/// Interpolated order-statistic threshold over `distances`.
///
/// With `N` distances sorted ascending (1-based `δ_(i)`):
/// for `ε <= 1/N` the threshold is `εN · δ_(1)`; otherwise it interpolates
/// linearly between `δ_(⌊εN⌋)` and `δ_(⌈εN⌉)`, and is `δ_(εN)` when `εN` is
/// an integer.
pub fn interpolated_threshold(distances: &[f64], epsilon: f64) -> Result<f64> {
    check_fpr(epsilon)?;
    if distances.is_empty() {
        return Err(Error::EmptyInput("no distances to derive a threshold from"));
    }
    if distances.iter().any(|d| d.is_nan()) {
        return Err(Error::Domain("distances contain NaN".into()));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let pos = epsilon * n;
    if epsilon <= 1.0 / n {
        return Ok(pos * sorted[0]);
    }
    let lo = pos.floor();
    let hi = pos.ceil();
    let below = sorted[lo as usize - 1];
    if hi == lo {
        return Ok(below);
    }
    let above = sorted[(hi as usize).min(sorted.len()) - 1];
    Ok(below + (pos - lo) / (hi - lo) * (above - below))
}

/// Single threshold shared by all classes, from every class's distances pooled.
pub fn generic_data_threshold(all_distances: &[f64], epsilon: f64) -> Result<f64> {
    interpolated_threshold(all_distances, epsilon)
}

/// Per-class threshold from the class's own inter-class distances.
pub fn class_data_threshold(d: &InterClassDistances, epsilon: f64) -> Result<f64> {
    interpolated_threshold(&d.distances, epsilon)
}

/// Accept iff the query distance is strictly below the threshold.
pub fn verify(query_distance: f64, spec: &ThresholdSpec) -> Decision {
    if query_distance < spec.threshold {
        Decision::Accept
    } else {
        Decision::Reject
    }
}
