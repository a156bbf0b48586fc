//! Class-specific verification thresholds for a target false positive rate.
//!
//! Inter-class distances seen at enrollment are modelled as a scaled
//! non-central chi-squared variable: `(distance / sigma)^2 ~ chi'^2(dim, lambda)`.
//! [`model::fit`] grid-searches `(dim, sigma)` with a moment estimate of
//! `lambda`, and [`thresholds::model_threshold`] inverts the fitted CDF at the
//! requested false positive rate. Interpolated data-driven baselines, a
//! mutual-subspace set distance, a synthetic population generator and a batch
//! calibration/evaluation harness round out the crate.

pub mod distances;
pub mod error;
pub mod harness;
pub mod model;
pub mod specfun;
pub mod synth;
pub mod thresholds;

pub use error::{Error, Result};
