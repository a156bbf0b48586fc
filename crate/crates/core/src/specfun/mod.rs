//! Special functions behind the distance model: modified Bessel functions of
//! the first kind, the regularized incomplete gamma function, and the central
//! and non-central chi-squared distributions.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod chi2;
mod gamma;

pub use bessel::{bessel_i, ln_bessel_i};
pub use chi2::{
    central_chi2_cdf, central_chi2_pdf, noncentral_chi2_cdf, noncentral_chi2_pdf,
    noncentral_chi2_quantile, QUANTILE_TOL,
};
pub use gamma::{ln_gamma, regularized_gamma_p, regularized_gamma_q};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Truncation policy for the infinite series used by this module.
///
/// A series stops once a term falls below `rel_tol` times the running sum, or
/// after `max_terms` terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesConfig {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        let cfg = Self { rel_tol, max_terms };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "series rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidConfig("series max_terms must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}
