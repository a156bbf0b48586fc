//! Per-class fit of the scaled non-central chi-squared distance model.
//!
//! For each candidate `(dim, sigma)` on a bounded grid the observed distances
//! are standardised to `x_i = (δ_i / sigma)^2`, the non-centrality is set by a
//! moment estimator, and the model CDF at the `x_i` is scored against their
//! empirical CDF. The best-scoring candidate wins.

use serde::{Deserialize, Serialize};

use crate::specfun::{noncentral_chi2_cdf, SeriesConfig};
use crate::{Error, Result};

/// Distances from one class's enrollment pattern to every other class's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterClassDistances {
    pub class_id: String,
    pub distances: Vec<f64>,
}

impl InterClassDistances {
    /// Checks that every distance is finite and strictly positive.
    pub fn new(class_id: impl Into<String>, distances: Vec<f64>) -> Result<Self> {
        let class_id = class_id.into();
        if let Some(bad) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::Domain(format!(
                "class `{class_id}`: distances must be finite and > 0, found {bad}"
            )));
        }
        Ok(Self {
            class_id,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// Search box for the fit: an integer range of degrees of freedom and a
/// uniform grid of `sigma_steps` scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConstraints {
    pub dim_low: u32,
    pub dim_high: u32,
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub sigma_steps: usize,
}

impl FitConstraints {
    pub fn new(
        dim_low: u32,
        dim_high: u32,
        sigma_low: f64,
        sigma_high: f64,
        sigma_steps: usize,
    ) -> Result<Self> {
        let c = Self {
            dim_low,
            dim_high,
            sigma_low,
            sigma_high,
            sigma_steps,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_low == 0 || self.dim_low > self.dim_high {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= dim_low <= dim_high, got {}..{}",
                self.dim_low, self.dim_high
            )));
        }
        if !(self.sigma_low > 0.0
            && self.sigma_low <= self.sigma_high
            && self.sigma_high.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < sigma_low <= sigma_high < inf, got {}..{}",
                self.sigma_low, self.sigma_high
            )));
        }
        if self.sigma_steps == 0 {
            return Err(Error::InvalidConfig("sigma_steps must be >= 1".into()));
        }
        Ok(())
    }

    /// Grid spacing in sigma (0 for a single-point grid).
    pub fn sigma_step(&self) -> f64 {
        if self.sigma_steps <= 1 {
            0.0
        } else {
            (self.sigma_high - self.sigma_low) / (self.sigma_steps - 1) as f64
        }
    }

    /// The sigma grid in increasing order. A single step yields `sigma_low`.
    pub fn sigma_grid(&self) -> Vec<f64> {
        if self.sigma_steps == 1 {
            return vec![self.sigma_low];
        }
        let span = self.sigma_high - self.sigma_low;
        let last = (self.sigma_steps - 1) as f64;
        (0..self.sigma_steps)
            .map(|j| {
                if j + 1 == self.sigma_steps {
                    self.sigma_high
                } else {
                    self.sigma_low + span * (j as f64 / last)
                }
            })
            .collect()
    }

    pub fn dims(&self) -> impl Iterator<Item = u32> {
        self.dim_low..=self.dim_high
    }
}

/// Fitted `(dim, sigma, lambda)` with its goodness score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub dim: u32,
    pub sigma: f64,
    pub lambda: f64,
    pub rho: f64,
}

impl FittedModel {
    /// Model CDF of a raw distance: `P(δ <= distance)`.
    pub fn distance_cdf(&self, distance: f64, cfg: &SeriesConfig) -> Result<f64> {
        let x = (distance / self.sigma).powi(2);
        noncentral_chi2_cdf(x, self.dim as f64, self.lambda, cfg)
    }
}

/// How a candidate's model CDF is scored against the empirical CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoodnessMetric {
    /// Normalised cross-correlation (Pearson) of the two CDF vectors.
    #[default]
    Ncc,
    /// Bhattacharyya coefficient of the two CDFs' increments.
    Bhattacharyya,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub goodness: GoodnessMetric,
    pub min_samples: usize,
    pub series: SeriesConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            goodness: GoodnessMetric::Ncc,
            min_samples: 10,
            series: SeriesConfig::default(),
        }
    }
}

/// `(δ_i / sigma)^2` for every distance, in input order.
pub fn scaled_squares(distances: &[f64], sigma: f64) -> Vec<f64> {
    distances.iter().map(|d| (d / sigma).powi(2)).collect()
}

/// Non-centrality estimate `max{x̄ − dim, x̄ / (1 + dim)}`.
pub fn estimate_lambda(samples: &[f64], dim: u32) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "cannot estimate non-centrality from no samples",
        ));
    }
    let dim = dim as f64;
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let beta = 1.0 / (1.0 + dim);
    Ok((mean - dim).max(beta * mean))
}

/// Right-continuous empirical CDF, `F(x) = |{x_j <= x}| / n`.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("empirical CDF samples contain NaN".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&s| s <= x);
        count as f64 / self.sorted.len() as f64
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }
}

/// Empirical CDF evaluated at each sample, in input order.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<f64>> {
    let ecdf = EmpiricalCdf::new(samples)?;
    Ok(samples.iter().map(|&x| ecdf.eval(x)).collect())
}

/// Pearson correlation between the empirical and model CDF vectors.
pub fn goodness(phi_ref: &[f64], phi: &[f64]) -> Result<f64> {
    check_pair(phi_ref, phi)?;
    let n = phi.len() as f64;
    let mean_r = phi_ref.iter().sum::<f64>() / n;
    let mean_m = phi.iter().sum::<f64>() / n;
    let (mut srr, mut smm, mut srm) = (0.0, 0.0, 0.0);
    for (r, m) in phi_ref.iter().zip(phi) {
        let (dr, dm) = (r - mean_r, m - mean_m);
        srr += dr * dr;
        smm += dm * dm;
        srm += dr * dm;
    }
    if srr == 0.0 {
        return Err(Error::Degenerate("empirical CDF vector is constant".into()));
    }
    if smm == 0.0 {
        return Err(Error::Degenerate("model CDF vector is constant".into()));
    }
    Ok((srm / (srr * smm).sqrt()).clamp(-1.0, 1.0))
}

/// Bhattacharyya coefficient between the probability masses the two CDFs put
/// on consecutive sample intervals (plus the mass above the last sample).
///
/// Both vectors must be CDF values at samples sorted in increasing order.
pub fn bhattacharyya_goodness(phi_ref: &[f64], phi: &[f64]) -> Result<f64> {
    check_pair(phi_ref, phi)?;
    let masses = |cdf: &[f64]| -> Vec<f64> {
        let mut prev = 0.0;
        let mut out: Vec<f64> = cdf
            .iter()
            .map(|&c| {
                let m = (c - prev).max(0.0);
                prev = prev.max(c);
                m
            })
            .collect();
        out.push((1.0 - prev).max(0.0));
        out
    };
    let p = masses(phi_ref);
    let q = masses(phi);
    let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::Degenerate("CDF increments carry no mass".into()));
    }
    let bc: f64 = p
        .iter()
        .zip(&q)
        .map(|(a, b)| (a * b / (sp * sq)).sqrt())
        .sum();
    Ok(bc.clamp(0.0, 1.0))
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: a.len(),
        });
    }
    Ok(())
}

/// Score of one grid candidate, or `None` when the model CDF is flat over the
/// samples and the score is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub dim: u32,
    pub sigma: f64,
    pub lambda: f64,
    pub rho: Option<f64>,
}

/// Prepared data shared by every candidate of one fit.
struct FitData {
    sorted: Vec<f64>,
    phi_ref: Vec<f64>,
}

impl FitData {
    fn new(d: &InterClassDistances, opts: &FitOptions) -> Result<Self> {
        if d.len() < opts.min_samples.max(2) {
            return Err(Error::InsufficientData {
                needed: opts.min_samples.max(2),
                got: d.len(),
            });
        }
        let mut sorted = d.distances.clone();
        sorted.sort_by(f64::total_cmp);
        // the ranks of (δ/σ)^2 do not depend on σ, so neither does φ_ref
        let phi_ref = empirical_cdf(&scaled_squares(&sorted, 1.0))?;
        if phi_ref.iter().all(|&v| v == phi_ref[0]) {
            return Err(Error::Degenerate(format!(
                "class `{}`: all distances are equal",
                d.class_id
            )));
        }
        Ok(Self { sorted, phi_ref })
    }

    fn candidate(&self, dim: u32, sigma: f64, opts: &FitOptions) -> Result<Candidate> {
        let samples = scaled_squares(&self.sorted, sigma);
        let lambda = estimate_lambda(&samples, dim)?;
        let phi = samples
            .iter()
            .map(|&x| noncentral_chi2_cdf(x, dim as f64, lambda, &opts.series))
            .collect::<Result<Vec<_>>>()?;
        let score = match opts.goodness {
            GoodnessMetric::Ncc => goodness(&self.phi_ref, &phi),
            GoodnessMetric::Bhattacharyya => bhattacharyya_goodness(&self.phi_ref, &phi),
        };
        let rho = match score {
            Ok(r) => Some(r),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Candidate {
            dim,
            sigma,
            lambda,
            rho,
        })
    }
}

/// Scores a single `(dim, sigma)` pair the same way [`fit`] does.
pub fn evaluate_candidate(
    d: &InterClassDistances,
    dim: u32,
    sigma: f64,
    opts: &FitOptions,
) -> Result<Candidate> {
    FitData::new(d, opts)?.candidate(dim, sigma, opts)
}

/// Grid-search fit with default options (NCC score, at least 10 distances).
pub fn fit(d: &InterClassDistances, c: &FitConstraints) -> Result<FittedModel> {
    fit_with(d, c, &FitOptions::default())
}

/// Exhaustive grid search over `dim` in `[dim_low, dim_high]` and the sigma
/// grid. Ties go to the smaller `dim`, then the smaller `sigma`.
pub fn fit_with(
    d: &InterClassDistances,
    c: &FitConstraints,
    opts: &FitOptions,
) -> Result<FittedModel> {
    c.validate()?;
    opts.series.validate()?;
    let data = FitData::new(d, opts)?;
    let sigmas = c.sigma_grid();

    let mut best: Option<FittedModel> = None;
    for dim in c.dims() {
        for &sigma in &sigmas {
            let cand = data.candidate(dim, sigma, opts)?;
            let Some(rho) = cand.rho else { continue };
            // strict: first maximum in (dim, sigma) order is kept
            if best.is_none_or(|b| rho > b.rho) {
                best = Some(FittedModel {
                    dim,
                    sigma,
                    lambda: cand.lambda,
                    rho,
                });
            }
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate(format!(
            "class `{}`: no grid candidate produced a defined goodness score",
            d.class_id
        ))
    })
}
