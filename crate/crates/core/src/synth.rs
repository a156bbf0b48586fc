//! Synthetic populations drawn from the isotropic Gaussian embedding that the
//! distance model assumes, plus a direct sampler of non-central chi-squared
//! variates.
//!
//! All randomness comes from `ChaCha8Rng` seeded with a `u64`, with normals
//! from `rand_distr::StandardNormal`, so a seed fixes every output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::InterClassDistances;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub n_classes: usize,
    pub sigma_between: f64,
    pub sigma_within: f64,
    pub seed: u64,
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("embedding dim must be >= 1".into()));
        }
        if self.n_classes < 2 {
            return Err(Error::InvalidConfig("need at least 2 classes".into()));
        }
        if !(self.sigma_between > 0.0 && self.sigma_between.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma_between must be > 0, got {}",
                self.sigma_between
            )));
        }
        if !(self.sigma_within >= 0.0 && self.sigma_within.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma_within must be >= 0, got {}",
                self.sigma_within
            )));
        }
        Ok(())
    }

    /// Standard deviation per axis of a single pattern around the origin,
    /// `sqrt(sigma_between^2 + sigma_within^2)`.
    pub fn pattern_scale(&self) -> f64 {
        self.sigma_between.hypot(self.sigma_within)
    }
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 18,
            n_classes: 100,
            sigma_between: 1.0,
            sigma_within: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPopulation {
    pub class_centers: Vec<Vec<f64>>,
    pub training_patterns: Vec<Vec<f64>>,
    /// `query_patterns[c]` holds the held-out patterns of class `c`.
    pub query_patterns: Vec<Vec<Vec<f64>>>,
}

impl SyntheticPopulation {
    pub fn n_classes(&self) -> usize {
        self.class_centers.len()
    }

    /// Ids are prefixed so a CSV header of them never parses as numbers.
    pub fn class_id(c: usize) -> String {
        format!("c{c}")
    }
}

/// One impostor or genuine comparison of a held-out query with a class's
/// training pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDistance {
    pub query: String,
    pub true_class: String,
    pub claimed_class: String,
    pub distance: f64,
}

fn normal_vector(rng: &mut ChaCha8Rng, center: Option<&[f64]>, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|j| {
            let z: f64 = rng.sample(StandardNormal);
            center.map_or(0.0, |c| c[j]) + scale * z
        })
        .collect()
}

/// Draws class centres from `N(0, sigma_between^2 I)`, then each class's
/// training pattern and `queries_per_class` queries from
/// `N(center, sigma_within^2 I)`.
///
/// Draw order: all centres, then all training patterns, then queries class by
/// class.
pub fn generate(config: &EmbeddingConfig, queries_per_class: usize) -> Result<SyntheticPopulation> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let EmbeddingConfig {
        dim,
        n_classes,
        sigma_between,
        sigma_within,
        ..
    } = *config;

    let class_centers: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| normal_vector(&mut rng, None, dim, sigma_between))
        .collect();
    let training_patterns = class_centers
        .iter()
        .map(|c| normal_vector(&mut rng, Some(c), dim, sigma_within))
        .collect();
    let query_patterns = class_centers
        .iter()
        .map(|c| {
            (0..queries_per_class)
                .map(|_| normal_vector(&mut rng, Some(c), dim, sigma_within))
                .collect()
        })
        .collect();
    Ok(SyntheticPopulation {
        class_centers,
        training_patterns,
        query_patterns,
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Full square matrix of Euclidean distances between training patterns.
pub fn training_distance_matrix(pop: &SyntheticPopulation) -> Vec<Vec<f64>> {
    let t = &pop.training_patterns;
    t.iter()
        .map(|a| t.iter().map(|b| euclidean(a, b)).collect())
        .collect()
}

/// For each class, distances from its training pattern to every other
/// class's training pattern, in class order.
pub fn interclass_distances(pop: &SyntheticPopulation) -> Result<Vec<InterClassDistances>> {
    let t = &pop.training_patterns;
    (0..t.len())
        .map(|c| {
            let d = (0..t.len())
                .filter(|&j| j != c)
                .map(|j| euclidean(&t[c], &t[j]))
                .collect();
            InterClassDistances::new(SyntheticPopulation::class_id(c), d)
        })
        .collect()
}

/// Every query pattern compared against every class's training pattern.
pub fn query_distances(pop: &SyntheticPopulation) -> Vec<QueryDistance> {
    let mut out = Vec::new();
    for (true_c, queries) in pop.query_patterns.iter().enumerate() {
        for (qi, q) in queries.iter().enumerate() {
            let query = format!("{}.{qi}", SyntheticPopulation::class_id(true_c));
            for (claimed, t) in pop.training_patterns.iter().enumerate() {
                out.push(QueryDistance {
                    query: query.clone(),
                    true_class: SyntheticPopulation::class_id(true_c),
                    claimed_class: SyntheticPopulation::class_id(claimed),
                    distance: euclidean(q, t),
                });
            }
        }
    }
    out
}

/// `n` draws of `Σ_{j=1..k} (Z_j + μ_j)^2` with `μ_1 = sqrt(lambda)` and the
/// other means zero.
pub fn sample_noncentral_chi2(k: usize, lambda: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidConfig(
            "degrees of freedom must be >= 1".into(),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "non-centrality must be >= 0, got {lambda}"
        )));
    }
    let shift = lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            let mut s = (z + shift) * (z + shift);
            for _ in 1..k {
                let z: f64 = rng.sample(StandardNormal);
                s += z * z;
            }
            s
        })
        .collect())
}
