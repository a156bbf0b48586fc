//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, Continuous};
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Number of Poisson terms the mixture oracles sum; ample for λ ≤ 200.
const MIXTURE_TERMS: usize = 600;

fn poisson_weight(i: usize, half_lambda: f64) -> f64 {
    if half_lambda == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    (i as f64 * half_lambda.ln() - half_lambda - ln_gamma(i as f64 + 1.0)).exp()
}

/// Non-central χ² CDF as a Poisson(λ/2) mixture of central CDFs, using
/// statrs' regularized incomplete gamma.
pub fn mixture_cdf(x: f64, k: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (0..MIXTURE_TERMS)
        .map(|i| poisson_weight(i, lambda / 2.0) * gamma_lr(k / 2.0 + i as f64, x / 2.0))
        .sum()
}

/// Non-central χ² density as a Poisson(λ/2) mixture of central densities.
pub fn mixture_pdf(x: f64, k: f64, lambda: f64) -> f64 {
    (0..MIXTURE_TERMS)
        .map(|i| {
            let w = poisson_weight(i, lambda / 2.0);
            if w == 0.0 {
                0.0
            } else {
                w * ChiSquared::new(k + 2.0 * i as f64).unwrap().pdf(x)
            }
        })
        .sum()
}

/// Fraction of `n` draws of `Σ (Z_j + μ_j)^2` at or below each grid point.
/// The non-centrality is spread evenly over all `k` axes.
pub fn monte_carlo_cdf(k: usize, lambda: f64, n: usize, seed: u64, grid: &[f64]) -> Vec<f64> {
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    let mu = (lambda / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // counts[i] = draws falling in (grid[i-1], grid[i]]
    let mut counts = vec![0u64; grid.len() + 1];
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..k {
            let z: f64 = StandardNormal.sample(&mut rng);
            s += (z + mu) * (z + mu);
        }
        counts[grid.partition_point(|&g| g < s)] += 1;
    }
    let mut acc = 0u64;
    grid.iter()
        .enumerate()
        .map(|(i, _)| {
            acc += counts[i];
            acc as f64 / n as f64
        })
        .collect()
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Evenly spaced grid of `n` points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Grid covering the bulk of χ'²(k, λ): mean ± 6 standard deviations, clipped at 0.
pub fn bulk_grid(k: f64, lambda: f64, n: usize) -> Vec<f64> {
    let mean = k + lambda;
    let sd = (2.0 * (k + 2.0 * lambda)).sqrt();
    linspace((mean - 6.0 * sd).max(1e-6), mean + 6.0 * sd, n)
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01, with the small-sample
/// correction of Stephens.
pub fn ks_critical_001(n: usize) -> f64 {
    let n = n as f64;
    1.628 / (n.sqrt() + 0.12 + 0.11 / n.sqrt())
}
