use super::bessel::ln_bessel_i;
use super::gamma::{gamma_pq, ln_gamma, ln_poisson_mass};
use super::SeriesConfig;
use crate::{Error, Result};

/// Absolute CDF error at which the quantile search stops.
pub const QUANTILE_TOL: f64 = 1e-12;

const MAX_BRACKET_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 2_000;

fn check_dof(k: f64) -> Result<()> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!(
            "degrees of freedom must be > 0, got {k}"
        )));
    }
    Ok(())
}

fn check_noncentral(k: f64, lambda: f64) -> Result<()> {
    check_dof(k)?;
    if !(0.0..f64::INFINITY).contains(&lambda) {
        return Err(Error::Domain(format!(
            "non-centrality must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// `P(X <= x)` for `X ~ chi^2(k)`, i.e. `P(k/2, x/2)`.
pub fn central_chi2_cdf(x: f64, k: f64) -> Result<f64> {
    check_dof(k)?;
    if x.is_nan() {
        return Err(Error::Domain("x is NaN".into()));
    }
    Ok(gamma_pq(0.5 * k, 0.5 * x).0)
}

/// Density of `chi^2(k)` at `x > 0`.
pub fn central_chi2_pdf(x: f64, k: f64) -> Result<f64> {
    check_dof(k)?;
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "density is defined for x > 0, got {x}"
        )));
    }
    let half_k = 0.5 * k;
    Ok(
        ((half_k - 1.0) * x.ln() - 0.5 * x - half_k * std::f64::consts::LN_2 - ln_gamma(half_k))
            .exp(),
    )
}

/// Density of the non-central chi-squared distribution,
/// `½ e^{−(x+λ)/2} (x/λ)^{k/4−½} I_{k/2−1}(√(λx))`.
///
/// At `lambda == 0` the expression is singular and the central density (its
/// limit) is returned instead.
pub fn noncentral_chi2_pdf(x: f64, k: f64, lambda: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_noncentral(k, lambda)?;
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "density is defined for x > 0, got {x}"
        )));
    }
    if lambda == 0.0 {
        return central_chi2_pdf(x, k);
    }
    let ln_bessel = ln_bessel_i(0.5 * k - 1.0, (lambda * x).sqrt(), cfg)?;
    let ln_pdf = -std::f64::consts::LN_2 - 0.5 * (x + lambda)
        + (0.25 * k - 0.5) * (x.ln() - lambda.ln())
        + ln_bessel;
    Ok(ln_pdf.exp())
}

/// CDF of the non-central chi-squared distribution as a Poisson(λ/2) mixture
/// of central CDFs with `k + 2i` degrees of freedom.
///
/// Summation starts at the Poisson mode and walks outwards in both directions,
/// so large `lambda` neither underflows the leading weight nor needs thousands
/// of negligible terms. Neighbouring incomplete-gamma values come from the
/// recurrence `P(a+1, y) = P(a, y) − y^a e^{−y} / Γ(a+1)`.
pub fn noncentral_chi2_cdf(x: f64, k: f64, lambda: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_noncentral(k, lambda)?;
    if x.is_nan() {
        return Err(Error::Domain("x is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return central_chi2_cdf(x, k);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }

    let y = 0.5 * x;
    let h = 0.5 * lambda;
    let mode = h.floor();
    let a_mode = 0.5 * k + mode;

    let w_mode = ln_poisson_mass(mode, h).exp();
    let p_mode = gamma_pq(a_mode, y).0;
    // g(a) = y^a e^{-y} / Γ(a+1)
    let g_mode = ln_poisson_mass(a_mode, y).exp();

    let mut sum = w_mode * p_mode;
    let mut used = 1usize;

    // upwards: weights and P both shrink, so terms decrease monotonically
    let (mut w, mut p, mut g, mut a, mut i) = (w_mode, p_mode, g_mode, a_mode, mode);
    let mut prev = sum;
    while used < cfg.max_terms {
        p = (p - g).max(0.0);
        g *= y / (a + 1.0);
        a += 1.0;
        i += 1.0;
        w *= h / i;
        let term = w * p;
        sum += term;
        used += 1;
        if tail_negligible(term, prev, sum, cfg.rel_tol) {
            break;
        }
        prev = term;
    }

    // downwards: terms rise to the mixture peak (at or below the mode) and
    // then fall, so a small term can only appear once the peak is behind us
    let (mut w, mut p, mut g, mut a, mut i) = (w_mode, p_mode, g_mode, a_mode, mode);
    let mut prev = w_mode * p_mode;
    while i > 0.0 && used < cfg.max_terms {
        g *= a / y;
        a -= 1.0;
        p = (p + g).min(1.0);
        w *= i / h;
        i -= 1.0;
        let term = w * p;
        sum += term;
        used += 1;
        if tail_negligible(term, prev, sum, cfg.rel_tol) {
            break;
        }
        prev = term;
    }

    Ok(sum.clamp(0.0, 1.0))
}

/// True once the current term is decreasing and it, together with a
/// geometric extrapolation of the remaining terms, is below `rel_tol * sum`.
pub(super) fn tail_negligible(term: f64, prev: f64, sum: f64, rel_tol: f64) -> bool {
    if term == 0.0 {
        return true;
    }
    if term >= prev {
        return false;
    }
    let ratio = term / prev;
    term / (1.0 - ratio) <= rel_tol * sum
}

/// Inverse of [`noncentral_chi2_cdf`]: the `x` with `cdf(x) = p`.
///
/// The search brackets the root in `[0, k + λ + 10 sqrt(2k + 4λ) + 10]`,
/// doubling the upper end until it covers `p`, and bisects until the CDF is
/// within [`QUANTILE_TOL`] of `p`.
pub fn noncentral_chi2_quantile(p: f64, k: f64, lambda: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_noncentral(k, lambda)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let cdf = |x: f64| noncentral_chi2_cdf(x, k, lambda, cfg);

    let mut lo = 0.0;
    let mut hi = k + lambda + 10.0 * (2.0 * k + 4.0 * lambda).sqrt() + 10.0;
    let mut doublings = 0;
    loop {
        let f = cdf(hi)?;
        if (f - p).abs() <= QUANTILE_TOL {
            return Ok(hi);
        }
        if f > p {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || hi.is_infinite() {
            return Err(Error::Convergence(format!(
                "could not bracket quantile p={p} for k={k}, lambda={lambda}"
            )));
        }
    }

    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = cdf(mid)?;
        let err = (f - p).abs();
        if err < best.0 {
            best = (err, mid);
        }
        if err <= QUANTILE_TOL {
            return Ok(mid);
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // interval collapsed to adjacent floats; accept if the CDF is close enough
    if best.0 <= 1e-9 {
        Ok(best.1)
    } else {
        Err(Error::Convergence(format!(
            "bisection for p={p}, k={k}, lambda={lambda} stalled with CDF error {}",
            best.0
        )))
    }
}
