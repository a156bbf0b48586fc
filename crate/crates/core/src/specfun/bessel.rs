use super::chi2::tail_negligible;
use super::gamma::ln_gamma;
use super::SeriesConfig;
use crate::{Error, Result};

/// Modified Bessel function of the first kind, `I_a(x)`, from its power series
/// `Σ_i (x/2)^(a+2i) / (i! Γ(a+i+1))`.
///
/// Requires `a >= 0` and `x >= 0`. Returns [`Error::Overflow`] when the value
/// is not representable; [`ln_bessel_i`] works for any argument.
pub fn bessel_i(a: f64, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {a}")));
    }
    let ln_value = ln_bessel_i(a, x, cfg)?;
    let value = ln_value.exp();
    if value.is_infinite() {
        return Err(Error::Overflow(format!(
            "I_{a}({x}) = exp({ln_value}) exceeds f64 range"
        )));
    }
    Ok(value)
}

/// `ln I_a(x)`, summing the series in log space so that arguments in the
/// hundreds (or beyond) do not overflow.
///
/// Orders in `(-1, 0)` are accepted as well, since the chi-squared density
/// with one degree of freedom needs `I_{-1/2}`.
pub fn ln_bessel_i(a: f64, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if a.is_nan() || a <= -1.0 {
        return Err(Error::Domain(format!("Bessel order must be > -1, got {a}")));
    }
    if !(0.0..f64::INFINITY).contains(&x) {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(if a == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }

    let ln_half_x = (0.5 * x).ln();
    let mut ln_term = a * ln_half_x - ln_gamma(a + 1.0);
    // running sum is exp(ln_max) * scaled
    let mut ln_max = ln_term;
    let mut scaled = 1.0;
    for i in 1..cfg.max_terms {
        let i = i as f64;
        let ln_prev = ln_term;
        ln_term += 2.0 * ln_half_x - i.ln() - (a + i).ln();
        if ln_term > ln_max {
            scaled = scaled * (ln_max - ln_term).exp() + 1.0;
            ln_max = ln_term;
        } else {
            let rel = (ln_term - ln_max).exp();
            scaled += rel;
            // terms grow until the peak and then fall off faster than geometrically
            let prev = (ln_prev - ln_max).exp();
            if tail_negligible(rel, prev, scaled, cfg.rel_tol) {
                break;
            }
        }
    }
    Ok(ln_max + scaled.ln())
}
