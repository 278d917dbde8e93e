//! Log-domain arithmetic on the extended reals.
//!
//! Values are stored as natural logs: `-inf` encodes 0 and `+inf` encodes an
//! infinite quantity. Sums never mix `+inf` with `-inf` in a way that yields
//! NaN; an infinite summand dominates.

/// `log(e^a + e^b)`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Numerically stable `log(sum(exp(x)))`; the empty sum is `-inf`.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `exp` that maps the log encoding back to the linear extended reals.
#[inline]
pub fn to_linear(log_value: f64) -> f64 {
    log_value.exp()
}

/// `q * log_x` with the conventions `0 * anything = 0`, `q * -inf = -inf` for
/// `q > 0` and `+inf` for `q < 0`.
#[inline]
pub fn scale_log(q: f64, log_x: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else if log_x == f64::NEG_INFINITY {
        if q > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        q * log_x
    }
}
