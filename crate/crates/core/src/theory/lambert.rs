//! Principal branch of the Lambert W function.

use crate::error::{Error, Result};
use crate::math;

const INV_E: f64 = 0.367_879_441_171_442_33;
const E: f64 = core::f64::consts::E;
const MAX_ITER: usize = 40;

/// `W₀(x)`: the solution `w ≥ −1` of `w·e^w = x`, for `x ≥ −1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E {
        return Err(Error::LambertDomain { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == -INV_E {
        return Ok(-1.0);
    }
    let mut w = initial_guess(x);
    for _ in 0..MAX_ITER {
        let ew = math::exp(w);
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if math::abs(step) <= 4.0 * f64::EPSILON * math::abs(w).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.32 {
        // series around the branch point
        let p = math::sqrt(2.0 * (E * x + 1.0));
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x <= E {
        let l = math::ln_1p(x);
        l * (1.0 - math::ln_1p(l) / (2.0 + l))
    } else {
        let l1 = math::ln(x);
        let l2 = math::ln(l1);
        l1 - l2 + l2 / l1
    }
}

/// `W₀(e^u)` without forming `e^u`: solves `w + ln w = u`.
pub fn lambert_w0_exp(u: f64) -> Result<f64> {
    if u.is_nan() {
        return Err(Error::LambertDomain { x: u });
    }
    if u <= 20.0 {
        return lambert_w0(math::exp(u));
    }
    if u == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let lu = math::ln(u);
    let mut w = u - lu + lu / u;
    for _ in 0..MAX_ITER {
        // Newton on g(w) = w + ln w − u
        let g = w + math::ln(w) - u;
        let step = g * w / (w + 1.0);
        w -= step;
        if math::abs(step) <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    Ok(w)
}
