//! Separable weighted quadratic `Σ_k π_k·½w_k²`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;

/// GD iterates from the closed form and from the recursion, `steps + 1`
/// rows of `c` coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticIterates {
    pub closed_form: Vec<Vec<f64>>,
    pub simulated: Vec<Vec<f64>>,
}

fn check(alpha: f64, pi: &[f64], w0: &[f64]) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", "must be finite and non-negative"));
    }
    if pi.len() != w0.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} weights for {} coordinates",
            pi.len(),
            w0.len()
        )));
    }
    if pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("pi", "weights must be finite and non-negative"));
    }
    if w0.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("initial point"));
    }
    Ok(())
}

/// `w_k(t) = (1 − απ_k)^t·w_k(0)` next to the simulated `w ← w − α·π_k·w`.
pub fn quadratic_gd_iterates(alpha: f64, pi: &[f64], w0: &[f64], steps: usize) -> Result<QuadraticIterates> {
    check(alpha, pi, w0)?;
    let closed_form = (0..=steps)
        .map(|t| {
            pi.iter()
                .zip(w0)
                .map(|(p, w)| math::pow(1.0 - alpha * p, t as f64) * w)
                .collect()
        })
        .collect();
    let mut simulated = Vec::with_capacity(steps + 1);
    let mut w = w0.to_vec();
    simulated.push(w.clone());
    for _ in 0..steps {
        for (wk, p) in w.iter_mut().zip(pi) {
            let grad = p * *wk;
            *wk -= alpha * grad;
        }
        simulated.push(w.clone());
    }
    Ok(QuadraticIterates { closed_form, simulated })
}

/// Sign descent `w ← w − α·sign(π_k·w)`.
pub fn quadratic_sign_iterates(alpha: f64, pi: &[f64], w0: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    check(alpha, pi, w0)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut w = w0.to_vec();
    out.push(w.clone());
    for _ in 0..steps {
        for (wk, p) in w.iter_mut().zip(pi) {
            *wk -= alpha * math::sign(p * *wk);
        }
        out.push(w.clone());
    }
    Ok(out)
}
