use alloc::vec::Vec;

use crate::dataset::FrequencySpec;
use crate::error::{Error, Result};
use crate::math;

/// Per-class loss weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Reweight {
    #[default]
    None,
    InvFreq,
    InvSqrtFreq,
}

/// Class weights `1`, `1/π_k` or `1/√π_k`, rescaled so the average sample
/// weight `Σ_k π_k ω_k` is 1.
pub fn reweight_weights(freq: &FrequencySpec, scheme: Reweight) -> Result<Vec<f64>> {
    let probs = freq.probs();
    if scheme != Reweight::None {
        if let Some(k) = probs.iter().position(|&p| p <= 0.0) {
            return Err(Error::EmptyClass(k));
        }
    }
    let raw: Vec<f64> = probs
        .iter()
        .map(|&p| match scheme {
            Reweight::None => 1.0,
            Reweight::InvFreq => 1.0 / p,
            Reweight::InvSqrtFreq => 1.0 / math::sqrt(p),
        })
        .collect();
    let mean = math::dot(probs, &raw);
    Ok(raw.iter().map(|w| w / mean).collect())
}
