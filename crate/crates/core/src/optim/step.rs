use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

/// Update family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Gd,
    NormalizedGd,
    Sign,
    Adam,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Gd, Family::NormalizedGd, Family::Sign, Family::Adam];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gd => "gd",
            Family::NormalizedGd => "normalized_gd",
            Family::Sign => "sign",
            Family::Adam => "adam",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Hyperparameters of one optimizer; `beta` is the heavy-ball momentum of
/// the non-Adam families.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct OptimizerConfig {
    pub family: Family,
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub adam: AdamParams,
}

impl OptimizerConfig {
    pub fn new(family: Family, alpha: f64) -> Self {
        OptimizerConfig {
            family,
            alpha,
            beta: 0.0,
            adam: AdamParams::default(),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(invalid("beta", "must lie in [0, 1)"));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) {
            return Err(invalid("adam", "beta1 and beta2 must lie in [0, 1)"));
        }
        if !(a.eps > 0.0 && a.eps.is_finite()) {
            return Err(invalid("adam.eps", "must be positive"));
        }
        Ok(())
    }
}

/// Optimizer hyperparameters plus the running buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub momentum_buffer: Vec<f64>,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub step_count: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, num_params: usize) -> Result<Self> {
        config.validate()?;
        let adam = config.family == Family::Adam;
        Ok(OptimizerState {
            config,
            momentum_buffer: if adam { Vec::new() } else { vec![0.0; num_params] },
            adam_m: if adam { vec![0.0; num_params] } else { Vec::new() },
            adam_v: if adam { vec![0.0; num_params] } else { Vec::new() },
            step_count: 0,
        })
    }

    /// Apply one update for gradient `grad`.
    pub fn update(&mut self, grad: &[f64], params: &mut [f64]) {
        match self.config.family {
            Family::Adam => adam_step(self, grad, params),
            family => {
                let d = direction(grad, family);
                momentum_step(self, &d, params);
            }
        }
    }
}

/// Update direction: `g`, `g/‖g‖₂` over all parameters (zero when `g = 0`),
/// or the elementwise sign. Adam has no stand-alone direction and gets `g`.
pub fn direction(grad: &[f64], family: Family) -> Vec<f64> {
    match family {
        Family::Gd | Family::Adam => grad.to_vec(),
        Family::NormalizedGd => {
            let norm = math::norm2(grad);
            if norm == 0.0 {
                vec![0.0; grad.len()]
            } else {
                grad.iter().map(|g| g / norm).collect()
            }
        }
        Family::Sign => grad.iter().map(|&g| math::sign(g)).collect(),
    }
}

/// `m ← β·m + d`, `x ← x − α·m`.
pub fn momentum_step(state: &mut OptimizerState, d: &[f64], params: &mut [f64]) {
    debug_assert_ne!(state.config.family, Family::Adam);
    let OptimizerConfig { alpha, beta, .. } = state.config;
    for ((m, x), di) in state.momentum_buffer.iter_mut().zip(params.iter_mut()).zip(d) {
        *m = beta * *m + di;
        *x -= alpha * *m;
    }
    state.step_count += 1;
}

/// Adam with bias-corrected moments.
pub fn adam_step(state: &mut OptimizerState, grad: &[f64], params: &mut [f64]) {
    debug_assert_eq!(state.config.family, Family::Adam);
    state.step_count += 1;
    let AdamParams { beta1, beta2, eps } = state.config.adam;
    let alpha = state.config.alpha;
    let t = state.step_count as f64;
    let c1 = 1.0 - math::pow(beta1, t);
    let c2 = 1.0 - math::pow(beta2, t);
    for (((m, v), x), &g) in state
        .adam_m
        .iter_mut()
        .zip(state.adam_v.iter_mut())
        .zip(params.iter_mut())
        .zip(grad)
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *x -= alpha * m_hat / (math::sqrt(v_hat) + eps);
    }
}
