//! Full-batch GD and normalized GD in coefficient space.
//!
//! Both updates stay in the row span of the (bias-augmented) inputs `X̃`, so
//! `W = W₀ + Aᵀ X̃` for an `n × c` coefficient matrix `A`. With the Gram
//! matrix `K = X̃ X̃ᵀ`, the gradient `G = Rᵀ X̃` has coefficients `R` (the
//! logit residuals), `‖G‖² = Σ R ⊙ (K R)` and the logits move by
//! `−α·K·M` for momentum coefficients `M`. One `n × n × c` product per step
//! replaces the forward and backward `n × d × c` products.

use alloc::borrow::Cow;
use alloc::vec::Vec;

use super::step::Family;
use super::train::{evaluation_from, training_weights, Record, TrainConfig, TrajectoryLog};
use crate::dataset::{Dataset, FrequencyGroups};
use crate::error::{Error, Result};
use crate::linalg::{gemm, MatMut, Matrix};
use crate::math;
use crate::model::{
    class_mean_p, forward_from_logits, logit_residuals, logits, traces_from_probs, BlockStats, Forward, LinearModel,
    Samples,
};

struct Gram {
    k: Matrix,
    diag: Vec<f64>,
}

fn gram(x: &Matrix, bias: bool) -> Result<Gram> {
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    gemm(1.0, x.view(), x.view().t(), 0.0, k.view_mut())?;
    if bias {
        for v in k.as_mut_slice() {
            *v += 1.0;
        }
    }
    let diag = (0..n).map(|i| k.get(i, i)).collect();
    Ok(Gram { k, diag })
}

fn block_stats(g: &Gram, ds: &Dataset, eval: &Samples<'_>, fwd: &Forward) -> Result<BlockStats> {
    let r = logit_residuals(eval, fwd);
    let mut kr = Matrix::zeros(r.rows(), r.cols());
    gemm(1.0, g.k.view(), r.view(), 0.0, kr.view_mut())?;
    let c = r.cols();
    let mut sq = alloc::vec![0.0; c];
    for i in 0..r.rows() {
        for (k, acc) in sq.iter_mut().enumerate() {
            *acc += r.get(i, k) * kr.get(i, k);
        }
    }
    Ok(BlockStats {
        grad_norm: sq.iter().map(|v| math::sqrt(v.max(0.0))).collect(),
        hess_trace: traces_from_probs(&fwd.probs, &eval.weights, &g.diag),
        mean_p: class_mean_p(&fwd.probs, eval.labels, &eval.weights),
        freq: ds.freq().probs().to_vec(),
    })
}

pub(crate) fn train_kernel(
    model: &mut LinearModel,
    ds: &Dataset,
    groups: &FrequencyGroups,
    config: &TrainConfig,
) -> Result<TrajectoryLog> {
    let family = config.optimizer.family;
    debug_assert!(matches!(family, Family::Gd | Family::NormalizedGd));
    crate::model::check_groups(groups, ds.num_classes())?;
    let alpha = config.optimizer.alpha;
    let beta = config.optimizer.beta;
    let eval = Samples::of(ds);
    let train_w = training_weights(ds, config.reweight)?;
    let train = Samples {
        weights: Cow::Borrowed(&train_w),
        ..eval.clone()
    };
    let mut z = logits(model, &eval)?;
    let g = gram(ds.inputs(), model.has_bias())?;
    let (n, c) = z.shape();
    let mut coef = Matrix::zeros(n, c);
    let mut mom = Matrix::zeros(n, c);
    let mut kmom = Matrix::zeros(n, c);
    let mut kr = Matrix::zeros(n, c);
    let schedule = config.schedule();
    let mut next = 0usize;
    let mut log = TrajectoryLog {
        family,
        alpha,
        records: Vec::with_capacity(schedule.len()),
        diverged: false,
    };
    let ng = groups.num_groups();
    let diverged = |step: usize| Record {
        step,
        loss: f64::INFINITY,
        group_losses: alloc::vec![None; ng],
        group_mean_p: alloc::vec![None; ng],
        block_stats: None,
        step_size: alpha,
    };
    for step in 0..=config.steps {
        let fwd = match forward_from_logits(z.clone(), eval.labels) {
            Ok(f) => f,
            Err(Error::NonFinite(_)) => {
                log.records.push(diverged(step));
                log.diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if schedule.get(next) == Some(&step) {
            next += 1;
            let stats = if config.block_stats {
                Some(block_stats(&g, ds, &eval, &fwd)?)
            } else {
                None
            };
            let e = evaluation_from(ds, groups, &eval, &fwd, stats);
            if !e.loss.is_finite() {
                log.records.push(diverged(step));
                log.diverged = true;
                break;
            }
            log.records.push(Record {
                step,
                loss: e.loss,
                group_losses: e.group_losses,
                group_mean_p: e.group_mean_p,
                block_stats: e.block_stats,
                step_size: alpha,
            });
        }
        if step == config.steps {
            break;
        }
        let r = logit_residuals(&train, &fwd);
        gemm(1.0, g.k.view(), r.view(), 0.0, kr.view_mut())?;
        let scale = match family {
            Family::NormalizedGd => {
                let sq = math::dot(r.as_slice(), kr.as_slice());
                if sq > 0.0 {
                    1.0 / math::sqrt(sq)
                } else {
                    0.0
                }
            }
            _ => 1.0,
        };
        let it = coef
            .as_mut_slice()
            .iter_mut()
            .zip(mom.as_mut_slice())
            .zip(kmom.as_mut_slice())
            .zip(z.as_mut_slice())
            .zip(r.as_slice().iter().zip(kr.as_slice()));
        for ((((a, m), km), zi), (ri, kri)) in it {
            *m = beta * *m + scale * ri;
            *km = beta * *km + scale * kri;
            *a -= alpha * *m;
            *zi -= alpha * *km;
        }
    }
    // W += Aᵀ X̃
    let d = model.input_dim();
    let cols = model.params().cols();
    {
        let out = MatMut::new(model.params_mut().as_mut_slice(), c, d, cols, 1)?;
        gemm(1.0, coef.view().t(), ds.inputs().view(), 1.0, out)?;
    }
    if model.has_bias() {
        for i in 0..n {
            for k in 0..c {
                let v = model.params().get(k, d) + coef.get(i, k);
                model.params_mut().set(k, d, v);
            }
        }
    }
    Ok(log)
}
