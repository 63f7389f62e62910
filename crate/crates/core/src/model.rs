//! Softmax linear classifier with cross-entropy loss and per-class block
//! analytics.
//!
//! Parameters are stored as one `c × (d + b)` matrix where `b = 1` when the
//! model has a bias: the bias is the last column and multiplies an implicit
//! input coordinate equal to 1. Gradients use the same layout.
//!
//! Gradients are gradients *of the loss*: row `k` is
//! `(1/Σw)·Σ_i w_i (p(x_i)_k − 1{y_i = k}) x_i`, so descent subtracts them.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, FrequencyGroups};
use crate::error::{invalid, Error, Result};
use crate::linalg::{gemm, MatMut, MatRef, Matrix};
use crate::math;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    c: usize,
    d: usize,
    bias: bool,
    params: Matrix,
}

impl LinearModel {
    pub fn zeros(c: usize, d: usize, bias: bool) -> Self {
        LinearModel {
            c,
            d,
            bias,
            params: Matrix::zeros(c, d + bias as usize),
        }
    }

    /// Every parameter (bias included) drawn from `Normal(0, sigma²)`.
    pub fn gaussian(c: usize, d: usize, bias: bool, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid("sigma", "must be finite and non-negative"));
        }
        let mut rng = rng::seeded(seed);
        let mut m = Self::zeros(c, d, bias);
        for v in m.params.as_mut_slice() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sigma * z;
        }
        Ok(m)
    }

    pub fn from_parts(w: &Matrix, bias: Option<&[f64]>) -> Result<Self> {
        let (c, d) = w.shape();
        if let Some(b) = bias {
            if b.len() != c {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "bias of length {} for {c} classes",
                    b.len()
                )));
            }
        }
        let params = Matrix::from_fn(c, d + bias.is_some() as usize, |k, j| {
            if j < d {
                w.get(k, j)
            } else {
                bias.expect("bias column")[k]
            }
        });
        Ok(LinearModel {
            c,
            d,
            bias: bias.is_some(),
            params,
        })
    }

    /// Wrap a parameter matrix already in the `c × (d + b)` layout.
    pub fn from_params(params: Matrix, bias: bool) -> Result<Self> {
        let (c, cols) = params.shape();
        if cols < 1 + bias as usize {
            return Err(Error::ShapeMismatch(alloc::format!(
                "parameter matrix with {cols} columns"
            )));
        }
        Ok(LinearModel {
            c,
            d: cols - bias as usize,
            bias,
            params,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.c
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn params(&self) -> &Matrix {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Matrix {
        &mut self.params
    }

    /// The `c × d` weight matrix without the bias column.
    pub fn weights(&self) -> Matrix {
        Matrix::from_fn(self.c, self.d, |k, j| self.params.get(k, j))
    }

    pub fn bias(&self) -> Option<Vec<f64>> {
        self.bias
            .then(|| (0..self.c).map(|k| self.params.get(k, self.d)).collect())
    }

    fn weight_view(&self) -> MatRef<'_> {
        MatRef::new(self.params.as_slice(), self.c, self.d, self.params.cols(), 1).expect("parameter layout")
    }

    fn check(&self, ds_c: usize, ds_d: usize) -> Result<()> {
        if self.c != ds_c || self.d != ds_d {
            return Err(Error::ShapeMismatch(alloc::format!(
                "model is {}x{}, data has {ds_c} classes and dimension {ds_d}",
                self.c,
                self.d
            )));
        }
        Ok(())
    }

    /// Class probabilities for one input.
    pub fn predict_probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::ShapeMismatch(alloc::format!(
                "input of length {} for dimension {}",
                x.len(),
                self.d
            )));
        }
        let logits: Vec<f64> = (0..self.c)
            .map(|k| {
                let row = self.params.row(k);
                math::dot(&row[..self.d], x) + if self.bias { row[self.d] } else { 0.0 }
            })
            .collect();
        softmax(&logits)
    }
}

/// Shift-stable softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| math::exp(z - max)).collect();
    let s = math::sum(&e);
    Ok(e.iter().map(|v| v / s).collect())
}

/// Inputs, labels and the weights a computation should use.
#[derive(Debug, Clone)]
pub struct Samples<'a> {
    pub inputs: &'a Matrix,
    pub labels: &'a [u32],
    pub weights: Cow<'a, [f64]>,
    pub num_classes: usize,
}

impl<'a> Samples<'a> {
    pub fn of(ds: &'a Dataset) -> Self {
        Samples {
            inputs: ds.inputs(),
            labels: ds.labels(),
            weights: ds.weights_or_ones(),
            num_classes: ds.num_classes(),
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.labels.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} weights for {} samples",
                weights.len(),
                self.labels.len()
            )));
        }
        self.weights = Cow::Owned(weights);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        math::sum(&self.weights)
    }
}

/// Probabilities and per-sample losses at the current parameters.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `n × c` predicted probabilities.
    pub probs: Matrix,
    /// `−log p(x_i)_{y_i}`, computed as `logsumexp − logit_y`.
    pub losses: Vec<f64>,
}

impl Forward {
    /// Correct-class probabilities `p(x_i)_{y_i}`.
    pub fn correct_probs(&self, labels: &[u32]) -> Vec<f64> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &y)| self.probs.get(i, y as usize))
            .collect()
    }
}

/// `n × c` logits `X·Wᵀ (+ b)`.
pub fn logits(model: &LinearModel, s: &Samples<'_>) -> Result<Matrix> {
    model.check(s.num_classes, s.inputs.cols())?;
    let mut z = Matrix::zeros(s.len(), model.c);
    gemm(1.0, s.inputs.view(), model.weight_view().t(), 0.0, z.view_mut())?;
    if let Some(b) = model.bias() {
        for i in 0..s.len() {
            for (zk, bk) in z.row_mut(i).iter_mut().zip(&b) {
                *zk += bk;
            }
        }
    }
    Ok(z)
}

/// Softmax and cross-entropy from logits; consumes the logit buffer.
pub fn forward_from_logits(mut z: Matrix, labels: &[u32]) -> Result<Forward> {
    let mut losses = Vec::with_capacity(z.rows());
    for (i, &y) in labels.iter().enumerate() {
        let row = z.row_mut(i);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let zy = row[y as usize];
        let mut total = 0.0;
        let mut rest = 0.0;
        for (k, v) in row.iter_mut().enumerate() {
            *v = math::exp(*v - max);
            total += *v;
            if k != y as usize {
                rest += *v;
            }
        }
        for v in row.iter_mut() {
            *v /= total;
        }
        // ln_1p keeps tiny losses accurate when the label logit is the max
        losses.push(if zy == max {
            math::ln_1p(rest)
        } else {
            math::ln(total) + max - zy
        });
    }
    Ok(Forward { probs: z, losses })
}

pub fn forward(model: &LinearModel, s: &Samples<'_>) -> Result<Forward> {
    forward_from_logits(logits(model, s)?, s.labels)
}

/// Rows `w_i (p_i − e_{y_i}) / Σw`: the loss gradient with respect to the
/// logits.
pub fn logit_residuals(s: &Samples<'_>, fwd: &Forward) -> Matrix {
    let total = s.total_weight();
    let mut r = fwd.probs.clone();
    for i in 0..s.len() {
        let row = r.row_mut(i);
        let y = s.labels[i] as usize;
        // p_y − 1 as −Σ_{k≠y} p_k keeps precision once p_y ≈ 1
        let rest: f64 = row.iter().enumerate().filter(|&(k, _)| k != y).map(|(_, v)| v).sum();
        row[y] = -rest;
        let scale = s.weights[i] / total;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    r
}

/// Weighted mean of per-sample values.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, w) in values.iter().zip(weights) {
        num += w * v;
        den += w;
    }
    num / den
}

/// Gradient in parameter layout from a forward pass, using `s.weights`.
pub fn gradient_from(model: &LinearModel, s: &Samples<'_>, fwd: &Forward) -> Result<Matrix> {
    model.check(s.num_classes, s.inputs.cols())?;
    let n = s.len();
    let c = model.c;
    let d = model.d;
    let r = logit_residuals(s, fwd);
    let cols = model.params.cols();
    let mut g = Matrix::zeros(c, cols);
    {
        let out = MatMut::new(g.as_mut_slice(), c, d, cols, 1)?;
        gemm(1.0, r.view().t(), s.inputs.view(), 0.0, out)?;
    }
    if model.bias {
        for i in 0..n {
            for k in 0..c {
                let v = g.get(k, d) + r.get(i, k);
                g.set(k, d, v);
            }
        }
    }
    Ok(g)
}

pub fn mean_loss(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    Ok(weighted_mean(&f.losses, &s.weights))
}

pub fn per_sample_losses(model: &LinearModel, ds: &Dataset) -> Result<Vec<f64>> {
    Ok(forward(model, &Samples::of(ds))?.losses)
}

/// Weighted mean of per-sample values within each group; `None` for groups
/// without samples.
pub fn group_means(values: &[f64], labels: &[u32], weights: &[f64], groups: &FrequencyGroups) -> Vec<Option<f64>> {
    let g = groups.num_groups();
    let mut num = vec![0.0; g];
    let mut den = vec![0.0; g];
    for i in 0..labels.len() {
        let gi = groups.group_of(labels[i] as usize);
        num[gi] += weights[i] * values[i];
        den[gi] += weights[i];
    }
    num.iter().zip(&den).map(|(n, d)| (*d > 0.0).then(|| n / d)).collect()
}

pub fn per_group_loss(model: &LinearModel, ds: &Dataset, groups: &FrequencyGroups) -> Result<Vec<Option<f64>>> {
    let s = Samples::of(ds);
    check_groups(groups, ds.num_classes())?;
    let f = forward(model, &s)?;
    Ok(group_means(&f.losses, s.labels, &s.weights, groups))
}

pub(crate) fn check_groups(groups: &FrequencyGroups, c: usize) -> Result<()> {
    if groups.assignment().len() != c {
        return Err(Error::ShapeMismatch(alloc::format!(
            "grouping covers {} classes, data has {c}",
            groups.assignment().len()
        )));
    }
    Ok(())
}

pub fn full_gradient(model: &LinearModel, ds: &Dataset) -> Result<Matrix> {
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    gradient_from(model, &s, &f)
}

/// `‖x_i‖²` plus 1 for the bias coordinate.
pub(crate) fn augmented_sqnorms(x: &Matrix, bias: bool) -> Vec<f64> {
    (0..x.rows())
        .map(|i| math::dot(x.row(i), x.row(i)) + if bias { 1.0 } else { 0.0 })
        .collect()
}

pub(crate) fn hess_traces_from(model: &LinearModel, s: &Samples<'_>, fwd: &Forward) -> Vec<f64> {
    let sq = augmented_sqnorms(s.inputs, model.bias);
    traces_from_probs(&fwd.probs, &s.weights, &sq)
}

/// `(1/Σw)·Σ_i w_i p_ik (1 − p_ik) sq_i` for every class `k`.
pub(crate) fn traces_from_probs(probs: &Matrix, weights: &[f64], sq: &[f64]) -> Vec<f64> {
    let c = probs.cols();
    let total = math::sum(weights);
    let mut t = vec![0.0; c];
    for i in 0..probs.rows() {
        let p = probs.row(i);
        let scale = weights[i] * sq[i];
        for k in 0..c {
            t[k] += scale * p[k] * (1.0 - p[k]);
        }
    }
    for v in &mut t {
        *v /= total;
    }
    t
}

/// Per-class weighted mean of `p(x_i)_{y_i}`; `None` for empty classes.
pub(crate) fn class_mean_p(probs: &Matrix, labels: &[u32], weights: &[f64]) -> Vec<Option<f64>> {
    let c = probs.cols();
    let mut num = vec![0.0; c];
    let mut den = vec![0.0; c];
    for (i, &y) in labels.iter().enumerate() {
        let y = y as usize;
        num[y] += weights[i] * probs.get(i, y);
        den[y] += weights[i];
    }
    num.iter().zip(&den).map(|(n, d)| (*d > 0.0).then(|| n / d)).collect()
}

/// `Tr ∇²_{w_k} L` for every class.
pub fn block_hessian_traces(model: &LinearModel, ds: &Dataset) -> Result<Vec<f64>> {
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    Ok(hess_traces_from(model, &s, &f))
}

/// Traces of the Hessian blocks `(k, j)` for `k, j` in `subset`:
/// `T[k][j] = (1/Σw)·Σ_i w_i p_ik (δ_kj − p_ij) ‖x̃_i‖²`.
pub fn offdiag_block_traces(model: &LinearModel, ds: &Dataset, subset: &[usize]) -> Result<Matrix> {
    check_subset(subset, model.c)?;
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    let sq = augmented_sqnorms(s.inputs, model.bias);
    let total = s.total_weight();
    let m = subset.len();
    let mut t = Matrix::zeros(m, m);
    for i in 0..s.len() {
        let p = f.probs.row(i);
        let scale = s.weights[i] * sq[i];
        for (a, &k) in subset.iter().enumerate() {
            let pk = p[k];
            let row = t.row_mut(a);
            for (b, &j) in subset.iter().enumerate() {
                let delta = if j == k { 1.0 } else { 0.0 };
                row[b] += scale * pk * (delta - p[j]);
            }
        }
    }
    for v in t.as_mut_slice() {
        *v /= total;
    }
    Ok(t)
}

pub(crate) fn check_subset(subset: &[usize], c: usize) -> Result<()> {
    let mut seen = vec![false; c];
    for &k in subset {
        if k >= c {
            return Err(invalid("class_subset", alloc::format!("class {k} out of range")));
        }
        if seen[k] {
            return Err(Error::DuplicateIndex(k));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Per-class gradient norm, Hessian trace and mean correct-class probability.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub grad_norm: Vec<f64>,
    pub hess_trace: Vec<f64>,
    /// `None` for classes without samples.
    pub mean_p: Vec<Option<f64>>,
    pub freq: Vec<f64>,
}

pub fn block_stats(model: &LinearModel, ds: &Dataset) -> Result<BlockStats> {
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    block_stats_from(model, ds, &s, &f)
}

pub(crate) fn block_stats_from(model: &LinearModel, ds: &Dataset, s: &Samples<'_>, f: &Forward) -> Result<BlockStats> {
    let g = gradient_from(model, s, f)?;
    let grad_norm = (0..model.c).map(|k| math::norm2(g.row(k))).collect();
    let hess_trace = hess_traces_from(model, s, f);
    let mean_p = class_mean_p(&f.probs, s.labels, &s.weights);
    Ok(BlockStats {
        grad_norm,
        hess_trace,
        mean_p,
        freq: ds.freq().probs().to_vec(),
    })
}

/// Analytic gradient and Hessian traces at `W = 0`, with the data moments
/// they are built from. Means are weighted by sample weight; with a bias the
/// inputs carry an extra coordinate equal to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InitAnalytics {
    /// Row `k` = `(1/c)·x̄ − π_k·x̄^k` (gradient of the loss).
    pub grad_blocks: Matrix,
    /// `(1/c)(1 − 1/c)·Tr(H̄)` for every class.
    pub hess_traces: Vec<f64>,
    pub xbar: Vec<f64>,
    /// Row `k` is the mean input of class `k`.
    pub xbar_k: Matrix,
    /// Mean of `‖x_i‖²`.
    pub tr_hbar: f64,
    /// Mean of `‖x_i‖²` within each class.
    pub tr_hbar_k: Vec<f64>,
}

pub fn init_analytics(ds: &Dataset, bias: bool) -> Result<InitAnalytics> {
    let c = ds.num_classes();
    let d = ds.input_dim();
    let dim = d + bias as usize;
    let w = ds.weights_or_ones();
    let x = ds.inputs();
    let sq = augmented_sqnorms(x, bias);
    let mut class_mass = vec![0.0; c];
    let mut sums = Matrix::zeros(c, dim);
    let mut sq_k = vec![0.0; c];
    for (i, &y) in ds.labels().iter().enumerate() {
        let y = y as usize;
        class_mass[y] += w[i];
        sq_k[y] += w[i] * sq[i];
        let row = sums.row_mut(y);
        for (acc, v) in row[..d].iter_mut().zip(x.row(i)) {
            *acc += w[i] * v;
        }
        if bias {
            row[d] += w[i];
        }
    }
    if let Some(k) = class_mass.iter().position(|&m| m <= 0.0) {
        return Err(Error::EmptyClass(k));
    }
    let total = math::sum(&class_mass);
    let mut xbar = vec![0.0; dim];
    for k in 0..c {
        for (acc, v) in xbar.iter_mut().zip(sums.row(k)) {
            *acc += v;
        }
    }
    for v in &mut xbar {
        *v /= total;
    }
    let xbar_k = Matrix::from_fn(c, dim, |k, j| sums.get(k, j) / class_mass[k]);
    let tr_hbar = math::sum(&sq_k) / total;
    let tr_hbar_k: Vec<f64> = sq_k.iter().zip(&class_mass).map(|(s, m)| s / m).collect();
    let cf = c as f64;
    let grad_blocks = Matrix::from_fn(c, dim, |k, j| xbar[j] / cf - class_mass[k] / total * xbar_k.get(k, j));
    let hess_traces = vec![(1.0 / cf) * (1.0 - 1.0 / cf) * tr_hbar; c];
    Ok(InitAnalytics {
        grad_blocks,
        hess_traces,
        xbar,
        xbar_k,
        tr_hbar,
        tr_hbar_k,
    })
}
