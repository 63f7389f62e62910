use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::kernel;
use super::reweight::{reweight_weights, Reweight};
use super::step::{Family, OptimizerConfig, OptimizerState};
use crate::dataset::{Dataset, FrequencyGroups};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::model::{
    block_stats_from, forward, gradient_from, group_means, weighted_mean, BlockStats, Forward, LinearModel, Samples,
};
use crate::rng::{self, LabRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum BatchMode {
    #[default]
    Full,
    /// Without-replacement batches from a fresh shuffle every epoch; the last
    /// batch of an epoch may be smaller.
    Minibatch { size: usize },
}

/// How the linear model is trained.
///
/// `Kernel` keeps the parameters as `W₀ + Aᵀ·X̃` and updates the `n × c`
/// coefficients `A` and the logits directly, which needs one `n × n × c`
/// product per step instead of two `n × d × c` ones. It applies to
/// full-batch GD and normalized GD. `Auto` picks it when `n < d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Engine {
    #[default]
    Auto,
    Primal,
    Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub steps: usize,
    pub batch: BatchMode,
    pub reweight: Reweight,
    /// Steps after which the model is evaluated; 0 and `steps` are always
    /// included.
    pub checkpoints: Vec<usize>,
    /// Minibatch shuffling seed.
    pub seed: u64,
    /// Record per-class [`BlockStats`] at checkpoints.
    pub block_stats: bool,
    pub engine: Engine,
}

impl TrainConfig {
    pub fn new(optimizer: OptimizerConfig, steps: usize) -> Self {
        TrainConfig {
            optimizer,
            steps,
            batch: BatchMode::Full,
            reweight: Reweight::None,
            checkpoints: Vec::new(),
            seed: 0,
            block_stats: false,
            engine: Engine::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if let Some(&s) = self.checkpoints.iter().find(|&&s| s > self.steps) {
            return Err(invalid(
                "checkpoints",
                alloc::format!("checkpoint {s} exceeds {} steps", self.steps),
            ));
        }
        if let BatchMode::Minibatch { size: 0 } = self.batch {
            return Err(invalid("batch.size", "must be at least 1"));
        }
        Ok(())
    }

    /// Sorted, deduplicated checkpoints including 0 and `steps`.
    pub fn schedule(&self) -> Vec<usize> {
        let mut s = self.checkpoints.clone();
        s.push(0);
        s.push(self.steps);
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// `0, every, 2·every, …, steps`.
pub fn checkpoints_every(steps: usize, every: usize) -> Vec<usize> {
    let every = every.max(1);
    let mut v: Vec<usize> = (0..=steps).step_by(every).collect();
    if v.last() != Some(&steps) {
        v.push(steps);
    }
    v
}

/// Roughly `per_decade` log-spaced steps per factor of ten, plus 0.
pub fn checkpoints_log(steps: usize, per_decade: usize) -> Vec<usize> {
    let mut v = vec![0];
    if steps == 0 {
        return v;
    }
    let decades = crate::math::log10(steps as f64);
    let points = (decades * per_decade.max(1) as f64) as usize;
    for i in 0..=points {
        let s = crate::math::pow(10.0, i as f64 / per_decade.max(1) as f64);
        v.push((crate::math::floor(s + 0.5) as usize).min(steps));
    }
    v.push(steps);
    v.sort_unstable();
    v.dedup();
    v
}

/// Model state at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    /// Loss under the dataset's own sample weights (reweighting only affects
    /// the update); `+inf` on the record that flags divergence.
    pub loss: f64,
    pub group_losses: Vec<Option<f64>>,
    /// Mean correct-class probability per group.
    pub group_mean_p: Vec<Option<f64>>,
    pub block_stats: Option<BlockStats>,
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub family: Family,
    pub alpha: f64,
    pub records: Vec<Record>,
    pub diverged: bool,
}

impl TrajectoryLog {
    pub fn initial_loss(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.loss)
    }

    pub fn final_record(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn final_loss(&self) -> f64 {
        if self.diverged {
            return f64::INFINITY;
        }
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }

    /// Diverged, or some recorded loss is above the initial one.
    pub fn unstable(&self) -> bool {
        let init = self.initial_loss();
        // NaN counts as unstable
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let worse = |r: &Record| !(r.loss <= init);
        self.diverged || self.records.iter().any(worse)
    }
}

/// Checkpoint evaluation of an [`Objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub group_losses: Vec<Option<f64>>,
    pub group_mean_p: Vec<Option<f64>>,
    pub block_stats: Option<BlockStats>,
}

impl Evaluation {
    pub fn scalar(loss: f64) -> Self {
        Evaluation {
            loss,
            group_losses: Vec::new(),
            group_mean_p: Vec::new(),
            block_stats: None,
        }
    }
}

/// A differentiable training problem over a flat parameter vector.
pub trait Objective {
    fn num_params(&self) -> usize;

    /// Samples available for minibatching.
    fn num_samples(&self) -> usize;

    fn evaluate(&mut self, params: &[f64], block_stats: bool) -> Result<Evaluation>;

    /// Training-loss gradient on `batch` (all samples when `None`).
    fn gradient(&mut self, params: &[f64], batch: Option<&[usize]>, out: &mut [f64]) -> Result<()>;
}

struct BatchSampler {
    rng: LabRng,
    order: Vec<usize>,
    pos: usize,
    size: usize,
}

impl BatchSampler {
    fn new(n: usize, size: usize, seed: u64) -> Self {
        BatchSampler {
            rng: rng::seeded(seed),
            order: (0..n).collect(),
            pos: n,
            size,
        }
    }

    fn next(&mut self) -> &[usize] {
        if self.pos >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let end = (self.pos + self.size).min(self.order.len());
        let start = self.pos;
        self.pos = end;
        &self.order[start..end]
    }
}

fn diverged_record(step: usize, groups: usize, alpha: f64) -> Record {
    Record {
        step,
        loss: f64::INFINITY,
        group_losses: vec![None; groups],
        group_mean_p: vec![None; groups],
        block_stats: None,
        step_size: alpha,
    }
}

fn record(step: usize, e: Evaluation, alpha: f64) -> Record {
    Record {
        step,
        loss: e.loss,
        group_losses: e.group_losses,
        group_mean_p: e.group_mean_p,
        block_stats: e.block_stats,
        step_size: alpha,
    }
}

/// Run the configured optimizer on any [`Objective`], updating `params` in
/// place. A non-finite loss or gradient stops the run and flags it diverged.
pub fn run_objective<O: Objective>(obj: &mut O, params: &mut [f64], config: &TrainConfig) -> Result<TrajectoryLog> {
    config.validate()?;
    if params.len() != obj.num_params() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} parameters for an objective with {}",
            params.len(),
            obj.num_params()
        )));
    }
    let alpha = config.optimizer.alpha;
    let mut state = OptimizerState::new(config.optimizer, params.len())?;
    let schedule = config.schedule();
    let mut next = 0usize;
    let mut sampler = match config.batch {
        BatchMode::Full => None,
        BatchMode::Minibatch { size } => Some(BatchSampler::new(obj.num_samples(), size, config.seed)),
    };
    let mut grad = vec![0.0; params.len()];
    let mut log = TrajectoryLog {
        family: config.optimizer.family,
        alpha,
        records: Vec::with_capacity(schedule.len()),
        diverged: false,
    };
    let mut groups = 0;
    for step in 0..=config.steps {
        if schedule.get(next) == Some(&step) {
            next += 1;
            match obj.evaluate(params, config.block_stats) {
                Ok(e) if e.loss.is_finite() => {
                    groups = e.group_losses.len();
                    log.records.push(record(step, e, alpha));
                }
                Ok(_) | Err(Error::NonFinite(_)) => {
                    log.records.push(diverged_record(step, groups, alpha));
                    log.diverged = true;
                    return Ok(log);
                }
                Err(e) => return Err(e),
            }
        }
        if step == config.steps {
            break;
        }
        let batch = sampler.as_mut().map(|s| s.next());
        let ok = match obj.gradient(params, batch, &mut grad) {
            Ok(()) => grad.iter().all(|g| g.is_finite()),
            Err(Error::NonFinite(_)) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            if log.records.last().map(|r| r.step) != Some(step) {
                log.records.push(diverged_record(step, groups, alpha));
            } else if let Some(r) = log.records.last_mut() {
                r.loss = f64::INFINITY;
            }
            log.diverged = true;
            return Ok(log);
        }
        state.update(&grad, params);
    }
    Ok(log)
}

/// Checkpoint summary from a full forward pass.
pub(crate) fn evaluation_from(
    ds: &Dataset,
    groups: &FrequencyGroups,
    eval: &Samples<'_>,
    fwd: &Forward,
    block_stats: Option<BlockStats>,
) -> Evaluation {
    let correct = fwd.correct_probs(eval.labels);
    Evaluation {
        loss: weighted_mean(&fwd.losses, &eval.weights),
        group_losses: group_means(&fwd.losses, ds.labels(), &eval.weights, groups),
        group_mean_p: group_means(&correct, ds.labels(), &eval.weights, groups),
        block_stats,
    }
}

/// Per-sample training weights: sample weight times class weight.
pub(crate) fn training_weights(ds: &Dataset, scheme: Reweight) -> Result<Vec<f64>> {
    let omega = reweight_weights(ds.freq(), scheme)?;
    let base = ds.weights_or_ones();
    Ok(ds
        .labels()
        .iter()
        .zip(base.iter())
        .map(|(&y, w)| w * omega[y as usize])
        .collect())
}

/// The softmax linear model as an [`Objective`].
pub struct LinearObjective<'a> {
    ds: &'a Dataset,
    groups: &'a FrequencyGroups,
    eval: Samples<'a>,
    train_weights: Vec<f64>,
    scratch: LinearModel,
    /// Forward pass of the last `evaluate`, reused by a following full-batch
    /// `gradient` call at the same parameters.
    cached: Option<Forward>,
}

impl<'a> LinearObjective<'a> {
    pub fn new(model: &LinearModel, ds: &'a Dataset, reweight: Reweight) -> Result<Self> {
        Self::with_groups(model, ds, ds.groups(), reweight)
    }

    pub fn with_groups(
        model: &LinearModel,
        ds: &'a Dataset,
        groups: &'a FrequencyGroups,
        reweight: Reweight,
    ) -> Result<Self> {
        if model.num_classes() != ds.num_classes() || model.input_dim() != ds.input_dim() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "model is {}x{}, data has {} classes and dimension {}",
                model.num_classes(),
                model.input_dim(),
                ds.num_classes(),
                ds.input_dim()
            )));
        }
        crate::model::check_groups(groups, ds.num_classes())?;
        Ok(LinearObjective {
            ds,
            groups,
            eval: Samples::of(ds),
            train_weights: training_weights(ds, reweight)?,
            scratch: model.clone(),
            cached: None,
        })
    }

    fn load(&mut self, params: &[f64]) {
        self.scratch.params_mut().as_mut_slice().copy_from_slice(params);
    }

    pub fn into_model(self) -> LinearModel {
        self.scratch
    }
}

impl Objective for LinearObjective<'_> {
    fn num_params(&self) -> usize {
        self.scratch.params().as_slice().len()
    }

    fn num_samples(&self) -> usize {
        self.ds.num_samples()
    }

    fn evaluate(&mut self, params: &[f64], block_stats: bool) -> Result<Evaluation> {
        self.cached = None;
        self.load(params);
        let fwd = forward(&self.scratch, &self.eval)?;
        let stats = if block_stats {
            Some(block_stats_from(&self.scratch, self.ds, &self.eval, &fwd)?)
        } else {
            None
        };
        let e = evaluation_from(self.ds, self.groups, &self.eval, &fwd, stats);
        self.cached = Some(fwd);
        Ok(e)
    }

    fn gradient(&mut self, params: &[f64], batch: Option<&[usize]>, out: &mut [f64]) -> Result<()> {
        let cached = self.cached.take();
        self.load(params);
        let g = match batch {
            None => {
                let train = Samples {
                    weights: alloc::borrow::Cow::Borrowed(&self.train_weights),
                    ..self.eval.clone()
                };
                let fwd = match cached {
                    Some(f) => f,
                    None => forward(&self.scratch, &train)?,
                };
                gradient_from(&self.scratch, &train, &fwd)?
            }
            Some(idx) => {
                let x = self.ds.inputs();
                let bx = Matrix::from_fn(idx.len(), x.cols(), |i, j| x.get(idx[i], j));
                let by: Vec<u32> = idx.iter().map(|&i| self.ds.labels()[i]).collect();
                let bw: Vec<f64> = idx.iter().map(|&i| self.train_weights[i]).collect();
                let s = Samples {
                    inputs: &bx,
                    labels: &by,
                    weights: alloc::borrow::Cow::Owned(bw),
                    num_classes: self.ds.num_classes(),
                };
                let fwd = forward(&self.scratch, &s)?;
                gradient_from(&self.scratch, &s, &fwd)?
            }
        };
        out.copy_from_slice(g.as_slice());
        Ok(())
    }
}

/// Train `model` on `ds` in place and return the checkpoint log.
pub fn train(model: &mut LinearModel, ds: &Dataset, config: &TrainConfig) -> Result<TrajectoryLog> {
    train_with_groups(model, ds, ds.groups(), config)
}

pub fn train_with_groups(
    model: &mut LinearModel,
    ds: &Dataset,
    groups: &FrequencyGroups,
    config: &TrainConfig,
) -> Result<TrajectoryLog> {
    config.validate()?;
    let linear_family = matches!(config.optimizer.family, Family::Gd | Family::NormalizedGd);
    let full = config.batch == BatchMode::Full;
    let dim = model.params().cols();
    let use_kernel = match config.engine {
        Engine::Primal => false,
        Engine::Kernel => {
            if !(linear_family && full) {
                return Err(invalid(
                    "engine",
                    "the kernel engine needs full-batch gd or normalized_gd",
                ));
            }
            true
        }
        Engine::Auto => linear_family && full && ds.num_samples() < dim,
    };
    if use_kernel {
        return kernel::train_kernel(model, ds, groups, config);
    }
    let mut obj = LinearObjective::with_groups(model, ds, groups, config.reweight)?;
    let mut params = model.params().as_slice().to_vec();
    let log = run_objective(&mut obj, &mut params, config)?;
    model.params_mut().as_mut_slice().copy_from_slice(&params);
    Ok(log)
}

/// Separable quadratic `Σ_k π_k·½w_k²` as an [`Objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub weights: Vec<f64>,
}

impl Objective for QuadraticObjective {
    fn num_params(&self) -> usize {
        self.weights.len()
    }

    fn num_samples(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&mut self, params: &[f64], _block_stats: bool) -> Result<Evaluation> {
        let mut loss = 0.0;
        for (p, w) in self.weights.iter().zip(params) {
            loss += 0.5 * p * w * w;
        }
        Ok(Evaluation {
            loss,
            group_losses: self
                .weights
                .iter()
                .zip(params)
                .map(|(p, w)| Some(0.5 * p * w * w))
                .collect(),
            group_mean_p: Vec::new(),
            block_stats: None,
        })
    }

    fn gradient(&mut self, params: &[f64], batch: Option<&[usize]>, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        match batch {
            None => {
                for ((o, p), w) in out.iter_mut().zip(&self.weights).zip(params) {
                    *o = p * w;
                }
            }
            Some(idx) => {
                for &k in idx {
                    out[k] = self.weights[k] * params[k];
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{
        group_by_frequency, heavy_tailed_labels, simple_imbalanced, FrequencySpec, HeavyTailedSpec, InputDistribution,
    };
    use crate::math;
    use crate::model::{full_gradient, mean_loss};
    use crate::theory::quadratic_gd_iterates;

    fn small_ht(seed: u64) -> Dataset {
        heavy_tailed_labels(&HeavyTailedSpec::new(4, InputDistribution::Uniform01, seed)).unwrap()
    }

    #[test]
    fn zero_step_keeps_initial_loss() {
        let ds = small_ht(1);
        let mut m = LinearModel::zeros(ds.num_classes(), ds.input_dim(), true);
        for family in Family::ALL {
            let mut cfg = TrainConfig::new(OptimizerConfig::new(family, 0.0), 20);
            cfg.checkpoints = checkpoints_every(20, 5);
            let log = train(&mut m, &ds, &cfg).unwrap();
            assert_eq!(log.records.len(), 5);
            let c = ds.num_classes() as f64;
            assert!(log
                .records
                .iter()
                .all(|r| r.loss == log.records[0].loss && (r.loss - math::ln(c)).abs() < 1e-13));
        }
    }

    #[test]
    fn sign_descent_on_binary_one_hot() {
        let f = FrequencySpec::from_weights(&[0.5, 0.5]).unwrap();
        let ds = simple_imbalanced(&f).unwrap();
        let mut m = LinearModel::zeros(2, 2, false);
        let alpha = 0.01;
        let steps = 150;
        let cfg = TrainConfig::new(OptimizerConfig::new(Family::Sign, alpha), steps);
        let log = train(&mut m, &ds, &cfg).unwrap();
        let t = alpha * steps as f64;
        let expect = math::ln_1p(math::exp(-2.0 * t));
        let groups = group_by_frequency(ds.freq(), 2).unwrap();
        let per = crate::model::per_group_loss(&m, &ds, &groups).unwrap();
        for v in per {
            assert!((v.unwrap() - expect).abs() < 1e-12);
        }
        assert!((log.final_loss() - expect).abs() < 1e-12);
    }

    #[test]
    fn quadratic_adapter_matches_closed_form() {
        let pi = [0.6, 0.3, 0.1];
        let alpha = 0.9;
        let steps = 40;
        let mut obj = QuadraticObjective { weights: pi.to_vec() };
        let mut w = vec![1.0, -2.0, 0.5];
        let cfg = TrainConfig::new(OptimizerConfig::new(Family::Gd, alpha), steps);
        run_objective(&mut obj, &mut w, &cfg).unwrap();
        let it = quadratic_gd_iterates(alpha, &pi, &[1.0, -2.0, 0.5], steps).unwrap();
        for (a, b) in w.iter().zip(&it.closed_form[steps]) {
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn full_batch_runs_are_bit_identical() {
        let ds = small_ht(2);
        let run = || {
            let mut m = LinearModel::zeros(ds.num_classes(), ds.input_dim(), true);
            let mut cfg = TrainConfig::new(OptimizerConfig::new(Family::Adam, 0.01), 30);
            cfg.checkpoints = checkpoints_every(30, 3);
            cfg.block_stats = true;
            (train(&mut m, &ds, &cfg).unwrap(), m)
        };
        let (a, ma) = run();
        let (b, mb) = run();
        assert_eq!(a, b);
        assert_eq!(ma, mb);
    }

    #[test]
    fn minibatch_is_seeded() {
        let ds = small_ht(3);
        let run = |seed| {
            let mut m = LinearModel::zeros(ds.num_classes(), ds.input_dim(), true);
            let mut cfg = TrainConfig::new(OptimizerConfig::new(Family::Gd, 0.5).with_beta(0.9), 25);
            cfg.batch = BatchMode::Minibatch { size: 7 };
            cfg.seed = seed;
            train(&mut m, &ds, &cfg).unwrap();
            m
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn sampler_covers_each_epoch() {
        let mut s = BatchSampler::new(10, 4, 9);
        for _ in 0..3 {
            let mut seen: Vec<usize> = Vec::new();
            for _ in 0..3 {
                seen.extend_from_slice(s.next());
            }
            seen.sort_unstable();
            assert_eq!(seen, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn divergence_is_flagged_not_an_error() {
        let ds = small_ht(4);
        let mut m = LinearModel::zeros(ds.num_classes(), ds.input_dim(), true);
        let cfg = TrainConfig::new(OptimizerConfig::new(Family::Gd, 1e307).with_beta(0.9), 50);
        let log = train(&mut m, &ds, &cfg).unwrap();
        assert!(log.diverged);
        assert!(log.unstable());
        assert_eq!(log.final_loss(), f64::INFINITY);
        assert!(log.records[..log.records.len() - 1].iter().all(|r| r.loss.is_finite()));
        assert!(log.records.windows(2).all(|w| w[0].step < w[1].step));
    }

    #[test]
    fn reweighted_gradient_is_gradient_of_reweighted_loss() {
        let ds = small_ht(5);
        let c = ds.num_classes();
        let m = LinearModel::gaussian(c, ds.input_dim(), true, 0.3, 11).unwrap();
        let omega = reweight_weights(ds.freq(), Reweight::InvSqrtFreq).unwrap();
        let mut obj = LinearObjective::new(&m, &ds, Reweight::InvSqrtFreq).unwrap();
        let mut g = vec![0.0; obj.num_params()];
        obj.gradient(m.params().as_slice(), None, &mut g).unwrap();
        // the reweighted problem as an explicitly weighted dataset
        let w: Vec<f64> = ds.labels().iter().map(|&y| omega[y as usize]).collect();
        let rw = Dataset::from_parts(ds.inputs().clone(), ds.labels().to_vec(), Some(w), c).unwrap();
        let cols = m.params().cols();
        for &(k, j) in &[(0usize, 0usize), (c - 1, 3), (c / 2, cols - 1)] {
            let eps = 1e-5;
            let mut p = m.clone();
            p.params_mut().set(k, j, m.params().get(k, j) + eps);
            let mut q = m.clone();
            q.params_mut().set(k, j, m.params().get(k, j) - eps);
            let fd = (mean_loss(&p, &rw).unwrap() - mean_loss(&q, &rw).unwrap()) / (2.0 * eps);
            let an = g[k * cols + j];
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-4), "({k},{j}) {fd} vs {an}");
        }
        let direct = full_gradient(&m, &rw).unwrap();
        for (a, b) in direct.as_slice().iter().zip(&g) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn checkpoint_helpers() {
        assert_eq!(checkpoints_every(10, 4), vec![0, 4, 8, 10]);
        let l = checkpoints_log(1000, 2);
        assert_eq!(l.first(), Some(&0));
        assert_eq!(l.last(), Some(&1000));
        assert!(l.contains(&10) && l.contains(&100) && l.contains(&32));
        let mut cfg = TrainConfig::new(OptimizerConfig::new(Family::Gd, 0.1), 5);
        cfg.checkpoints = vec![7];
        assert!(cfg.validate().is_err());
    }
}
