//! Summaries computed from trained models and trajectory logs.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::dataset::{Dataset, FrequencyGroups};
use crate::error::{invalid, Error, Result};
use crate::linalg::{gemm, Matrix};
use crate::math;
use crate::model::{check_groups, forward, group_means, LinearModel, Samples};
use crate::optim::TrajectoryLog;
use crate::rng;

/// Pearson correlation of `(log x, log y)`.
pub fn pearson_log_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} vs {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::SubsetTooSmall { got: xs.len(), need: 3 });
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("values", "log correlation needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|&v| math::ln(v)).collect();
    let ly: Vec<f64> = ys.iter().map(|&v| math::ln(v)).collect();
    let n = lx.len() as f64;
    let mx = math::sum(&lx) / n;
    let my = math::sum(&ly) / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in lx.iter().zip(&ly) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // relative to the magnitude of the logs, so rounding noise in a constant
    // vector does not count as variance
    let tiny = |s: f64, m: f64| {
        let e = 64.0 * f64::EPSILON * m.abs().max(1.0);
        s <= e * e * n
    };
    if tiny(sxx, mx) {
        return Err(Error::UndefinedCorrelation("first coordinate has zero variance"));
    }
    if tiny(syy, my) {
        return Err(Error::UndefinedCorrelation("second coordinate has zero variance"));
    }
    Ok((sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Which classes enter the correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SubsetRule {
    /// Classes with `π_k·c ≥ scale·log c`.
    FrequencyAtLeastLogC {
        scale: f64,
    },
    All,
}

impl Default for SubsetRule {
    fn default() -> Self {
        SubsetRule::FrequencyAtLeastLogC { scale: 1.0 }
    }
}

impl SubsetRule {
    pub fn select(&self, freq: &[f64]) -> Vec<usize> {
        let c = freq.len() as f64;
        match *self {
            SubsetRule::All => (0..freq.len()).collect(),
            SubsetRule::FrequencyAtLeastLogC { scale } => {
                let threshold = scale * math::ln(c);
                (0..freq.len()).filter(|&k| freq[k] * c >= threshold).collect()
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            SubsetRule::All => String::from("all"),
            SubsetRule::FrequencyAtLeastLogC { scale } => alloc::format!("pi*c>={scale}*ln(c)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub step: usize,
    /// `None` when the correlation is undefined (a coordinate is constant).
    pub pearson_log: Option<f64>,
    pub n_classes_used: usize,
    pub subset_rule: String,
}

/// Log-log correlation of per-class gradient norm and Hessian trace over the
/// classes selected by `rule`.
pub fn correlation_at(step: usize, stats: &crate::model::BlockStats, rule: SubsetRule) -> Result<CorrelationReport> {
    let subset = rule.select(&stats.freq);
    if subset.len() < 3 {
        return Err(Error::SubsetTooSmall {
            got: subset.len(),
            need: 3,
        });
    }
    let g: Vec<f64> = subset.iter().map(|&k| stats.grad_norm[k]).collect();
    let h: Vec<f64> = subset.iter().map(|&k| stats.hess_trace[k]).collect();
    let pearson_log = match pearson_log_correlation(&g, &h) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) | Err(Error::InvalidArgument { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CorrelationReport {
        step,
        pearson_log,
        n_classes_used: subset.len(),
        subset_rule: rule.describe(),
    })
}

/// One report per checkpoint carrying block statistics.
pub fn correlation_over_trajectory(log: &TrajectoryLog, rule: SubsetRule) -> Result<Vec<CorrelationReport>> {
    let with_stats: Vec<_> = log
        .records
        .iter()
        .filter_map(|r| r.block_stats.as_ref().map(|s| (r.step, s)))
        .collect();
    if with_stats.len() < 2 {
        return Err(invalid(
            "trajectory",
            "need at least two checkpoints with block statistics",
        ));
    }
    with_stats
        .into_iter()
        .map(|(step, s)| correlation_at(step, s, rule))
        .collect()
}

/// Mean correct-class probability within each group.
pub fn mean_p_per_group(model: &LinearModel, ds: &Dataset, groups: &FrequencyGroups) -> Result<Vec<Option<f64>>> {
    check_groups(groups, ds.num_classes())?;
    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    let p = f.correct_probs(s.labels);
    Ok(group_means(&p, s.labels, &s.weights, groups))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClassSampling {
    #[default]
    Uniform,
    /// Rank `k` drawn with weight `1/(k+1)`, so classes are spread evenly on
    /// a log scale of frequency rank.
    LogUniform,
}

/// Hessian entries restricted to sampled classes and input dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub classes: Vec<usize>,
    pub dims: Vec<usize>,
    /// `(|S|·|D|)²` entries; row `a·|D| + i` is parameter `(classes[a], dims[i])`.
    pub values: Matrix,
}

impl Heatmap {
    pub fn size(&self) -> usize {
        self.values.rows()
    }

    /// `log10 |H|` in row-major order.
    pub fn log10_abs(&self) -> Vec<f64> {
        self.values
            .as_slice()
            .iter()
            .map(|v| math::log10(math::abs(*v)))
            .collect()
    }

    /// Mean absolute entry over diagonal blocks and over off-diagonal blocks.
    pub fn block_means(&self) -> (f64, f64) {
        let nd = self.dims.len();
        let (mut diag, mut off) = ((0.0, 0usize), (0.0, 0usize));
        for r in 0..self.size() {
            for c in 0..self.size() {
                let v = math::abs(self.values.get(r, c));
                if r / nd == c / nd {
                    diag.0 += v;
                    diag.1 += 1;
                } else {
                    off.0 += v;
                    off.1 += 1;
                }
            }
        }
        (diag.0 / diag.1.max(1) as f64, off.0 / off.1.max(1) as f64)
    }
}

fn sample_classes(c: usize, n: usize, sampling: ClassSampling, rng: &mut rng::LabRng) -> Vec<usize> {
    let mut out = match sampling {
        ClassSampling::Uniform => index::sample(rng, c, n).into_vec(),
        ClassSampling::LogUniform => {
            // weighted sampling without replacement via exponential keys
            let mut keyed: Vec<(f64, usize)> = (0..c)
                .map(|k| {
                    let u: f64 = rng.random::<f64>();
                    let u = u.max(f64::MIN_POSITIVE);
                    (math::ln(u) * (k + 1) as f64, k)
                })
                .collect();
            keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            keyed.into_iter().take(n).map(|(_, k)| k).collect()
        }
    };
    out.sort_unstable();
    out
}

/// `H[(k,a),(j,b)] = (1/Σw)·Σ_i w_i p_ik (δ_kj − p_ij) x_ia x_ib` for sampled
/// classes `k, j` and input dimensions `a, b`.
pub fn offdiag_heatmap_sample(
    model: &LinearModel,
    ds: &Dataset,
    n_classes: usize,
    n_dims: usize,
    sampling: ClassSampling,
    seed: u64,
) -> Result<Heatmap> {
    let c = ds.num_classes();
    let d = ds.input_dim();
    if n_classes == 0 || n_classes > c {
        return Err(invalid(
            "n_classes",
            alloc::format!("{n_classes} requested from {c} classes"),
        ));
    }
    if n_dims == 0 || n_dims > d {
        return Err(invalid(
            "n_dims",
            alloc::format!("{n_dims} requested from dimension {d}"),
        ));
    }
    let mut r = rng::seeded(seed);
    let classes = sample_classes(c, n_classes, sampling, &mut r);
    let mut dims = index::sample(&mut r, d, n_dims).into_vec();
    dims.sort_unstable();

    let s = Samples::of(ds);
    let f = forward(model, &s)?;
    let n = ds.num_samples();
    let total = math::sum(&s.weights);
    let xd = Matrix::from_fn(n, n_dims, |i, a| ds.inputs().get(i, dims[a]));
    let size = n_classes * n_dims;
    // U_i = sqrt(w_i/Σw)·(p_iS ⊗ x_iD)
    let u = Matrix::from_fn(n, size, |i, col| {
        let (a, b) = (col / n_dims, col % n_dims);
        math::sqrt(s.weights[i] / total) * f.probs.get(i, classes[a]) * xd.get(i, b)
    });
    let mut h = Matrix::zeros(size, size);
    gemm(-1.0, u.view().t(), u.view(), 0.0, h.view_mut())?;
    let mut scaled = Matrix::zeros(n, n_dims);
    let mut block = Matrix::zeros(n_dims, n_dims);
    for (a, &k) in classes.iter().enumerate() {
        for i in 0..n {
            let scale = s.weights[i] / total * f.probs.get(i, k);
            for (dst, src) in scaled.row_mut(i).iter_mut().zip(xd.row(i)) {
                *dst = scale * src;
            }
        }
        gemm(1.0, xd.view().t(), scaled.view(), 0.0, block.view_mut())?;
        for i in 0..n_dims {
            for j in 0..n_dims {
                let (r, c) = (a * n_dims + i, a * n_dims + j);
                h.set(r, c, h.get(r, c) + block.get(i, j));
            }
        }
    }
    Ok(Heatmap {
        classes,
        dims,
        values: h,
    })
}
