//! Synthetic imbalanced classification problems.
//!
//! Classes are always indexed by descending frequency: class 0 is the most
//! frequent. Frequency groups bundle consecutive classes holding roughly equal
//! shares of the sample mass and are used only for reporting.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::rng;

/// Distribution of the input features, drawn independently of the labels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InputDistribution {
    /// Entries uniform on `[0, 1)`.
    Uniform01,
    /// Entries `Normal(mean, 1)`.
    Gaussian { mean: f64 },
}

/// Per-class sample mass (`counts`) and frequency (`probs = counts / total`).
///
/// Counts are integers for sampled datasets and arbitrary non-negative weights
/// for the continuous setting.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpec {
    counts: Vec<f64>,
    probs: Vec<f64>,
    total: f64,
}

impl FrequencySpec {
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let w: Vec<f64> = counts.iter().map(|&k| k as f64).collect();
        Self::from_weights(&w)
    }

    /// Fractional masses; they must be non-negative, non-increasing and not
    /// all zero.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() < 2 {
            return Err(invalid("counts", "need at least 2 classes"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("counts", "class masses must be finite and non-negative"));
        }
        if weights.windows(2).any(|p| p[1] > p[0]) {
            return Err(invalid("counts", "classes must be sorted by non-increasing frequency"));
        }
        let total = math::sum(weights);
        if total <= 0.0 {
            return Err(invalid("counts", "total mass must be positive"));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Ok(FrequencySpec {
            counts: weights.to_vec(),
            probs,
            total,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Run-length encoding of the counts: `(classes in tier, mass per class)`.
    pub fn tiers(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for &k in &self.counts {
            match out.last_mut() {
                Some((n, v)) if *v == k => *n += 1,
                _ => out.push((1, k)),
            }
        }
        out
    }
}

/// Partition of frequency-ranked classes into contiguous groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyGroups {
    assignment: Vec<usize>,
    boundaries: Vec<Range<usize>>,
}

impl FrequencyGroups {
    pub fn num_groups(&self) -> usize {
        self.boundaries.len()
    }

    /// Group index of each class.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn boundaries(&self) -> &[Range<usize>] {
        &self.boundaries
    }

    pub fn group_of(&self, class: usize) -> usize {
        self.assignment[class]
    }

    /// Sample mass of every group under `freq`.
    pub fn masses(&self, freq: &FrequencySpec) -> Vec<f64> {
        self.boundaries
            .iter()
            .map(|r| math::sum(&freq.counts()[r.clone()]))
            .collect()
    }
}

/// Split classes into `num_groups` contiguous groups of roughly `total/G`
/// sample mass each.
///
/// Scans classes in descending frequency and closes group `g` once the
/// cumulative mass reaches `(g+1)·total/G`. A group always receives at least
/// one class, and groups are closed early when the remaining classes are just
/// enough to give each remaining group one class. The last group takes the
/// remainder.
pub fn group_by_frequency(freq: &FrequencySpec, num_groups: usize) -> Result<FrequencyGroups> {
    let c = freq.num_classes();
    if num_groups == 0 || num_groups > c {
        return Err(Error::InfeasiblePartition { c, groups: num_groups });
    }
    let target = freq.total() / num_groups as f64;
    let mut assignment = vec![0usize; c];
    let mut boundaries = Vec::with_capacity(num_groups);
    let mut group = 0usize;
    let mut start = 0usize;
    let mut cumulative = 0.0;
    for k in 0..c {
        assignment[k] = group;
        cumulative += freq.counts()[k];
        if group + 1 == num_groups {
            continue;
        }
        let classes_left = c - (k + 1);
        let groups_left = num_groups - (group + 1);
        let reached = cumulative >= target * (group + 1) as f64;
        if reached || classes_left == groups_left {
            boundaries.push(start..k + 1);
            group += 1;
            start = k + 1;
        }
    }
    boundaries.push(start..c);
    debug_assert_eq!(boundaries.len(), num_groups);
    Ok(FrequencyGroups { assignment, boundaries })
}

/// Zipf class frequencies `π_k ∝ 1/(k+1)^s` rounded to `n` integer samples.
///
/// Rounding is largest-remainder on `n·π_k` (ties to the lower class index),
/// followed by moving single samples from the largest classes to any class
/// left empty, so every class keeps at least one sample and the counts sum to
/// exactly `n`.
pub fn zipf_frequencies(c: usize, exponent: f64, n: u64) -> Result<FrequencySpec> {
    if c < 2 {
        return Err(invalid("c", "need at least 2 classes"));
    }
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(invalid("exponent", "must be positive and finite"));
    }
    if n < c as u64 {
        return Err(Error::InfeasibleCounts { n, c });
    }
    let raw: Vec<f64> = (0..c).map(|k| 1.0 / math::pow((k + 1) as f64, exponent)).collect();
    let norm = math::sum(&raw);
    let quotas: Vec<f64> = raw.iter().map(|r| n as f64 * r / norm).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| math::floor(*q) as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..c).collect();
    // stable sort keeps lower indices first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - math::floor(quotas[a]);
        let rb = quotas[b] - math::floor(quotas[b]);
        rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal)
    });
    for &k in order.iter().take((n - assigned) as usize) {
        counts[k] += 1;
    }
    while let Some(empty) = counts.iter().position(|&k| k == 0) {
        let max = *counts.iter().max().expect("c >= 2");
        let donor = counts.iter().rposition(|&k| k == max).expect("max exists");
        counts[donor] -= 1;
        counts[empty] += 1;
    }
    FrequencySpec::from_counts(&counts)
}

/// Parameters of the heavy-tailed random-label dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeavyTailedSpec {
    /// Number of frequency tiers.
    pub m: u32,
    pub distribution: InputDistribution,
    pub seed: u64,
    /// Append a tier of `2^m` classes with one sample each, giving
    /// `c = 2^(m+1) - 1` classes.
    #[cfg_attr(feature = "serde", serde(default))]
    pub extra_tier: bool,
    /// Override the input dimension (default `(m+1)·2^m`).
    #[cfg_attr(feature = "serde", serde(default))]
    pub input_dim: Option<usize>,
}

impl HeavyTailedSpec {
    pub fn new(m: u32, distribution: InputDistribution, seed: u64) -> Self {
        HeavyTailedSpec {
            m,
            distribution,
            seed,
            extra_tier: false,
            input_dim: None,
        }
    }

    pub fn default_input_dim(&self) -> usize {
        (self.m as usize + 1) << self.m
    }
}

/// Tier listing `(classes, samples per class)`: tier `j` (1-indexed) holds
/// `2^(j-1)` classes with `2^(m-j+1)` samples each.
pub fn heavy_tailed_tiers(m: u32, extra_tier: bool) -> Vec<(u64, u64)> {
    let mut tiers: Vec<(u64, u64)> = (1..=m).map(|j| (1u64 << (j - 1), 1u64 << (m - j + 1))).collect();
    if extra_tier {
        tiers.push((1u64 << m, 1));
    }
    tiers
}

/// Where a dataset came from; serialized alongside it.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    HeavyTailed(HeavyTailedSpec),
    Sampled { distribution: InputDistribution, seed: u64 },
    SimpleImbalanced,
    Custom,
}

/// Labeled inputs with optional per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Matrix,
    labels: Vec<u32>,
    sample_weights: Option<Vec<f64>>,
    freq: FrequencySpec,
    groups: FrequencyGroups,
    provenance: Provenance,
}

impl Dataset {
    /// Assemble a dataset; class frequencies are the (weighted) label
    /// histogram over `num_classes` classes, which must be non-increasing.
    pub fn from_parts(
        inputs: Matrix,
        labels: Vec<u32>,
        sample_weights: Option<Vec<f64>>,
        num_classes: usize,
    ) -> Result<Self> {
        if labels.len() != inputs.rows() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} labels for {} input rows",
                labels.len(),
                inputs.rows()
            )));
        }
        if let Some(w) = &sample_weights {
            if w.len() != labels.len() {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "{} sample weights for {} samples",
                    w.len(),
                    labels.len()
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(invalid("sample_weights", "must be finite and strictly positive"));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&y| y as usize >= num_classes) {
            return Err(invalid(
                "labels",
                alloc::format!("label {bad} out of range for {num_classes} classes"),
            ));
        }
        if !inputs.is_finite() {
            return Err(Error::NonFinite("dataset inputs"));
        }
        let mut hist = vec![0.0; num_classes];
        for (i, &y) in labels.iter().enumerate() {
            hist[y as usize] += sample_weights.as_ref().map_or(1.0, |w| w[i]);
        }
        let freq = FrequencySpec::from_weights(&hist)?;
        let groups = group_by_frequency(&freq, num_classes.min(10))?;
        Ok(Dataset {
            inputs,
            labels,
            sample_weights,
            freq,
            groups,
            provenance: Provenance::Custom,
        })
    }

    pub fn with_groups(mut self, num_groups: usize) -> Result<Self> {
        self.groups = group_by_frequency(&self.freq, num_groups)?;
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sample_weights(&self) -> Option<&[f64]> {
        self.sample_weights.as_deref()
    }

    /// Sample weights, materializing all ones when absent.
    pub fn weights_or_ones(&self) -> Cow<'_, [f64]> {
        match &self.sample_weights {
            Some(w) => Cow::Borrowed(w),
            None => Cow::Owned(vec![1.0; self.labels.len()]),
        }
    }

    pub fn freq(&self) -> &FrequencySpec {
        &self.freq
    }

    pub fn groups(&self) -> &FrequencyGroups {
        &self.groups
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.freq.num_classes()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    /// Integer label histogram (ignores sample weights).
    pub fn label_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.num_classes()];
        for &y in &self.labels {
            h[y as usize] += 1;
        }
        h
    }
}

/// `n × d` matrix of i.i.d. draws, filled row-major from a ChaCha20 stream.
pub fn sample_inputs(dist: InputDistribution, n: usize, d: usize, seed: u64) -> Result<Matrix> {
    if n == 0 || d == 0 {
        return Err(invalid("shape", "n and d must be at least 1"));
    }
    let mut rng = rng::seeded(seed);
    let mut data = Vec::with_capacity(n * d);
    match dist {
        InputDistribution::Uniform01 => {
            for _ in 0..n * d {
                data.push(rng.random::<f64>());
            }
        }
        InputDistribution::Gaussian { mean } => {
            if !mean.is_finite() {
                return Err(invalid("mean", "must be finite"));
            }
            for _ in 0..n * d {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(mean + z);
            }
        }
    }
    Matrix::from_vec(n, d, data)
}

/// Labels laid out class by class (class 0 first) for the given counts.
pub fn labels_from_counts(counts: &[u64]) -> Vec<u32> {
    let mut labels = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for (k, &n) in counts.iter().enumerate() {
        labels.extend(core::iter::repeat_n(k as u32, n as usize));
    }
    labels
}

/// Dataset with the given integer class counts and inputs of dimension `d`
/// drawn independently of the labels.
pub fn sampled_dataset(counts: &[u64], d: usize, dist: InputDistribution, seed: u64) -> Result<Dataset> {
    let labels = labels_from_counts(counts);
    let inputs = sample_inputs(dist, labels.len(), d, seed)?;
    Ok(
        Dataset::from_parts(inputs, labels, None, counts.len())?.with_provenance(Provenance::Sampled {
            distribution: dist,
            seed,
        }),
    )
}

/// Random heavy-tailed labels: `m` tiers, tier `j` holding `2^(j-1)` classes
/// of `2^(m-j+1)` samples, so `n = m·2^m` and `c = 2^m - 1` (or
/// `2^(m+1) - 1` with the extra single-sample tier).
pub fn heavy_tailed_labels(spec: &HeavyTailedSpec) -> Result<Dataset> {
    if spec.m == 0 {
        return Err(invalid("m", "need at least one tier"));
    }
    if spec.m > 20 {
        return Err(invalid("m", "at most 20 tiers"));
    }
    let mut counts = Vec::new();
    for (classes, per_class) in heavy_tailed_tiers(spec.m, spec.extra_tier) {
        counts.extend(core::iter::repeat_n(per_class, classes as usize));
    }
    if counts.len() < 2 {
        return Err(invalid("m", "m = 1 without the extra tier yields a single class"));
    }
    let d = spec.input_dim.unwrap_or_else(|| spec.default_input_dim());
    let ds = sampled_dataset(&counts, d, spec.distribution, spec.seed)?;
    Ok(ds.with_provenance(Provenance::HeavyTailed(spec.clone())))
}

/// The continuous-time setting: one sample per class with input `e_k` and
/// sample weight `π_k`.
pub fn simple_imbalanced(freq: &FrequencySpec) -> Result<Dataset> {
    let c = freq.num_classes();
    let probs = freq.probs();
    if let Some(k) = probs.iter().position(|&p| p <= 0.0) {
        return Err(Error::EmptyClass(k));
    }
    let labels = (0..c as u32).collect();
    let ds = Dataset::from_parts(Matrix::identity(c), labels, Some(probs.to_vec()), c)?;
    Ok(ds.with_provenance(Provenance::SimpleImbalanced))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zipf_two_classes() {
        let f = zipf_frequencies(2, 1.0, 3).unwrap();
        assert!((f.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.probs()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.counts(), &[2.0, 1.0]);
    }

    #[test]
    fn zipf_rejects_degenerate() {
        assert!(zipf_frequencies(1, 1.0, 10).is_err());
        assert_eq!(zipf_frequencies(5, 1.0, 4), Err(Error::InfeasibleCounts { n: 4, c: 5 }));
    }

    #[test]
    fn zipf_floor_of_one_sample() {
        // n·π_k < 1 for most classes; each must still get one sample.
        let f = zipf_frequencies(100, 2.0, 120).unwrap();
        assert!(f.counts().iter().all(|&k| k >= 1.0));
        assert_eq!(math::sum(f.counts()), 120.0);
        assert!(f.counts().windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn zipf_imagenet_like_shape() {
        // 1000 classes, 10217 samples: the heavy-tailed ImageNet subsample size.
        let f = zipf_frequencies(1000, 1.0, 10217).unwrap();
        assert_eq!(math::sum(f.counts()), 10217.0);
        assert!(f.counts().windows(2).all(|p| p[0] >= p[1]));
        let h: f64 = (1..=1000).map(|k| 1.0 / k as f64).sum();
        for (k, &cnt) in f.counts().iter().enumerate() {
            let quota = 10217.0 / ((k + 1) as f64 * h);
            assert!((cnt - quota).abs() < 1.0, "class {k}: {cnt} vs {quota}");
        }
        // same 1/k profile as ceil(1300/k), up to the normalization constant
        let scale = f.counts()[0] / 1300.0;
        for k in [1usize, 2, 5, 10, 50] {
            let reference = math::ceil(1300.0 / (k + 1) as f64) * scale;
            assert!((f.counts()[k] - reference).abs() / reference < 0.02);
        }
    }

    #[test]
    fn heavy_tailed_m2() {
        let ds = heavy_tailed_labels(&HeavyTailedSpec::new(2, InputDistribution::Uniform01, 0)).unwrap();
        assert_eq!(ds.num_samples(), 8);
        assert_eq!(ds.input_dim(), 12);
        assert_eq!(ds.num_classes(), 3);
        assert_eq!(ds.freq().counts(), &[4.0, 2.0, 2.0]);
        assert_eq!(ds.label_histogram(), vec![4, 2, 2]);
    }

    #[test]
    fn heavy_tailed_sizes() {
        let spec = HeavyTailedSpec::new(8, InputDistribution::Uniform01, 0);
        assert_eq!(spec.default_input_dim(), 2304);
        let n: u64 = heavy_tailed_tiers(8, false).iter().map(|(c, s)| c * s).sum();
        assert_eq!(n, 2048);
        let spec = HeavyTailedSpec::new(11, InputDistribution::Uniform01, 0);
        assert_eq!(spec.default_input_dim(), 24576);
        let n: u64 = heavy_tailed_tiers(11, false).iter().map(|(c, s)| c * s).sum();
        assert_eq!(n, 22528);
    }

    #[test]
    fn heavy_tailed_tier_sums() {
        for m in 1..=12u32 {
            let tiers = heavy_tailed_tiers(m, false);
            let n: u64 = tiers.iter().map(|(c, s)| c * s).sum();
            assert_eq!(n, m as u64 * (1 << m));
            let c: u64 = tiers.iter().map(|(c, _)| c).sum();
            assert_eq!(c, (1 << m) - 1);
            let c_extra: u64 = heavy_tailed_tiers(m, true).iter().map(|(c, _)| c).sum();
            assert_eq!(c_extra, (1 << (m + 1)) - 1);
        }
    }

    #[test]
    fn heavy_tailed_single_class_rejected() {
        let spec = HeavyTailedSpec::new(1, InputDistribution::Uniform01, 0);
        assert!(heavy_tailed_labels(&spec).is_err());
        let spec = HeavyTailedSpec {
            extra_tier: true,
            ..spec
        };
        let ds = heavy_tailed_labels(&spec).unwrap();
        assert_eq!(ds.num_classes(), 3);
        assert_eq!(ds.freq().counts(), &[2.0, 1.0, 1.0]);
    }

    #[test]
    fn simple_setting_definition() {
        let f = FrequencySpec::from_weights(&[0.5, 0.5]).unwrap();
        let ds = simple_imbalanced(&f).unwrap();
        assert_eq!(ds.inputs(), &Matrix::identity(2));
        assert_eq!(ds.sample_weights().unwrap(), &[0.5, 0.5]);

        let f = FrequencySpec::from_weights(&[4.0, 1.0, 1.0]).unwrap();
        let ds = simple_imbalanced(&f).unwrap();
        let w = ds.sample_weights().unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(ds.labels(), &[0, 1, 2]);
    }

    #[test]
    fn uniform_support_and_determinism() {
        let a = sample_inputs(InputDistribution::Uniform01, 20, 30, 11).unwrap();
        assert!(a.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let b = sample_inputs(InputDistribution::Uniform01, 20, 30, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_inputs(InputDistribution::Uniform01, 20, 30, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_high_dim_near_orthogonal() {
        let x = sample_inputs(InputDistribution::Gaussian { mean: 0.0 }, 8, 4000, 3).unwrap();
        for i in 0..8 {
            for j in 0..i {
                let cos = math::dot(x.row(i), x.row(j)) / (math::norm2(x.row(i)) * math::norm2(x.row(j)));
                assert!(cos.abs() < 0.1, "cos({i},{j}) = {cos}");
            }
        }
        // uniform inputs stay aligned (cosine ≈ 3/4)
        let u = sample_inputs(InputDistribution::Uniform01, 4, 4000, 3).unwrap();
        let cos = math::dot(u.row(0), u.row(1)) / (math::norm2(u.row(0)) * math::norm2(u.row(1)));
        assert!(cos > 0.7);
    }

    #[test]
    fn grouping_examples() {
        let f = FrequencySpec::from_counts(&[4, 2, 2]).unwrap();
        let g = group_by_frequency(&f, 2).unwrap();
        assert_eq!(g.boundaries(), &[0..1, 1..3]);
        assert_eq!(g.masses(&f), vec![4.0, 4.0]);

        let g = group_by_frequency(&f, 1).unwrap();
        assert_eq!(g.boundaries(), vec![0..3]);

        let u = FrequencySpec::from_counts(&[5; 7]).unwrap();
        let g = group_by_frequency(&u, 7).unwrap();
        assert_eq!(g.assignment(), &[0, 1, 2, 3, 4, 5, 6]);

        assert_eq!(
            group_by_frequency(&f, 4),
            Err(Error::InfeasiblePartition { c: 3, groups: 4 })
        );
    }

    #[test]
    fn grouping_always_yields_requested_count() {
        // a dominant first class must not starve later groups
        let f = FrequencySpec::from_counts(&[100, 5, 4, 3, 2, 1, 1]).unwrap();
        let g = group_by_frequency(&f, 5).unwrap();
        assert_eq!(g.num_groups(), 5);
        assert!(g.boundaries().iter().all(|r| !r.is_empty()));
        assert!(g.assignment().windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn heavy_tailed_groups_balanced() {
        for m in 4..=9u32 {
            let mut counts = Vec::new();
            for (c, s) in heavy_tailed_tiers(m, false) {
                counts.extend(core::iter::repeat_n(s, c as usize));
            }
            let f = FrequencySpec::from_counts(&counts).unwrap();
            let g = group_by_frequency(&f, 10.min(f.num_classes())).unwrap();
            let target = f.total() / g.num_groups() as f64;
            for (gi, (r, mass)) in g.boundaries().iter().zip(g.masses(&f)).enumerate() {
                let lo = r.start.saturating_sub(1);
                let hi = (r.end + 1).min(f.num_classes());
                let neighborhood = f.counts()[lo..hi].iter().copied().fold(0.0, f64::max);
                assert!(
                    (mass - target).abs() <= neighborhood,
                    "m={m} group {gi}: mass {mass}, target {target}"
                );
            }
        }
    }
}
