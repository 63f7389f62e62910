//! Executing an [`ExperimentConfig`] into an output directory.

use std::path::{Path, PathBuf};

use imblab_core::analysis::{correlation_at, offdiag_heatmap_sample, CorrelationReport, SubsetRule};
use imblab_core::dataset::{
    group_by_frequency, heavy_tailed_labels, sampled_dataset, simple_imbalanced, zipf_frequencies, Dataset,
    FrequencyGroups, FrequencySpec, HeavyTailedSpec,
};
use imblab_core::model::LinearModel;
use imblab_core::optim::{
    grid_search_with, train_with_groups, GridResult, GridSpec, OptimizerConfig, RunSummary, TrainConfig, TrajectoryLog,
};
use imblab_core::theory::{
    gflow_closed_form, gflow_loss, integrate_from, quadratic_gd_iterates, quadratic_sign_iterates, sign_descent_loss,
    FlowParams, FlowState,
};

use crate::config::{DatasetSource, ExperimentConfig, InitSpec, OptimizerSpec, QuadraticConfig, TheoryCase};
use crate::error::{at, CliError};
use crate::executor::{parallel_map, thread_count};
use crate::io::{fmt_f64, fmt_opt, write_dataset, write_model, Manifest, OutputDir};

/// One trained optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerRun {
    pub label: String,
    pub spec: OptimizerSpec,
    /// Step size of the logged run.
    pub alpha: f64,
    pub grid: Option<GridResult>,
    pub log: TrajectoryLog,
    pub model: LinearModel,
    pub correlation: Vec<CorrelationReport>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub dataset: Option<Dataset>,
    pub groups: Option<FrequencyGroups>,
    pub runs: Vec<OptimizerRun>,
}

impl Outcome {
    pub fn run(&self, label: &str) -> Option<&OptimizerRun> {
        self.runs.iter().find(|r| r.label == label)
    }
}

/// Relative dataset paths resolve against `base`.
pub fn build_dataset(source: &DatasetSource, base: &Path) -> Result<Dataset, CliError> {
    let ds = match source {
        DatasetSource::HeavyTailed {
            m,
            distribution,
            seed,
            extra_tier,
            input_dim,
        } => heavy_tailed_labels(&HeavyTailedSpec {
            m: *m,
            distribution: *distribution,
            seed: *seed,
            extra_tier: *extra_tier,
            input_dim: *input_dim,
        }),
        DatasetSource::SimpleImbalanced { weights } => {
            FrequencySpec::from_weights(weights).and_then(|f| simple_imbalanced(&f))
        }
        DatasetSource::SimpleZipf { classes, exponent } => {
            let w: Vec<f64> = (1..=*classes).map(|k| (k as f64).powf(-exponent)).collect();
            FrequencySpec::from_weights(&w).and_then(|f| simple_imbalanced(&f))
        }
        DatasetSource::SampledZipf {
            classes,
            exponent,
            samples,
            input_dim,
            distribution,
            seed,
        } => zipf_frequencies(*classes, *exponent, *samples).and_then(|f| {
            let counts: Vec<u64> = f.counts().iter().map(|&c| c as u64).collect();
            sampled_dataset(&counts, *input_dim, *distribution, *seed)
        }),
        DatasetSource::Files { path } => {
            let p = if path.is_absolute() {
                path.clone()
            } else {
                base.join(path)
            };
            return crate::io::read_dataset(&p).map_err(|e| CliError::config("dataset.path", e));
        }
    };
    ds.map_err(at("dataset"))
}

pub fn init_model(cfg: &ExperimentConfig, ds: &Dataset) -> Result<LinearModel, CliError> {
    let (c, d, bias) = (ds.num_classes(), ds.input_dim(), cfg.model.bias);
    match cfg.model.init {
        InitSpec::Zeros => Ok(LinearModel::zeros(c, d, bias)),
        InitSpec::Gaussian { sigma, seed } => LinearModel::gaussian(c, d, bias, sigma, seed).map_err(at("model.init")),
    }
}

fn train_config(cfg: &ExperimentConfig, spec: &OptimizerSpec, alpha: f64) -> TrainConfig {
    let train = cfg.train.as_ref().expect("validated: train section present");
    let mut optimizer = OptimizerConfig::new(spec.family, alpha).with_beta(spec.beta);
    optimizer.adam = spec.adam;
    TrainConfig {
        optimizer,
        steps: train.steps,
        batch: spec.batch,
        reweight: spec.reweight,
        checkpoints: cfg.checkpoint_steps(),
        seed: train.seed,
        block_stats: train.block_stats,
        engine: spec.engine,
    }
}

struct Trainer<'a> {
    cfg: &'a ExperimentConfig,
    ds: &'a Dataset,
    groups: &'a FrequencyGroups,
    init: &'a LinearModel,
}

impl Trainer<'_> {
    fn train(&self, spec: &OptimizerSpec, alpha: f64, seed: u64) -> Result<(TrajectoryLog, LinearModel), CliError> {
        let mut model = self.init.clone();
        let config = TrainConfig {
            seed,
            ..train_config(self.cfg, spec, alpha)
        };
        let log = train_with_groups(&mut model, self.ds, self.groups, &config)?;
        Ok((log, model))
    }

    fn run(&self, index: usize, spec: &OptimizerSpec, threads: usize) -> Result<OptimizerRun, CliError> {
        let label = spec.label();
        let seed = self.cfg.train.as_ref().map_or(0, |t| t.seed);
        train_config(self.cfg, spec, spec.alpha.unwrap_or(1.0))
            .validate()
            .map_err(at(&format!("optimizer[{index}]")))?;
        let (alpha, grid, log, model) = match spec.alpha {
            Some(alpha) => {
                eprintln!("[{}] {label}: alpha={}", self.cfg.name, fmt_f64(alpha));
                let (log, model) = self.train(spec, alpha, seed)?;
                (alpha, None, log, model)
            }
            None => {
                let grid_spec = GridSpec {
                    exponents: self.cfg.grid.exponents.clone(),
                    refine: self.cfg.grid.refine,
                };
                let mut kept: Vec<(f64, TrajectoryLog, LinearModel)> = Vec::new();
                let mut failure: Option<CliError> = None;
                let result = grid_search_with(&self.cfg.grid.seeds, &grid_spec, |jobs| {
                    let out = parallel_map(jobs, threads, |&(a, s)| {
                        eprintln!("[{}] {label}: grid alpha={} seed={s}", self.cfg.name, fmt_f64(a));
                        self.train(spec, a, s)
                    });
                    jobs.iter()
                        .zip(out)
                        .map(|(&(a, s), r)| match r {
                            Ok((log, model)) => {
                                let summary = RunSummary::of(&log);
                                if s == seed {
                                    kept.push((a, log, model));
                                }
                                Ok(summary)
                            }
                            Err(e) => {
                                failure.get_or_insert(e);
                                Err(imblab_core::Error::NonFinite("grid cell failed"))
                            }
                        })
                        .collect()
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                let result = result?;
                let alpha = result.best_alpha;
                let (log, model) = match kept.into_iter().find(|(a, _, _)| *a == alpha) {
                    Some((_, log, model)) => (log, model),
                    None => self.train(spec, alpha, seed)?,
                };
                (alpha, Some(result), log, model)
            }
        };
        let correlation = if self.cfg.train.as_ref().is_some_and(|t| t.block_stats) {
            correlations(&log, self.cfg.analysis.subset_rule)?
        } else {
            Vec::new()
        };
        Ok(OptimizerRun {
            label,
            spec: spec.clone(),
            alpha,
            grid,
            log,
            model,
            correlation,
        })
    }
}

/// Per-checkpoint correlation; too few selected classes leave it undefined.
fn correlations(log: &TrajectoryLog, rule: SubsetRule) -> Result<Vec<CorrelationReport>, CliError> {
    let mut out = Vec::new();
    for r in &log.records {
        let Some(stats) = &r.block_stats else { continue };
        out.push(match correlation_at(r.step, stats, rule) {
            Ok(c) => c,
            Err(imblab_core::Error::SubsetTooSmall { got, .. }) => CorrelationReport {
                step: r.step,
                pearson_log: None,
                n_classes_used: got,
                subset_rule: rule.describe(),
            },
            Err(e) => return Err(e.into()),
        });
    }
    Ok(out)
}

fn trajectory_rows(log: &TrajectoryLog, groups: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["step".to_string(), "loss".to_string()];
    header.extend((0..groups).map(|g| format!("group_{g}")));
    header.push("alpha".into());
    header.push("diverged".into());
    let rows = log
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.step.to_string(), fmt_f64(r.loss)];
            row.extend(r.group_losses.iter().map(|v| fmt_opt(*v)));
            row.push(fmt_f64(r.step_size));
            row.push(log.diverged.to_string());
            row
        })
        .collect();
    (header, rows)
}

fn mean_p_rows(log: &TrajectoryLog, groups: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["step".to_string()];
    header.extend((0..groups).map(|g| format!("group_{g}")));
    let rows = log
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.step.to_string()];
            row.extend(r.group_mean_p.iter().map(|v| fmt_opt(*v)));
            row
        })
        .collect();
    (header, rows)
}

fn blockstats_rows(log: &TrajectoryLog) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in &log.records {
        let Some(b) = &r.block_stats else { continue };
        for k in 0..b.freq.len() {
            rows.push(vec![
                r.step.to_string(),
                k.to_string(),
                fmt_f64(b.freq[k]),
                fmt_f64(b.grad_norm[k]),
                fmt_f64(b.hess_trace[k]),
                fmt_opt(b.mean_p[k]),
            ]);
        }
    }
    rows
}

fn correlation_rows(reports: &[CorrelationReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|c| {
            vec![
                c.step.to_string(),
                fmt_opt(c.pearson_log),
                c.n_classes_used.to_string(),
                c.subset_rule.clone(),
            ]
        })
        .collect()
}

fn grid_rows(g: &GridResult) -> Vec<Vec<String>> {
    g.cells
        .iter()
        .map(|c| {
            vec![
                fmt_f64(c.alpha),
                c.seed.to_string(),
                fmt_f64(c.final_loss),
                c.unstable.to_string(),
            ]
        })
        .collect()
}

/// Rows `c,pi,t,a,b,loss_gflow,loss_sign,a_rk4,abs_err` at `rows` evenly
/// spaced times; RK4 steps are `dt/(c·pi)`.
pub fn theory_rows(case: &TheoryCase) -> Result<Vec<Vec<String>>, CliError> {
    if !(case.t_max >= 0.0 && case.t_max.is_finite()) {
        return Err(CliError::config("t_max", "must be finite and non-negative"));
    }
    if !(case.dt > 0.0 && case.dt.is_finite()) {
        return Err(CliError::config("dt", "must be positive and finite"));
    }
    if case.rows == 0 {
        return Err(CliError::config("rows", "must be positive"));
    }
    let p = FlowParams::new(case.c, case.pi).map_err(|e| CliError::config("c/pi", e))?;
    let h = case.dt * p.time_scale();
    let rows = if case.t_max == 0.0 { 1 } else { case.rows.max(2) };
    let mut state = FlowState::ORIGIN;
    let mut out = Vec::with_capacity(rows);
    for i in 0..rows {
        let t = if rows == 1 {
            0.0
        } else {
            case.t_max * i as f64 / (rows - 1) as f64
        };
        if t > state.t {
            state = *integrate_from(&p, state, t, h)?
                .last()
                .expect("at least the start state");
        }
        let exact = gflow_closed_form(&p, t)?;
        out.push(vec![
            case.c.to_string(),
            fmt_f64(case.pi),
            fmt_f64(t),
            fmt_f64(exact.a),
            fmt_f64(exact.b),
            fmt_f64(gflow_loss(&p, t)?),
            fmt_f64(sign_descent_loss(case.c, t)?),
            fmt_f64(state.a),
            fmt_f64((state.a - exact.a).abs()),
        ]);
    }
    Ok(out)
}

pub const THEORY_HEADER: [&str; 9] = ["c", "pi", "t", "a", "b", "loss_gflow", "loss_sign", "a_rk4", "abs_err"];

pub fn quadratic_rows(q: &QuadraticConfig) -> Result<Vec<Vec<String>>, CliError> {
    let w0 = q.w0.clone().unwrap_or_else(|| vec![1.0; q.pi.len()]);
    let gd = quadratic_gd_iterates(q.alpha, &q.pi, &w0, q.steps).map_err(at("quadratic"))?;
    let sign =
        quadratic_sign_iterates(q.sign_alpha.unwrap_or(q.alpha), &q.pi, &w0, q.steps).map_err(at("quadratic"))?;
    let mut rows = Vec::new();
    for (t, signs) in sign.iter().enumerate() {
        for (k, pi) in q.pi.iter().enumerate() {
            rows.push(vec![
                t.to_string(),
                k.to_string(),
                fmt_f64(*pi),
                fmt_f64(gd.closed_form[t][k]),
                fmt_f64(gd.simulated[t][k]),
                fmt_f64(signs[k]),
            ]);
        }
    }
    Ok(rows)
}

/// Run everything `cfg` asks for and write it under `out_dir`.
///
/// Relative `files` dataset paths resolve against `base`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, base: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let threads = thread_count()?;
    // build and check everything before the first write
    let dataset = cfg.dataset.as_ref().map(|s| build_dataset(s, base)).transpose()?;
    let groups = match &dataset {
        Some(ds) => Some(
            group_by_frequency(ds.freq(), cfg.analysis.groups.min(ds.num_classes())).map_err(at("analysis.groups"))?,
        ),
        None => None,
    };
    let init = dataset.as_ref().map(|ds| init_model(cfg, ds)).transpose()?;
    if let (Some(ds), Some(h)) = (&dataset, &cfg.analysis.heatmap) {
        if h.classes == 0 || h.classes > ds.num_classes() || h.dims == 0 || h.dims > ds.input_dim() {
            return Err(CliError::config(
                "analysis.heatmap",
                "sample sizes must be within the model shape",
            ));
        }
    }
    let theory: Vec<Vec<String>> = cfg
        .theory
        .iter()
        .enumerate()
        .map(|(i, case)| {
            theory_rows(case).map_err(|e| match e {
                CliError::Config { field, message } => CliError::config(format!("theory[{i}].{field}"), message),
                e => e,
            })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let quadratic = cfg.quadratic.as_ref().map(quadratic_rows).transpose()?;

    let mut out = OutputDir::create(out_dir)?;
    let resolved = ExperimentConfig {
        out_dir: None,
        ..cfg.clone()
    };
    out.write("config.resolved.json", resolved.to_json().as_bytes())?;
    if !theory.is_empty() {
        out.write_csv("theory.csv", &THEORY_HEADER, &theory)?;
    }
    if let Some(rows) = quadratic {
        out.write_csv(
            "quadratic.csv",
            &["step", "class", "pi", "gd_closed", "gd_sim", "sign_sim"],
            &rows,
        )?;
    }
    let mut runs = Vec::new();
    if let (Some(ds), Some(groups), Some(init)) = (&dataset, &groups, &init) {
        if cfg.output.dataset {
            write_dataset(&mut out, "dataset", ds)?;
        }
        let trainer = Trainer { cfg, ds, groups, init };
        let g = groups.num_groups();
        for (i, spec) in cfg.optimizers.iter().enumerate() {
            let run = trainer.run(i, spec, threads)?;
            let l = &run.label;
            let (header, rows) = trajectory_rows(&run.log, g);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            out.write_csv(&format!("{l}/trajectory.csv"), &header, &rows)?;
            let (header, rows) = mean_p_rows(&run.log, g);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            out.write_csv(&format!("{l}/mean_p.csv"), &header, &rows)?;
            if cfg.train.as_ref().is_some_and(|t| t.block_stats) {
                out.write_csv(
                    &format!("{l}/blockstats.csv"),
                    &["step", "class", "freq", "grad_norm", "hess_trace", "mean_p"],
                    &blockstats_rows(&run.log),
                )?;
                out.write_csv(
                    &format!("{l}/correlation.csv"),
                    &["step", "pearson_log", "n_classes_used", "subset_rule"],
                    &correlation_rows(&run.correlation),
                )?;
            }
            if let Some(grid) = &run.grid {
                out.write_csv(
                    &format!("{l}/grid.csv"),
                    &["alpha", "seed", "final_loss", "unstable"],
                    &grid_rows(grid),
                )?;
            }
            if let Some(h) = &cfg.analysis.heatmap {
                if !run.log.diverged {
                    let map = offdiag_heatmap_sample(&run.model, ds, h.classes, h.dims, h.sampling, h.seed)?;
                    let size = map.size();
                    let vals = map.log10_abs();
                    let rows: Vec<Vec<String>> = (0..size * size)
                        .map(|i| vec![(i / size).to_string(), (i % size).to_string(), fmt_f64(vals[i])])
                        .collect();
                    out.write_csv(&format!("{l}/heatmap.csv"), &["row", "col", "log10_abs"], &rows)?;
                }
            }
            if cfg.output.model {
                write_model(&mut out, &format!("{l}/model"), &run.model)?;
            }
            runs.push(run);
        }
    }
    let manifest = out.finish()?;
    Ok(Outcome {
        out_dir: out_dir.to_path_buf(),
        manifest,
        dataset,
        groups,
        runs,
    })
}
