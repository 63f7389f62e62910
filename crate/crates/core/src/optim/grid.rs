//! Step-size selection over powers of ten with one half-decade refinement.

use alloc::vec::Vec;

use super::step::{Family, OptimizerConfig};
use super::train::{run_objective, train_with_groups, Objective, TrainConfig, TrajectoryLog};
use crate::dataset::{Dataset, FrequencyGroups};
use crate::error::{Error, Result};
use crate::math;
use crate::model::LinearModel;

/// Outcome of one `(alpha, seed)` run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    /// `+inf` for diverged runs.
    pub final_loss: f64,
    pub unstable: bool,
}

impl RunSummary {
    pub fn of(log: &TrajectoryLog) -> Self {
        RunSummary {
            final_loss: log.final_loss(),
            unstable: log.unstable(),
        }
    }
}

/// A problem whose optimizer family and budget are fixed; only the step size
/// and seed vary.
pub trait GridProblem {
    fn run(&self, alpha: f64, seed: u64) -> Result<RunSummary>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Exponents of the coarse grid.
    pub exponents: Vec<i32>,
    /// Add `10^(x ± 0.5)` around the coarse best.
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            exponents: (-6..=1).collect(),
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub alpha: f64,
    pub seed: u64,
    pub final_loss: f64,
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best_alpha: f64,
    /// Every evaluated cell, ordered by `(alpha, seed)`.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    /// Worst final loss over seeds at `alpha`.
    pub fn score(&self, alpha: f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.alpha == alpha)
            .map(|c| c.final_loss)
            .fold(
                f64::NEG_INFINITY,
                |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) },
            )
    }
}

fn power(x: f64) -> f64 {
    math::pow(10.0, x)
}

/// Run `problem` over the grid, evaluating cells through `eval` (which may
/// run them in parallel but must return results in input order).
///
/// The score of a step size is the largest final loss over seeds. The best
/// coarse step size gets neighbors at `±0.5` decades; the best of all
/// evaluated step sizes is kept unless one of its runs was unstable, in
/// which case the next smaller evaluated step size is tried, and so on.
pub fn grid_search_with<E>(seeds: &[u64], spec: &GridSpec, mut eval: E) -> Result<GridResult>
where
    E: FnMut(&[(f64, u64)]) -> Vec<Result<RunSummary>>,
{
    if seeds.is_empty() {
        return Err(crate::error::invalid("seeds", "need at least one seed"));
    }
    if spec.exponents.is_empty() {
        return Err(crate::error::invalid("grid", "empty step-size grid"));
    }
    let mut exps: Vec<f64> = spec.exponents.iter().map(|&e| e as f64).collect();
    exps.sort_by(|a, b| a.partial_cmp(b).expect("finite exponents"));
    exps.dedup();
    let mut cells: Vec<GridCell> = Vec::new();
    let mut run = |xs: &[f64], cells: &mut Vec<GridCell>| -> Result<()> {
        let jobs: Vec<(f64, u64)> = xs
            .iter()
            .flat_map(|&x| seeds.iter().map(move |&s| (power(x), s)))
            .collect();
        let out = eval(&jobs);
        for ((alpha, seed), r) in jobs.into_iter().zip(out) {
            let r = r?;
            cells.push(GridCell {
                alpha,
                seed,
                final_loss: r.final_loss,
                unstable: r.unstable,
            });
        }
        Ok(())
    };
    run(&exps, &mut cells)?;
    let score = |cells: &[GridCell], x: f64| {
        let a = power(x);
        cells
            .iter()
            .filter(|c| c.alpha == a)
            .map(|c| {
                if c.final_loss.is_nan() {
                    f64::INFINITY
                } else {
                    c.final_loss
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let argmin = |cells: &[GridCell], xs: &[f64]| {
        let mut best = xs[0];
        for &x in xs {
            if score(cells, x) < score(cells, best) {
                best = x;
            }
        }
        best
    };
    let coarse_best = argmin(&cells, &exps);
    if spec.refine {
        let extra: Vec<f64> = [coarse_best - 0.5, coarse_best + 0.5]
            .into_iter()
            .filter(|x| !exps.contains(x))
            .collect();
        run(&extra, &mut cells)?;
        exps.extend(extra);
        exps.sort_by(|a, b| a.partial_cmp(b).expect("finite exponents"));
    }
    cells.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap().then(a.seed.cmp(&b.seed)));
    if exps.iter().all(|&x| score(&cells, x) == f64::INFINITY) {
        return Err(Error::NoViableStepSize);
    }
    let unstable = |x: f64| cells.iter().any(|c| c.alpha == power(x) && c.unstable);
    let best = argmin(&cells, &exps);
    let pos = exps.iter().position(|&x| x == best).expect("evaluated");
    let chosen = exps[..=pos]
        .iter()
        .rev()
        .copied()
        .find(|&x| !unstable(x))
        // no stable step size at or below the best: keep the best finite one
        .unwrap_or(best);
    Ok(GridResult {
        best_alpha: power(chosen),
        cells,
    })
}

/// Sequential [`grid_search_with`].
pub fn grid_search<P: GridProblem + ?Sized>(problem: &P, seeds: &[u64], spec: &GridSpec) -> Result<GridResult> {
    grid_search_with(seeds, spec, |jobs| {
        jobs.iter().map(|&(a, s)| problem.run(a, s)).collect()
    })
}

/// Training the linear model from a fixed initialization; the seed drives
/// minibatch shuffling and, when `init_sigma` is set, a Gaussian
/// initialization.
pub struct LinearGridProblem<'a> {
    pub dataset: &'a Dataset,
    pub groups: &'a FrequencyGroups,
    pub bias: bool,
    pub init_sigma: Option<f64>,
    pub config: TrainConfig,
}

impl LinearGridProblem<'_> {
    pub fn train(&self, alpha: f64, seed: u64) -> Result<(TrajectoryLog, LinearModel)> {
        let (c, d) = (self.dataset.num_classes(), self.dataset.input_dim());
        let mut model = match self.init_sigma {
            Some(sigma) => LinearModel::gaussian(c, d, self.bias, sigma, seed)?,
            None => LinearModel::zeros(c, d, self.bias),
        };
        let config = TrainConfig {
            optimizer: self.config.optimizer.with_alpha(alpha),
            seed,
            ..self.config.clone()
        };
        let log = train_with_groups(&mut model, self.dataset, self.groups, &config)?;
        Ok((log, model))
    }
}

impl GridProblem for LinearGridProblem<'_> {
    fn run(&self, alpha: f64, seed: u64) -> Result<RunSummary> {
        Ok(RunSummary::of(&self.train(alpha, seed)?.0))
    }
}

/// Any cloneable [`Objective`] started from `init`.
pub struct ObjectiveGridProblem<O> {
    pub objective: O,
    pub init: Vec<f64>,
    pub family: Family,
    pub steps: usize,
}

impl<O: Objective + Clone> GridProblem for ObjectiveGridProblem<O> {
    fn run(&self, alpha: f64, seed: u64) -> Result<RunSummary> {
        let mut obj = self.objective.clone();
        let mut params = self.init.clone();
        let mut config = TrainConfig::new(OptimizerConfig::new(self.family, alpha), self.steps);
        config.seed = seed;
        config.checkpoints = (0..=self.steps).collect();
        Ok(RunSummary::of(&run_objective(&mut obj, &mut params, &config)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::QuadraticObjective;

    fn quadratic(pi: f64) -> ObjectiveGridProblem<QuadraticObjective> {
        ObjectiveGridProblem {
            objective: QuadraticObjective {
                weights: alloc::vec![pi],
            },
            init: alloc::vec![1.0],
            family: Family::Gd,
            steps: 20,
        }
    }

    #[test]
    fn quadratic_picks_inverse_curvature() {
        for pi in [1.0, 0.1] {
            let r = grid_search(&quadratic(pi), &[0], &GridSpec::default()).unwrap();
            assert!((r.best_alpha * pi - 1.0).abs() < 1e-12, "pi={pi}: {}", r.best_alpha);
            // α = 10^0.5/π overshoots past the stability limit 2/π
            let over = r
                .cells
                .iter()
                .find(|c| (c.alpha * pi - math::pow(10.0, 0.5)).abs() < 1e-9)
                .unwrap();
            assert!(over.unstable);
        }
    }

    #[test]
    fn single_alpha() {
        let spec = GridSpec {
            exponents: alloc::vec![-1],
            refine: false,
        };
        let r = grid_search(&quadratic(1.0), &[0], &spec).unwrap();
        assert_eq!(r.best_alpha, 0.1);
        let spec = GridSpec {
            exponents: alloc::vec![4],
            refine: false,
        };
        let q = ObjectiveGridProblem {
            steps: 2000,
            ..quadratic(1.0)
        };
        assert_eq!(grid_search(&q, &[0], &spec), Err(Error::NoViableStepSize));
    }

    #[test]
    fn repeated_seed_same_score() {
        let a = grid_search(&quadratic(0.3), &[4], &GridSpec::default()).unwrap();
        let b = grid_search(&quadratic(0.3), &[4, 4], &GridSpec::default()).unwrap();
        assert_eq!(a.best_alpha, b.best_alpha);
        for x in [1e-3, 1.0] {
            assert_eq!(a.score(x), b.score(x));
        }
    }

    struct Scripted;

    impl GridProblem for Scripted {
        // best final loss at 1e-1, but that run is unstable; 1e-2 is stable
        fn run(&self, alpha: f64, _seed: u64) -> Result<RunSummary> {
            let x = math::log10(alpha);
            Ok(RunSummary {
                final_loss: (x + 1.0).abs(),
                unstable: x > -1.5,
            })
        }
    }

    #[test]
    fn unstable_best_falls_back() {
        let r = grid_search(&Scripted, &[0], &GridSpec::default()).unwrap();
        assert!((r.best_alpha - 10f64.powf(-1.5)).abs() < 1e-15);
        let spec = GridSpec {
            refine: false,
            ..GridSpec::default()
        };
        let r = grid_search(&Scripted, &[0], &spec).unwrap();
        assert!((r.best_alpha - 1e-2).abs() < 1e-18);
    }
}
