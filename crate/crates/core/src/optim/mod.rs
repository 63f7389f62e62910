//! Optimizers, loss reweighting, the training loop and step-size search.

mod grid;
mod kernel;
mod reweight;
mod step;
mod train;

pub use grid::{
    grid_search, grid_search_with, GridCell, GridProblem, GridResult, GridSpec, LinearGridProblem,
    ObjectiveGridProblem, RunSummary,
};
pub use reweight::{reweight_weights, Reweight};
pub use step::{adam_step, direction, momentum_step, AdamParams, Family, OptimizerConfig, OptimizerState};
pub use train::{
    checkpoints_every, checkpoints_log, run_objective, train, train_with_groups, BatchMode, Engine, Evaluation,
    LinearObjective, Objective, QuadraticObjective, Record, TrainConfig, TrajectoryLog,
};
