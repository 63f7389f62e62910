//! Checked-in experiment configurations, runnable by name.

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// `(name, TOML)` for every replication target.
pub const TARGETS: [(&str, &str); 7] = [
    ("linear", include_str!("../configs/linear.toml")),
    ("opts", include_str!("../configs/opts.toml")),
    ("grad-hess", include_str!("../configs/grad-hess.toml")),
    ("quadratic", include_str!("../configs/quadratic.toml")),
    ("theory", include_str!("../configs/theory.toml")),
    ("reweight", include_str!("../configs/reweight.toml")),
    ("input-dist", include_str!("../configs/input-dist.toml")),
];

/// Pilot-derived pass thresholds for the replication checks.
pub const EXPECTATIONS: &str = include_str!("../configs/expectations.toml");

pub fn names() -> Vec<&'static str> {
    TARGETS.iter().map(|(n, _)| *n).collect()
}

pub fn config(name: &str) -> Result<ExperimentConfig, CliError> {
    let (_, text) = TARGETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::config(
            "target",
            format!("unknown target `{name}` (expected one of {})", names().join(", ")),
        )
    })?;
    ExperimentConfig::from_toml(text)
}
