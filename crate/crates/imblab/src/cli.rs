//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{DatasetSource, ExperimentConfig, TheoryCase};
use crate::error::CliError;
use crate::experiment::{build_dataset, run_experiment, theory_rows, THEORY_HEADER};
use crate::io::{write_dataset, OutputDir};
use crate::replicate;

#[derive(Debug, Parser)]
#[command(name = "imblab", version, about = "Class-imbalance optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config (TOML, or JSON such as a `config.resolved.json`).
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `out_dir`, then `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradient flow against sign descent on the simple imbalanced problem.
    Theory {
        #[arg(long)]
        c: usize,
        #[arg(long)]
        pi: f64,
        #[arg(long = "t-max")]
        t_max: f64,
        /// RK4 step in units of 1/(c·pi).
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 101)]
        rows: usize,
        /// CSV file, or a directory to hold `theory.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a checked-in replication config.
    Replicate {
        /// linear, opts, grad-hess, quadratic, theory, reweight or input-dist.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dataset utilities.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Write the dataset described by a TOML spec (a `[dataset]` table body).
    Gen {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse `args` (program name first), run, report, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("imblab: {e}");
            e.exit_code()
        }
    }
}

fn default_out(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| Path::new("out").join(&cfg.name))
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| default_out(&cfg));
            let base = config.parent().unwrap_or(Path::new("."));
            let outcome = run_experiment(&cfg, &out, base)?;
            Ok(summary(&outcome))
        }
        Command::Replicate { name, out } => {
            let cfg = replicate::config(&name)?;
            let out = out.unwrap_or_else(|| default_out(&cfg));
            let outcome = run_experiment(&cfg, &out, Path::new("."))?;
            Ok(summary(&outcome))
        }
        Command::Theory {
            c,
            pi,
            t_max,
            dt,
            rows,
            out,
        } => {
            let rows = theory_rows(&TheoryCase { c, pi, t_max, dt, rows })?;
            let path = if out.extension().is_some_and(|e| e == "csv") {
                out
            } else {
                out.join("theory.csv")
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            std::fs::write(&path, crate::io::csv_bytes(&THEORY_HEADER, &rows)).map_err(|e| CliError::io(&path, e))?;
            Ok(format!("wrote {} rows to {}", rows.len(), path.display()))
        }
        Command::Dataset {
            command: DatasetCommand::Gen { spec, out },
        } => {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| CliError::config("", format!("cannot read {}: {e}", spec.display())))?;
            let source: DatasetSource = serde_path_to_error::deserialize(toml::Deserializer::new(&text))
                .map_err(|e| CliError::config(e.path().to_string(), e.inner().message().trim()))?;
            let base = spec.parent().unwrap_or(Path::new("."));
            let ds = build_dataset(&source, base)?;
            let mut dir = OutputDir::create(&out)?;
            write_dataset(&mut dir, "", &ds)?;
            dir.finish()?;
            Ok(format!(
                "wrote {} samples, {} classes, dimension {} to {}",
                ds.num_samples(),
                ds.num_classes(),
                ds.input_dim(),
                out.display()
            ))
        }
    }
}

fn summary(o: &crate::experiment::Outcome) -> String {
    let mut s = format!("wrote {} files to {}", o.manifest.files.len() + 1, o.out_dir.display());
    for r in &o.runs {
        let last = r.log.final_record().map(|x| x.loss).unwrap_or(f64::NAN);
        s.push_str(&format!(
            "\n  {}: alpha={} final_loss={}{}",
            r.label,
            crate::io::fmt_f64(r.alpha),
            crate::io::fmt_f64(last),
            if r.log.diverged { " (diverged)" } else { "" }
        ));
    }
    s
}
