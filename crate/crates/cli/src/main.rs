use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qquery_cli::config::OUT_DIR_ENV;
use qquery_cli::{execute, exit, CliError, Experiment, ExperimentConfig, OutputFormat};

/// Run query-model bound verification sweeps and write a results table.
#[derive(Debug, Parser)]
#[command(name = "qquery", version)]
struct Args {
    /// Experiment to run.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<i64>,
    /// Output file; defaults to `$QQUERY_OUT_DIR/<experiment>.<format>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Value register widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Index register widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// Precision register widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<u32>>,
    /// Target precisions, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Query counts for trig-fit, comma separated.
    #[arg(long, value_delimiter = ',')]
    queries: Option<Vec<usize>>,
    /// Random instances per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Default output directory.
    #[arg(long, env = OUT_DIR_ENV, hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

fn build_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default_for(args.experiment.unwrap_or(Experiment::SimError)),
    };
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(v) = &args.m {
        cfg.m = v.clone();
    }
    if let Some(v) = &args.n {
        cfg.n = v.clone();
    }
    if let Some(v) = &args.t {
        cfg.t = v.clone();
    }
    if let Some(v) = &args.eps {
        cfg.eps = v.clone();
    }
    if let Some(v) = &args.queries {
        cfg.queries = v.clone();
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = build_config(&args).and_then(|cfg| execute(&cfg, args.out_dir.as_deref()));
    let code = match result {
        Ok((report, path)) => {
            eprintln!(
                "{}: {}/{} rows pass -> {}",
                report.experiment,
                report.passed(),
                report.rows.len(),
                path.display()
            );
            if report.all_pass() {
                exit::PASS
            } else {
                exit::VIOLATION
            }
        }
        Err(e) => {
            eprintln!("qquery: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
