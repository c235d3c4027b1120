//! Configuration, execution and output for the `qquery` sweeps.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentConfig, OutputFormat, Violation};
pub use error::{exit, CliError};
pub use runner::{run, Report, Row};

/// Run `config`, write the output file and return the report and its path.
pub fn execute(
    config: &ExperimentConfig,
    env_dir: Option<&Path>,
) -> Result<(Report, PathBuf), CliError> {
    let report = run(config)?;
    let path = config.output_path(env_dir);
    output::write_file(&path, &output::render(&report, config)?)?;
    Ok((report, path))
}
