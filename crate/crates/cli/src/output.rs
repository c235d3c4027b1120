use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::CliError;
use crate::runner::{Report, Row};

/// JSON summary of one run.
#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub experiment: &'static str,
    pub config: &'a ExperimentConfig,
    pub total: usize,
    pub passed: usize,
    pub all_pass: bool,
    pub rows: &'a [Row],
}

pub fn write_csv<W: Write>(report: &Report, writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in &report.rows {
        w.serialize(row)?;
    }
    if report.rows.is_empty() {
        w.write_record([
            "experiment",
            "variant",
            "n",
            "m",
            "t",
            "eps",
            "f0",
            "n_q",
            "trial",
            "measured",
            "analytic_ref",
            "paper_bound",
            "pass",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(
    report: &Report,
    config: &ExperimentConfig,
    mut writer: W,
) -> Result<(), CliError> {
    let summary = Summary {
        experiment: report.experiment.name(),
        config,
        total: report.rows.len(),
        passed: report.passed(),
        all_pass: report.all_pass(),
        rows: &report.rows,
    };
    serde_json::to_writer_pretty(&mut writer, &summary)?;
    writeln!(writer)?;
    Ok(())
}

/// Render a report in the config's format.
pub fn render(report: &Report, config: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match config.format {
        OutputFormat::Csv => write_csv(report, &mut buf)?,
        OutputFormat::Json => write_json(report, config, &mut buf)?,
    }
    Ok(buf)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
