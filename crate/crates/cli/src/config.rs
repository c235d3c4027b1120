use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest index register, in qubits.
pub const MAX_N: u32 = 3;
/// Largest value register, in qubits.
pub const MAX_M: u32 = 10;
/// Largest precision register, in qubits.
pub const MAX_T: u32 = 7;
/// Largest query count for random algorithm fits.
pub const MAX_QUERIES: usize = 4;
/// Grid points a single run may schedule.
pub const MAX_GRID_POINTS: u128 = 1_000_000;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QQUERY_OUT_DIR";

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SimError,
    TrigFit,
    Bernstein,
    Evaluation,
    Mean,
    Perturbation,
    Theorem1,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SimError => "sim-error",
            Experiment::TrigFit => "trig-fit",
            Experiment::Bernstein => "bernstein",
            Experiment::Evaluation => "evaluation",
            Experiment::Mean => "mean",
            Experiment::Perturbation => "perturbation",
            Experiment::Theorem1 => "theorem1",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A sweep over parameter lists. Each experiment reads only the lists it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawConfig")]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Index register widths.
    pub n: Vec<u32>,
    /// Value register widths.
    pub m: Vec<u32>,
    /// Precision register widths.
    pub t: Vec<u32>,
    pub eps: Vec<f64>,
    /// Query counts for random-algorithm fits.
    pub queries: Vec<usize>,
    pub seed: i64,
    /// Random instances per grid point.
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::default_for(Experiment::SimError)
    }
}

impl ExperimentConfig {
    /// Default sweep for one experiment.
    pub fn default_for(experiment: Experiment) -> Self {
        let n = match experiment {
            Experiment::TrigFit => vec![0, 1],
            _ => vec![0, 1, 2, 3],
        };
        Self {
            experiment,
            n,
            m: (1..=8).collect(),
            t: (3..=7).collect(),
            eps: (3..=7).map(|k| (-(k as f64)).exp2()).collect(),
            queries: (1..=4).collect(),
            seed: 0,
            trials: 20,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

/// File form of [`ExperimentConfig`]; missing fields take the experiment's defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    n: Option<Vec<u32>>,
    m: Option<Vec<u32>>,
    t: Option<Vec<u32>>,
    eps: Option<Vec<f64>>,
    queries: Option<Vec<usize>>,
    seed: Option<i64>,
    trials: Option<usize>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

impl From<RawConfig> for ExperimentConfig {
    fn from(raw: RawConfig) -> Self {
        let d = Self::default_for(raw.experiment.unwrap_or(Experiment::SimError));
        Self {
            experiment: d.experiment,
            n: raw.n.unwrap_or(d.n),
            m: raw.m.unwrap_or(d.m),
            t: raw.t.unwrap_or(d.t),
            eps: raw.eps.unwrap_or(d.eps),
            queries: raw.queries.unwrap_or(d.queries),
            seed: raw.seed.unwrap_or(d.seed),
            trials: raw.trials.unwrap_or(d.trials),
            out: raw.out.or(d.out),
            format: raw.format.unwrap_or(d.format),
        }
    }
}

/// A reason a config cannot run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn check_list<T: Copy + PartialOrd + fmt::Display>(
    out: &mut Vec<Violation>,
    field: &'static str,
    values: &[T],
    min: T,
    max: T,
) {
    if values.is_empty() {
        out.push(Violation {
            field,
            message: "empty parameter range".into(),
        });
    }
    for &v in values {
        if v > max {
            out.push(Violation {
                field,
                message: format!("{field} = {v} exceeds budget {max}"),
            });
        } else if v < min {
            out.push(Violation {
                field,
                message: format!("{field} = {v} is below minimum {min}"),
            });
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Lists this experiment reads.
    fn used_fields(&self) -> &'static [&'static str] {
        match self.experiment {
            Experiment::SimError => &["n", "m", "trials"],
            Experiment::TrigFit => &["n", "queries", "trials"],
            Experiment::Bernstein => &["trials"],
            Experiment::Evaluation => &["m", "t", "trials"],
            Experiment::Mean => &["n", "t", "trials"],
            Experiment::Perturbation => &["t", "eps", "trials"],
            Experiment::Theorem1 => &["t", "eps"],
        }
    }

    /// Every problem with the config; empty iff it is runnable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let used = self.used_fields();
        if used.contains(&"n") {
            let max = if self.experiment == Experiment::TrigFit {
                1
            } else {
                MAX_N
            };
            check_list(&mut out, "n", &self.n, 0, max);
        }
        if used.contains(&"m") {
            check_list(&mut out, "m", &self.m, 1, MAX_M);
        }
        if used.contains(&"t") {
            check_list(&mut out, "t", &self.t, 1, MAX_T);
        }
        if used.contains(&"queries") {
            check_list(&mut out, "queries", &self.queries, 1, MAX_QUERIES);
        }
        if used.contains(&"eps") {
            if self.eps.is_empty() {
                out.push(Violation {
                    field: "eps",
                    message: "empty parameter range".into(),
                });
            }
            for &e in &self.eps {
                if !(e > 0.0 && e < 0.25) {
                    out.push(Violation {
                        field: "eps",
                        message: format!("eps = {e} outside (0, 0.25)"),
                    });
                }
            }
        }
        if used.contains(&"trials") && self.trials == 0 {
            out.push(Violation {
                field: "trials",
                message: "empty parameter range".into(),
            });
        }
        if self.seed < 0 {
            out.push(Violation {
                field: "seed",
                message: format!("seed = {} is negative", self.seed),
            });
        }
        out
    }

    /// Number of grid points the run would schedule.
    pub fn grid_points(&self) -> u128 {
        let len = |k: usize| k as u128;
        let trials = len(self.trials);
        match self.experiment {
            Experiment::SimError => len(self.n.len()) * len(self.m.len()) * trials,
            Experiment::TrigFit => len(self.n.len()) * len(self.queries.len()) * trials,
            Experiment::Bernstein => trials,
            Experiment::Evaluation => len(self.m.len()) * trials + len(self.t.len()) * 5,
            Experiment::Mean => len(self.n.len()) * len(self.t.len()) * trials,
            Experiment::Perturbation => len(self.eps.len()) * (1 + len(self.t.len())) + trials,
            Experiment::Theorem1 => len(self.eps.len()) * len(self.t.len()),
        }
    }

    /// Budget check performed before any computation.
    pub fn check_resources(&self) -> Result<(), CliError> {
        let points = self.grid_points();
        if points > MAX_GRID_POINTS {
            return Err(CliError::Resource(format!(
                "{points} grid points requested, budget is {MAX_GRID_POINTS}"
            )));
        }
        Ok(())
    }

    /// `out`, or `<$QQUERY_OUT_DIR or .>/<experiment>.<ext>`.
    pub fn output_path(&self, env_dir: Option<&Path>) -> PathBuf {
        match &self.out {
            Some(p) => p.clone(),
            None => env_dir.unwrap_or(Path::new(".")).join(format!(
                "{}.{}",
                self.experiment,
                self.format.extension()
            )),
        }
    }
}
