//! Config-driven experiments: a TOML file selects a pipeline (wave, 1D or
//! 2D run, heat, Dirichlet problem, or a suite of other configs), the run
//! writes its tables and field dumps into a run directory, and every check
//! is recorded as a gate with its measured value and threshold.
//!
//! Field dumps are raw little-endian `f64` values, row-major with x
//! fastest, next to a JSON sidecar giving the shape, grids, frame and time;
//! `field_<n>` is the n-th entry of `dump_times`.

mod config;
mod pipelines;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    Analysis2d, Config, DecayConfig, DirichletCheck, DirichletConfig, FactorialCheck, HeatConfig, PiecewiseSpec,
    Pipeline, Run1dConfig, Run2dConfig, ScalingConfig, ScenarioSpec, SpectralConfig, StepConfig, SuiteConfig,
    WaveConfig,
};
pub use report::{emit_report, read_field_dump, ReportSummary};

use crate::diffusive::DiffusiveError;
use crate::front::{FrontError, FrontTrace};
use crate::heat::HeatError;
use crate::kpp1d::SolverError;
use crate::scenarios::{Scenario, ScenarioError};
use crate::wave::WaveError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("config is for the `{found}` pipeline, the command asked for `{expected}`")]
    PipelineMismatch { expected: String, found: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("wave: {0}")]
    Wave(#[from] WaveError),
    #[error("front: {0}")]
    Front(#[from] FrontError),
    #[error("heat: {0}")]
    Heat(#[from] HeatError),
    #[error("diffusive zone: {0}")]
    Diffusive(#[from] DiffusiveError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for configuration problems (including data that violate their
    /// own constraints), 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Scenario(_) => 2,
            _ => 1,
        }
    }
}

/// One acceptance check: a measured value against optional bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Gate {
    pub fn within(name: &str, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        // NaN fails every comparison, so a missing measurement fails
        let pass = measured.is_finite() && lower.is_none_or(|l| measured >= l) && upper.is_none_or(|u| measured <= u);
        Self {
            name: name.to_string(),
            measured,
            lower,
            upper,
            pass,
        }
    }

    pub fn at_most(name: &str, measured: f64, upper: f64) -> Self {
        Self::within(name, measured, None, Some(upper))
    }

    pub fn at_least(name: &str, measured: f64, lower: f64) -> Self {
        Self::within(name, measured, Some(lower), None)
    }

    pub fn describe(&self) -> String {
        let bound = match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("in [{l:e}, {u:e}]"),
            (Some(l), None) => format!(">= {l:e}"),
            (None, Some(u)) => format!("<= {u:e}"),
            (None, None) => "recorded".into(),
        };
        format!(
            "{} {}: {:.6e} {bound}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured
        )
    }
}

/// A field dump written by the run, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRef {
    pub t: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of `config.toml` in the run directory
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub pipeline: Pipeline,
    pub scenario: Option<Scenario>,
    pub config: Config,
    pub checkpoints: Vec<FieldRef>,
    pub front: Option<FrontTrace>,
    /// named fit results and diagnostics
    pub fits: BTreeMap<String, serde_json::Value>,
    pub gates: Vec<Gate>,
    /// CSV tables written into the run directory
    pub tables: Vec<String>,
    pub provenance: Provenance,
    pub dir: PathBuf,
    /// runs of a suite
    pub members: Vec<RunRecord>,
    pub elapsed_seconds: f64,
}

impl RunRecord {
    pub fn pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass) && self.members.iter().all(RunRecord::pass)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    /// Checks that every referenced artifact exists, then writes
    /// `record.json`.
    pub fn save(&self) -> Result<(), RunError> {
        let files = self
            .checkpoints
            .iter()
            .map(|c| c.file.as_str())
            .chain(self.tables.iter().map(String::as_str))
            .chain(["config.toml"]);
        for f in files {
            let path = self.dir.join(f);
            if !path.is_file() {
                return Err(RunError::io(
                    &path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced artifact missing"),
                ));
            }
        }
        let path = self.dir.join("record.json");
        let text = serde_json::to_string_pretty(self).expect("record serializes");
        std::fs::write(&path, text).map_err(|e| RunError::io(&path, e))
    }
}

/// Where and how a config is run.
#[derive(Debug, Clone)]
pub struct Settings {
    /// the run directory is `out/<config name>`
    pub out: PathBuf,
    pub threads: usize,
    /// pipeline demanded by the command line, if any
    pub expect: Option<Pipeline>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            out: PathBuf::from("runs"),
            threads: 1,
            expect: None,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Config::from_toml(&text, path)
}

/// Parses and validates the config at `config_path`, runs its pipeline in
/// `settings.out/<name>`, and saves the record there.
pub fn run_experiment(config_path: &Path, settings: &Settings) -> Result<RunRecord, RunError> {
    let config = load_config(config_path)?;
    if let Some(expected) = settings.expect {
        if expected != config.pipeline {
            return Err(ConfigError::PipelineMismatch {
                expected: expected.name().into(),
                found: config.pipeline.name().into(),
            }
            .into());
        }
    }
    let dir = settings.out.join(&config.name);
    std::fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    let snapshot = toml::to_string(&config).expect("config serializes");
    let snapshot_path = dir.join("config.toml");
    std::fs::write(&snapshot_path, &snapshot).map_err(|e| RunError::io(&snapshot_path, e))?;

    let started = std::time::Instant::now();
    let mut record = RunRecord {
        name: config.name.clone(),
        pipeline: config.pipeline,
        scenario: None,
        config: config.clone(),
        checkpoints: vec![],
        front: None,
        fits: BTreeMap::new(),
        gates: vec![],
        tables: vec![],
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: sha256_hex(snapshot.as_bytes()),
        },
        dir: dir.clone(),
        members: vec![],
        elapsed_seconds: 0.0,
    };
    match config.pipeline {
        Pipeline::Wave => pipelines::wave(&config, &mut record)?,
        Pipeline::Run1d => pipelines::run1d(&config, &mut record)?,
        Pipeline::Run2d => pipelines::run2d(&config, settings.threads, &mut record)?,
        Pipeline::Heat => pipelines::heat(&config, &mut record)?,
        Pipeline::Dirichlet => pipelines::dirichlet(&config, &mut record)?,
        Pipeline::Suite => {
            let base = config_path.parent().unwrap_or(Path::new("."));
            let inner = Settings {
                out: dir.clone(),
                threads: settings.threads,
                expect: None,
            };
            for member in &config.suite.as_ref().expect("validated").members {
                let member = run_experiment(&base.join(member), &inner)?;
                record.members.push(member);
            }
        }
    }
    record.elapsed_seconds = started.elapsed().as_secs_f64();
    record.save()?;
    Ok(record)
}

/// Runs a config and writes its report; returns the process exit code
/// (0 all gates pass, 1 a gate failed or the run broke, 2 config error).
pub fn execute(config_path: &Path, settings: &Settings) -> i32 {
    let record = match run_experiment(config_path, settings) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let summary = match emit_report(std::slice::from_ref(&record), &record.dir) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot write the report: {e}");
            return 1;
        }
    };
    for line in &summary.lines {
        println!("{line}");
    }
    println!(
        "{}: {} gates, {} failed; report in {}",
        record.name,
        summary.gates,
        summary.failed,
        record.dir.display()
    );
    if summary.pass {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_compare_and_reject_nan() {
        assert!(Gate::at_most("a", 0.5, 1.0).pass);
        assert!(!Gate::at_most("a", 1.5, 1.0).pass);
        assert!(Gate::within("b", -1.5, Some(-1.65), Some(-1.35)).pass);
        assert!(!Gate::at_least("c", f64::NAN, 0.0).pass);
        assert!(Gate::at_most("d", 1.0, 1.0).describe().starts_with("PASS d"));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
