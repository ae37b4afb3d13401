//! Suite runner and report writers behind the `taufay` command line.
//!
//! A run is a pure function of (suite, configuration, seed): reports are
//! byte-identical across reruns and thread counts. Wall-clock timings go to
//! a separate file so they never disturb that.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, Exec};

pub mod config;
pub mod report;
mod sampling;
mod suites;

pub use config::SuiteConfig;
pub use report::{plot_data, CheckRecord, Comparison, PlotPoint, Report, Summary, PLOT_HEADER, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
    #[error("unknown suite '{0}'; expected one of: {list}", list = Suite::NAMES.join(", "))]
    UnknownSuite(String),
    #[error("suite '{0}' is not part of this report")]
    MissingSuite(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    HirotaOps,
    HirotaFormal,
    FayGenus0,
    FayGenus1,
    ThetaProps,
    AiryShift,
    MatrixFay,
    Decomposition,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 9] = [
        "hirota_ops",
        "hirota_formal",
        "fay_genus0",
        "fay_genus1",
        "theta_props",
        "airy_shift",
        "matrix_fay",
        "decomposition",
        "all",
    ];

    const EACH: [Suite; 8] = [
        Suite::HirotaOps,
        Suite::HirotaFormal,
        Suite::FayGenus0,
        Suite::FayGenus1,
        Suite::ThetaProps,
        Suite::AiryShift,
        Suite::MatrixFay,
        Suite::Decomposition,
    ];

    pub fn parse(name: &str) -> Result<Self, ReportError> {
        let all = Self::EACH.iter().copied().chain([Suite::All]);
        all.zip(Self::NAMES)
            .find(|(_, n)| *n == name)
            .map(|(s, _)| s)
            .ok_or_else(|| ReportError::UnknownSuite(name.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            s => Self::NAMES[Self::EACH.iter().position(|&e| e == s).expect("listed")],
        }
    }

    /// The concrete suites this one expands to.
    pub fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub suite: String,
    pub seconds: f64,
}

/// Run `suite` with `jobs` worker threads (None: rayon's default).
pub fn run(suite: Suite, config: &SuiteConfig, jobs: Option<usize>) -> Result<(Report, Vec<Timing>), ReportError> {
    config.validate()?;
    let exec = if Exec::parallel_available() && jobs != Some(1) {
        Exec::Parallel
    } else {
        Exec::Sequential
    };
    let mut checks = Vec::new();
    let mut plot = Vec::new();
    let mut timings = Vec::new();
    let mut names = Vec::new();
    for s in suite.members() {
        let start = Instant::now();
        let out = exec::with_jobs(jobs, || suites::run_one(s, config, exec))?;
        timings.push(Timing {
            suite: s.name().into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        checks.extend(out.checks);
        plot.extend(out.plot);
        names.push(s.name().to_string());
    }
    Ok((Report::new(suite.name(), names, config.clone(), checks, plot), timings))
}

/// Files written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub report_json: PathBuf,
    pub report_csv: PathBuf,
    pub plot_csv: PathBuf,
    pub config_json: PathBuf,
    pub timings_json: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            report_json: dir.join("report.json"),
            report_csv: dir.join("report.csv"),
            plot_csv: dir.join("plot_data.csv"),
            config_json: dir.join("config.json"),
            timings_json: dir.join("timings.json"),
        }
    }
}

pub fn write_outputs(report: &Report, timings: &[Timing], dir: &Path) -> Result<OutputPaths, ReportError> {
    std::fs::create_dir_all(dir)?;
    let p = OutputPaths::in_dir(dir);
    std::fs::write(&p.report_json, report.to_json())?;
    std::fs::write(&p.report_csv, report.to_csv()?)?;
    std::fs::write(&p.plot_csv, plot_data(report, None)?)?;
    std::fs::write(&p.config_json, report.config.to_json() + "\n")?;
    std::fs::write(&p.timings_json, serde_json::to_string_pretty(timings)? + "\n")?;
    Ok(p)
}
