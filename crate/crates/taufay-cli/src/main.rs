use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};
use taufay::cli_report::{self, ReportError, Suite, SuiteConfig};

/// Run verification suites for Tau functions and the Hirota and Fay identities.
#[derive(Parser, Debug)]
#[command(name = "taufay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one suite (or `all`) and write report.json, report.csv,
    /// plot_data.csv, config.json and timings.json into the output directory.
    ///
    /// Exit status: 0 when every check passes, 1 when a check fails,
    /// 2 on usage or configuration errors.
    Run {
        /// hirota_ops, hirota_formal, fay_genus0, fay_genus1, theta_props,
        /// airy_shift, matrix_fay, decomposition or all.
        #[arg(long)]
        suite: String,
        /// JSON configuration; `{}` selects every default.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    let mut cmd = Cli::command();
    let usage = cmd
        .find_subcommand_mut("run")
        .map(|c| c.render_help().to_string())
        .unwrap_or_default();
    eprintln!("error: {msg}\n\n{usage}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { suite, config, out, seed, jobs } = cli.command;
    let suite = match Suite::parse(suite.trim()) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    if jobs == Some(0) {
        return usage_error("--jobs must be at least 1");
    }
    let cfg = match load_config(&config, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(suite, &cfg, jobs, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<SuiteConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = SuiteConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(suite: Suite, cfg: &SuiteConfig, jobs: Option<usize>, out: &Path) -> Result<bool, ReportError> {
    let (report, timings) = cli_report::run(suite, cfg, jobs)?;
    let paths = cli_report::write_outputs(&report, &timings, out)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        let r = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "error".into());
        println!("FAIL {} residual={} tolerance={:.1e}{}", c.id, r, c.tolerance,
            c.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default());
    }
    println!(
        "{}: {}/{} checks passed; report in {}",
        report.suite,
        report.summary.passed,
        report.summary.total,
        paths.report_json.display()
    );
    Ok(report.all_passed())
}
