//! Argument parsing and the run loop of the `sobolev-lab` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{LabError, Result};
use crate::harness::config::{ExperimentConfig, Suite};
use crate::harness::report::{emit_report, Summary};
use crate::harness::suites::run_suite;

/// Environment variable naming the output directory.
pub const ENV_OUT: &str = "SOBOLEV_LAB_OUT";
/// Environment variable bounding the worker threads.
pub const ENV_THREADS: &str = "SOBOLEV_LAB_THREADS";
/// Output directory used when nothing else is given.
pub const DEFAULT_OUT: &str = "sobolev-lab-out";

/// Exit status when every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when at least one check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for configuration and output-path errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sobolev-lab", version, about = "Numerical checks for reparametrization actions on Sobolev mapping spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one suite and write `<suite>.csv` and `<suite>.json`.
    Run(RunArgs),
    /// List the available suites.
    ListSuites,
    /// Print the default TOML configuration of a suite.
    PrintDefaultConfig {
        #[arg(default_value = "norm")]
        suite: String,
    },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Suite name, as printed by `list-suites`.
    suite: String,
    /// TOML configuration; missing keys take the suite defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed every random draw derives from.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides SOBOLEV_LAB_OUT and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolutions, comma separated; sets the chart resolution of the
    /// sphere suites to the first entry.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<usize>,
    /// Worker threads (overrides SOBOLEV_LAB_THREADS and the config).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write a plotting script next to the report.
    #[arg(long)]
    plot: bool,
}

fn is_sphere_suite(suite: Suite) -> bool {
    matches!(suite, Suite::SliceRoundtrip | Suite::Equivariance | Suite::Cutoff)
}

fn env_value(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

/// The configuration after applying the config file, the environment and the flags.
fn resolve(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf)> {
    let suite: Suite = args.suite.parse()?;
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path, suite)?,
        None => ExperimentConfig::for_suite(suite),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !args.grid.is_empty() {
        if is_sphere_suite(suite) {
            cfg.chart_n = args.grid[0];
        }
        cfg.grids = args.grid.clone();
    }
    if let Some(t) = env_value(ENV_THREADS) {
        cfg.threads = Some(t.parse().map_err(|_| LabError::Config(format!("{ENV_THREADS}={t} is not a count")))?);
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let out = args
        .out
        .clone()
        .or_else(|| env_value(ENV_OUT).map(PathBuf::from))
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    cfg.validate()?;
    Ok((cfg, out))
}

/// Fails unless `dir` exists or can be created and accepts new files.
fn check_writable(dir: &Path) -> Result<()> {
    let err = |e: std::io::Error| LabError::Config(format!("output directory {} is not writable: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(err)?;
    let probe = dir.join(".sobolev-lab-write-check");
    std::fs::write(&probe, b"").map_err(err)?;
    std::fs::remove_file(&probe).map_err(err)
}

fn run(args: &RunArgs) -> std::result::Result<i32, (i32, LabError)> {
    let (cfg, out) = resolve(args).map_err(|e| (EXIT_CONFIG, e))?;
    check_writable(&out).map_err(|e| (EXIT_CONFIG, e))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| (EXIT_CONFIG, LabError::Config(e.to_string())))?;
    let output = pool.install(|| run_suite(&cfg)).map_err(|e| (EXIT_FAIL, e))?;
    let summary = Summary::new(&cfg, &output.rows, output.details);
    let files = emit_report(&out, &summary, &output.rows, args.plot).map_err(|e| (EXIT_CONFIG, e))?;
    for row in output.rows.iter().filter(|r| !r.pass) {
        let threshold = row.threshold.map(|t| format!("{t:e}")).unwrap_or_else(|| "-".into());
        println!("FAIL {} {} value={:e} threshold={threshold}", row.cell, row.metric, row.value);
    }
    let c = &summary.counts;
    println!(
        "{}: {} checks, {} passed, {} failed, {} informational",
        cfg.suite, c.total, c.passed, c.failed, c.informational
    );
    println!("wrote {} and {}", files.csv.display(), files.json.display());
    if let Some(plot) = files.plot {
        println!("wrote {}", plot.display());
    }
    Ok(if summary.all_passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::ListSuites => {
            for suite in Suite::ALL {
                println!("{:<20} {}", suite.name(), suite.description());
            }
            EXIT_PASS
        }
        Command::PrintDefaultConfig { suite } => match suite.parse::<Suite>() {
            Ok(suite) => {
                print!("{}", ExperimentConfig::for_suite(suite).to_toml());
                EXIT_PASS
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        Command::Run(args) => match run(&args) {
            Ok(code) => code,
            Err((code, e)) => {
                eprintln!("error: {e}");
                code
            }
        },
    }
}
