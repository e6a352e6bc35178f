//! Command-line pipelines over the `millscope` library.
//!
//! Every subcommand resolves a [`config::RunConfig`] (TOML file, then
//! environment, then flags), reads its inputs, renders CSV and JSON artifacts
//! in memory and commits them together with a `<stem>.manifest.json` that
//! records input checksums, parameters, seeds and artifact checksums.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data errors and 3 for
//! internal invariant violations.

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Session;
use crate::config::{Precision, RunConfig};
use crate::error::{CliError, CliResult};

/// Dispatches a subcommand generically over the output precision.
macro_rules! with_precision {
    ($precision:expr, $f:ident ( $($arg:expr),* )) => {
        match $precision {
            Precision::F64 => commands::$f::<f64>($($arg),*),
            Precision::F32 => commands::$f::<f32>($($arg),*),
        }
    };
}

/// Resolves the configuration for a parsed command line.
pub fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.apply(&mut cfg);
    cfg.validate()?;
    commands::required_inputs(&cfg, cli.command.name())?;
    Ok(cfg)
}

/// Runs a parsed command line and returns the paths written.
pub fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let precision = cfg.precision;
    let mut session = Session::new(cfg, cli.command.name());
    pool.install(|| {
        session.load_detector_params()?;
        let s = &mut session;
        let (stem, params) = match &cli.command {
            Command::Ingest { .. } => commands::ingest(s),
            Command::Shapes { .. } => with_precision!(precision, shapes(s)),
            Command::Detect { .. } => with_precision!(precision, detect(s)),
            Command::Trend { .. } => with_precision!(precision, trend(s)),
            Command::Nullmodel { .. } => with_precision!(precision, nullmodel(s)),
            Command::Validate { .. } => with_precision!(precision, validate(s)),
            Command::Reviews { .. } => with_precision!(precision, reviews(s)),
            Command::Report { kind, .. } => with_precision!(precision, report(s, *kind)),
            Command::Synth { .. } => commands::synth(s),
            Command::Evaluate { .. } => with_precision!(precision, evaluate_truth(s)),
        }?;
        let mut params = params;
        params["precision"] = serde_json::to_value(precision).expect("precision serialises");
        session.finish(&stem, params)
    })
}

/// Full entry point: parses `args`, runs, reports errors on stderr and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("millscope {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
