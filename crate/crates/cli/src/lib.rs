//! Command line front end for `graphlap-core`: file formats, experiment
//! configs, the named analyses and `report.json`.

pub mod analyses;
pub mod config;
pub mod error;
pub mod examples;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use crate::analyses::{load_inputs, run_analysis};
use crate::config::{raw_echo, Analysis, Args, ExperimentConfig, DEFAULT_OUT};
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_VALIDATION};
use crate::examples::{emit_example, BUNDLE_FILE, GRAPH_FILE, METRIC_FILE};
use crate::report::Report;

pub const REPORT_FILE: &str = "report.json";
pub const THREADS_ENV: &str = "GRAPHLAP_THREADS";

fn execute(config: &ExperimentConfig, report: &mut Report) -> CliResult<()> {
    let out = &config.out;
    if config.analysis == Analysis::Example {
        let name = config.params.get("name").unwrap_or_default();
        emit_example(name, &config.params, out, report)?;
        let Some(then) = config.then else { return Ok(()) };
        let existing = |f: &str| Some(out.join(f)).filter(|p| p.is_file());
        let inputs = load_inputs(
            Some(&out.join(GRAPH_FILE)),
            existing(BUNDLE_FILE).as_deref(),
            existing(METRIC_FILE).as_deref(),
            config.boundary.as_deref(),
            report,
        )?;
        return run_analysis(then, &inputs, &config.params, config.seed, report);
    }
    let inputs = load_inputs(
        config.graph.as_deref(),
        config.bundle.as_deref(),
        config.metric.as_deref(),
        config.boundary.as_deref(),
        report,
    )?;
    run_analysis(config.analysis, &inputs, &config.params, config.seed, report)
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}=`{v}` is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn assemble_report(
    echo: Value,
    report: &Report,
    outcome: &CliResult<()>,
    written: &[String],
    started: Instant,
) -> Value {
    let (status, exit_code, error) = match outcome {
        Ok(()) => ("ok", EXIT_OK, Value::Null),
        Err(e) => (
            "error",
            e.exit_code(),
            json!({ "code": e.code(), "message": e.to_string() }),
        ),
    };
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "toolkit": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": echo,
        "inputs": report.inputs,
        "residuals": report.residuals,
        "spectrum": report.spectrum,
        "verdicts": report.verdicts,
        "results": report.results,
        "warnings": report.warnings,
        "tables": written,
        "files": report.files,
        "status": status,
        "exit_code": exit_code,
        "error": error,
        "timestamp": { "unix_seconds": unix, "elapsed_ms": started.elapsed().as_millis() as u64 },
    })
}

/// Runs one invocation and returns the process exit code. `report.json` is
/// written whenever the output directory can be created.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let started = Instant::now();
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    let mut report = Report::default();
    let resolved = ExperimentConfig::resolve(&args);
    let (echo, out) = match &resolved {
        Ok(c) => (c.echo(), c.out.clone()),
        Err(_) => (
            raw_echo(&args),
            args.out.clone().unwrap_or_else(|| DEFAULT_OUT.into()),
        ),
    };

    let outcome = resolved.and_then(|config| {
        fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
        let pool = thread_pool()?;
        pool.install(|| execute(&config, &mut report))
    });

    finish(&out, echo, &report, outcome, started)
}

fn finish(out: &Path, echo: Value, report: &Report, outcome: CliResult<()>, started: Instant) -> i32 {
    let mut written = Vec::new();
    let mut outcome = outcome;
    if fs::create_dir_all(out).is_ok() {
        for table in &report.tables {
            match table.write(out) {
                Ok(()) => written.push(table.name.clone()),
                Err(e) if outcome.is_ok() => outcome = Err(e),
                Err(_) => {}
            }
        }
        let value = assemble_report(echo, report, &outcome, &written, started);
        if let Err(e) = io::write_json(&out.join(REPORT_FILE), &value) {
            eprintln!("graphlap: {e}");
            if outcome.is_ok() {
                outcome = Err(e);
            }
        }
    } else {
        eprintln!("graphlap: cannot create output directory {}", out.display());
    }
    for w in &report.warnings {
        eprintln!("graphlap: warning: {w}");
    }
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("graphlap: {} ({})", e, e.code());
            e.exit_code()
        }
    }
}
