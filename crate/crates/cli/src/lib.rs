//! Front end for the `metricpoly` binary: experiment verbs, config files and
//! artifact emission.

pub mod config;
pub mod error;
mod verbs;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::Value;

pub use config::{Args, ExperimentConfig, Format, Params, Verb};
pub use error::{CliError, CliResult, ErrorKind, EXIT_CHECK_FAILED, EXIT_OK};

pub const SCHEMA_VERSION: u32 = 1;

/// Result of one verb: the JSON artifact, an optional CSV rendering and a
/// one-line summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    /// Extra JSON written next to a CSV artifact as `<out>.json`.
    pub sidecar: Option<Value>,
    pub summary: String,
    /// `false` only for a `verify` suite with a failed check.
    pub passed: bool,
}

impl Report {
    pub(crate) fn json(json: Value, summary: String) -> Self {
        Report {
            json: versioned(json),
            csv: None,
            sidecar: None,
            summary,
            passed: true,
        }
    }

    /// The text written for `format`.
    pub fn render(&self, format: Format) -> String {
        match (format, &self.csv) {
            (Format::Csv, Some(csv)) => csv.clone(),
            _ => pretty(&self.json),
        }
    }
}

pub(crate) fn versioned(mut json: Value) -> Value {
    if let Value::Object(map) = &mut json {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    json
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Validates `cfg` and runs its verb, on a pool of `cfg.workers` threads when
/// given. No files are touched.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Report> {
    match cfg.workers {
        Some(0) => Err(CliError::validation("--workers must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::io(format!("cannot start worker pool: {e}")))?
            .install(|| verbs::run(cfg)),
        None => verbs::run(cfg),
    }
}

/// Writes the artifact(s) of `report` to `cfg.output_path`.
pub fn write_artifacts(cfg: &ExperimentConfig, report: &Report) -> CliResult<()> {
    let Some(path) = &cfg.output_path else {
        return Ok(());
    };
    let format = cfg.output_format();
    write_file(path, &report.render(format))?;
    if let (Format::Csv, Some(side)) = (format, &report.sidecar) {
        write_file(&sidecar_path(path), &pretty(side))?;
    }
    Ok(())
}

/// `<out>.json`, next to a CSV artifact.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args`, runs the verb and emits its output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            return fail(&CliError::validation(e.to_string().trim_end()));
        }
    };
    let outcome = ExperimentConfig::from_args(args).and_then(|cfg| {
        let report = run(&cfg)?;
        write_artifacts(&cfg, &report)?;
        Ok((cfg, report))
    });
    match outcome {
        Ok((cfg, report)) => {
            if cfg.output_path.is_some() {
                println!("{}", report.summary);
            } else {
                let mut out = std::io::stdout().lock();
                let _ = out.write_all(report.render(cfg.output_format()).as_bytes());
                eprintln!("{}", report.summary);
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> i32 {
    eprintln!("{}", serde_json::to_string(&e.to_json()).expect("JSON values always serialize"));
    e.exit_code()
}
