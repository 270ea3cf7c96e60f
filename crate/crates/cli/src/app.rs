//! Command driver: config file in, table and manifest out, exit code back.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{Config, ConfigError};
use crate::manifest::{self, ManifestInput};
use crate::scenarios::{self, Outcome, RunError, ScenarioKind};
use crate::table::{emit_table, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config { path: PathBuf, error: ConfigError },
    /// A core routine rejected its input or failed to converge.
    Numeric { path: PathBuf, context: String, error: casimir_core::Error },
    Io { path: PathBuf, error: io::Error },
    Threads(String),
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use casimir_core::Error as E;
        match self {
            Self::Config { .. } | Self::Threads(_) => EXIT_CONFIG,
            Self::Numeric { error, .. } => match error {
                E::NonConvergence { .. } | E::NotPositiveDefinite { .. } | E::BesselRange { .. } | E::Singular(_) => {
                    EXIT_NONCONVERGENCE
                }
                _ => EXIT_CONFIG,
            },
            Self::Io { .. } | Self::ChecksFailed(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config { path, error } => write!(f, "{}: {}", path.display(), error),
            Self::Numeric { path, context, error } => write!(f, "{}: {}: {}", path.display(), context, error),
            Self::Io { path, error } => write!(f, "{}: {}", path.display(), error),
            Self::Threads(msg) => write!(f, "CASIMIR_THREADS: {}", msg),
            Self::ChecksFailed(n) => write!(f, "{} validation check(s) failed", n),
        }
    }
}

impl std::error::Error for CliError {}

/// Sizes the global worker pool from `CASIMIR_THREADS`, capped at the available cores.
pub fn configure_threads(value: Option<&str>) -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = match value {
        None => available,
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n.min(available),
            _ => return Err(CliError::Threads(format!("expected a positive integer, found `{}`", v))),
        },
    };
    // A second call in the same process finds the pool already built; that is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub output: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |error| CliError::Io { path: path.to_path_buf(), error }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

struct OutputSpec {
    path: PathBuf,
    format: Format,
}

fn read_output(config: &Config, base_dir: &Path) -> Result<OutputSpec, ConfigError> {
    let s = config.require_section("output")?;
    let rel = s.require_str("path")?;
    let format = match s.get_str("format") {
        Some(f) => Format::parse(f).ok_or_else(|| s.invalid("format", &format!("must be csv or json, found `{}`", f)))?,
        None if rel.ends_with(".json") => Format::Json,
        None => Format::Csv,
    };
    Ok(OutputSpec { path: base_dir.join(rel), format })
}

fn check_scenario_key(config: &Config, kind: ScenarioKind) -> Result<(), ConfigError> {
    let root = config.root();
    if let Some(name) = root.get_str("scenario") {
        if ScenarioKind::parse(name) != Some(kind) {
            return Err(root.invalid(
                "scenario",
                &format!("is `{}` but this command runs `{}`", name, kind.name()),
            ));
        }
    }
    Ok(())
}

fn write_outputs(
    kind: ScenarioKind,
    config_path: Option<&Path>,
    config_bytes: &[u8],
    base_dir: &Path,
    out: &OutputSpec,
    outcome: &Outcome,
) -> Result<Report, CliError> {
    write_file(&out.path, |w| emit_table(&outcome.table, out.format, w))?;
    for (rel, text) in &outcome.extra_files {
        write_file(&base_dir.join(rel), |w| w.write_all(text.as_bytes()))?;
    }
    let manifest_path = manifest::manifest_path(&out.path);
    let value = manifest::build(&ManifestInput {
        kind,
        config_path,
        config_bytes,
        output: &out.path,
        format: out.format,
        outcome,
    });
    write_file(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &value)?;
        w.write_all(b"\n")
    })?;
    Ok(Report { output: out.path.clone(), manifest: manifest_path, rows: outcome.table.rows.len() })
}

/// Runs the scenario described by the config file at `path`.
pub fn run_config(kind: ScenarioKind, path: &Path) -> Result<Report, CliError> {
    let config_err = |error| CliError::Config { path: path.to_path_buf(), error };
    let bytes = fs::read(path)
        .map_err(|e| config_err(ConfigError::global(format!("cannot read config: {}", e))))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| config_err(ConfigError::global("config is not valid UTF-8")))?;
    let base_dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let config = Config::parse(&text).map_err(config_err)?;
    check_scenario_key(&config, kind).map_err(config_err)?;
    let out = read_output(&config, &base_dir).map_err(config_err)?;
    let outcome = scenarios::run(kind, &config, &base_dir).map_err(|e| match e {
        RunError::Config(error) => config_err(error),
        RunError::Numeric { context, error } => CliError::Numeric { path: path.to_path_buf(), context, error },
    })?;
    write_outputs(kind, Some(path), &bytes, &base_dir, &out, &outcome)
}

/// Runs the self-check suite, printing its table as CSV to `stdout`
/// and optionally writing it with a manifest to `output`.
pub fn run_validate(output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let empty = Config::parse("").expect("empty config parses");
    let outcome = scenarios::run(ScenarioKind::Validate, &empty, Path::new("")).map_err(|e| match e {
        RunError::Config(error) => CliError::Config { path: PathBuf::new(), error },
        RunError::Numeric { context, error } => CliError::Numeric { path: PathBuf::new(), context, error },
    })?;
    emit_table(&outcome.table, Format::Csv, &mut *stdout).map_err(io_err(Path::new("<stdout>")))?;
    if let Some(path) = output {
        let format = if path.extension().is_some_and(|e| e == "json") { Format::Json } else { Format::Csv };
        let out = OutputSpec { path: path.to_path_buf(), format };
        write_outputs(ScenarioKind::Validate, None, b"", Path::new(""), &out, &outcome)?;
    }
    if outcome.passed {
        Ok(())
    } else {
        let failed = outcome.error_estimates.get("checks_failed").and_then(|v| v.as_u64()).unwrap_or(0);
        Err(CliError::ChecksFailed(failed as usize))
    }
}
