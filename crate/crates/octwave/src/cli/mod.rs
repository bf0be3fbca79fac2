//! Command line front end: `kernels`, `verify`, `solve`, `scale` and `report`.
//!
//! Exit codes: 0 success, 1 a suite or solve failed, 2 bad configuration or
//! usage, 3 data outside the smallness budget. Data and summaries go to
//! stdout, diagnostics to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;

mod commands;
pub mod config;
mod report;

pub use config::{RunConfig, ENV_PREFIX};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SMALLNESS: i32 = 3;

/// Version of the JSON layouts written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "octwave", version, about = "Damped evolution equations with octant Fourier data: kernels, solver and estimate suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration; defaults are used for anything it omits.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random draw (overrides the config and OCTWAVE_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config and OCTWAVE_OUT).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel values and pointwise bound ratios as CSV.
    Kernels {
        #[command(flatten)]
        common: Common,
        /// Keep only one damping regime: effective, scale_invariant or non_effective.
        #[arg(long)]
        regime: Option<String>,
    },
    /// Run verification suites and write one JSON report per suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Solve the small-data problem for the configured data.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Scaling parameter of the solved problem.
        #[arg(long)]
        lambda: Option<u32>,
        /// Route the data through the large-data scaling pipeline first.
        #[arg(long)]
        scale: bool,
    },
    /// Large-data pipeline: select λ, scale, solve and descale.
    Scale {
        #[command(flatten)]
        common: Common,
        /// Use this λ instead of the selected one.
        #[arg(long)]
        lambda: Option<u32>,
    },
    /// Aggregate persisted reports into a summary table and plot data.
    Report {
        /// Directory holding earlier outputs.
        dir: PathBuf,
        /// Where to write the summary and plot files (default: DIR/report).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kernels { .. } => "kernels",
            Command::Verify { .. } => "verify",
            Command::Solve { .. } => "solve",
            Command::Scale { .. } => "scale",
            Command::Report { .. } => "report",
        }
    }
}

/// Run-level failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::Inapplicable(_) | Error::Unsupported(_) => EXIT_USAGE,
            Error::Smallness { .. } => EXIT_SMALLNESS,
            _ => EXIT_FAIL,
        };
        let message = match &e {
            Error::Smallness { b_norm, nu } => format!(
                "{e}\nthe linear part needs B-norm <= nu/2 = {:.6e} (measured {b_norm:.6e}); shrink the data or run the scaling pipeline (`solve --scale` or `scale`)",
                0.5 * nu
            ),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        // A closed stdout (`octwave ... | head`) ends the run quietly.
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::new(EXIT_OK, "");
        }
        Failure::new(EXIT_FAIL, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Settings shared by the run commands after flags, environment and file are merged.
pub struct Session {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub command: &'static str,
    pub flags: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    command: &'a str,
    seed: u64,
    config_sha256: String,
    flags: &'a BTreeMap<String, String>,
    versions: BTreeMap<&'static str, String>,
    config: &'a RunConfig,
}

impl Session {
    fn open(common: &Common, command: &'static str, flags: BTreeMap<String, String>, env: &BTreeMap<String, String>) -> CliResult<Self> {
        let mut config = RunConfig::load(common.config.as_deref(), env)?;
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        let out = common
            .out
            .clone()
            .or_else(|| env.get("OCTWAVE_OUT").map(PathBuf::from))
            .unwrap_or_else(|| config.io.out.clone());
        let session = Session { seed: config.seed, config, out, command, flags };
        session.write_manifest()?;
        Ok(session)
    }

    fn write_manifest(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot create output directory {}: {e}", self.out.display())))?;
        let manifest = Manifest {
            tool: "octwave",
            command: self.command,
            seed: self.seed,
            config_sha256: self.config.hash(),
            flags: &self.flags,
            versions: versions(),
            config: &self.config,
        };
        write_json(&self.out.join("manifest.json"), &manifest)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.config.io.formats.iter().any(|f| f == format)
    }
}

pub(crate) fn versions() -> BTreeMap<&'static str, String> {
    BTreeMap::from([
        ("octwave", env!("CARGO_PKG_VERSION").to_string()),
        ("schema", SCHEMA_VERSION.to_string()),
    ])
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_FAIL, format!("cannot write {}: {e}", path.display())))
}

/// Two-column whitespace-separated plot data with a `#` header.
pub(crate) fn write_columns(path: &Path, header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> CliResult<()> {
    let mut text = format!("# {} {}\n", header.0, header.1);
    for (x, y) in rows {
        text.push_str(&format!("{x:.17e} {y:.17e}\n"));
    }
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_FAIL, format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let env = config::process_env();
    match dispatch(cli.command, &env, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(stderr, "error: {}", f.message);
            }
            f.code
        }
    }
}

fn dispatch(command: Command, env: &BTreeMap<String, String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let name = command.name();
    match command {
        Command::Kernels { common, regime } => {
            let flags = flag_map([("regime", regime.clone())]);
            let session = Session::open(&common, name, flags, env)?;
            commands::kernels(&session, regime.as_deref(), stdout)
        }
        Command::Verify { common, suite } => {
            let suites = crate::verify::resolve_suites(&suite)?;
            let flags = flag_map([("suite", Some(suite))]);
            let session = Session::open(&common, name, flags, env)?;
            commands::verify(&session, &suites, stdout, stderr)
        }
        Command::Solve { common, lambda, scale } => {
            let flags = flag_map([("lambda", lambda.map(|l| l.to_string())), ("scale", scale.then(|| "true".to_string()))]);
            let session = Session::open(&common, name, flags, env)?;
            if scale {
                commands::scale(&session, lambda, stdout, stderr)
            } else {
                commands::solve(&session, lambda, stdout, stderr)
            }
        }
        Command::Scale { common, lambda } => {
            let flags = flag_map([("lambda", lambda.map(|l| l.to_string()))]);
            let session = Session::open(&common, name, flags, env)?;
            commands::scale(&session, lambda, stdout, stderr)
        }
        Command::Report { dir, out } => report::report(&dir, out.as_deref(), stdout, stderr),
    }
}

fn flag_map<const N: usize>(pairs: [(&str, Option<String>); N]) -> BTreeMap<String, String> {
    pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect()
}
