mod cache;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{load_target, CliError, Context};
use output::{Format, Manifest};
use thetaforge::wdvv::Mode;

/// Exact two-point relative invariants and theta potentials of toric log
/// Calabi-Yau pairs.
#[derive(Debug, Parser)]
#[command(name = "thetaforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Truncation order: maximal total degree of curve classes.
    #[arg(long, global = true, default_value_t = 6)]
    order: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cache directory (overrides THETAFORGE_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Allow a divisor D that is not anticanonical.
    #[arg(long, global = true)]
    experimental: bool,
    /// Evaluation of the quadratic WDVV sums.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Strict)]
    mode: ModeArg,
    /// Output file; stdout when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Formal,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Formal => Mode::Formal,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients of g(y).
    ComputeG { geometry: String },
    /// Forward and inverse mirror map.
    MirrorMap { geometry: String },
    /// Theta potential coefficients and N_{n,1}.
    Theta { geometry: String },
    /// Full N_{k,p} table from WDVV propagation.
    TwoPointTable { geometry: String },
    /// One-point invariants of the local bundle at beta + f.
    LocalInvariants { geometry: String },
    /// Run all consistency checks; exit 1 if any fails.
    Verify { geometry: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ComputeG { .. } => "compute-g",
            Command::MirrorMap { .. } => "mirror-map",
            Command::Theta { .. } => "theta",
            Command::TwoPointTable { .. } => "two-point-table",
            Command::LocalInvariants { .. } => "local-invariants",
            Command::Verify { .. } => "verify",
        }
    }

    fn geometry(&self) -> &str {
        match self {
            Command::ComputeG { geometry }
            | Command::MirrorMap { geometry }
            | Command::Theta { geometry }
            | Command::TwoPointTable { geometry }
            | Command::LocalInvariants { geometry }
            | Command::Verify { geometry } => geometry,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let (geometry, hash) = load_target(cli.command.geometry())?;
    for w in geometry.warnings() {
        eprintln!("warning: {w}");
    }
    if !geometry.is_log_cy() && !cli.experimental {
        return Err(CliError::Geometry(format!(
            "{}: D is not anticanonical; rerun with --experimental",
            geometry.name()
        )));
    }
    let mode: Mode = cli.mode.into();
    let mut ctx = Context {
        geometry: geometry.clone(),
        hash: hash.clone(),
        order: cli.order,
        cache: cache::Cache::locate(cli.cache_dir.clone()),
        stages: Vec::new(),
        cache_hits: Vec::new(),
    };
    let mut passed = true;
    let (table, uses_mode) = match &cli.command {
        Command::ComputeG { .. } => (ctx.compute_g()?, false),
        Command::MirrorMap { .. } => (ctx.mirror_map()?, false),
        Command::Theta { .. } => (ctx.theta_table()?, false),
        Command::TwoPointTable { .. } => (ctx.two_point_table(mode)?, true),
        Command::LocalInvariants { .. } => (ctx.local_invariants()?, false),
        Command::Verify { .. } => {
            let (t, ok) = ctx.verify(mode)?;
            passed = ok;
            (t, true)
        }
    };
    let manifest = Manifest {
        tool: "thetaforge",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        geometry: geometry.name().to_string(),
        geometry_sha256: hash,
        order: cli.order,
        mode: uses_mode.then(|| mode.to_string()),
        log_cy: geometry.is_log_cy(),
        experimental: cli.experimental,
        stages: ctx.stages.clone(),
        warnings: geometry.warnings().to_vec(),
    };
    let rendered = output::render(&manifest, &table, cli.format).map_err(CliError::Pipeline)?;
    output::emit(&rendered, &manifest, cli.output.as_deref(), &started_at, &ctx.cache_hits)
        .map_err(|e| CliError::Pipeline(format!("cannot write output: {e}")))?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
