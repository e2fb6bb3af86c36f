//! Command-line runner for the cathaul verification suites.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for an
//! invalid configuration, 3 for a fixture that cannot be loaded or used.

use std::path::PathBuf;
use std::process::ExitCode;

use cathaul::report::CheckKind;
use cathaul_cli::{
    cmd_gauge, cmd_pushforward, cmd_transport, cmd_validate, load_fixture, write_report,
    ConfigError, RunConfig,
};
use clap::{Parser, Subcommand};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_FIXTURE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cathaul",
    version,
    about = "Numerical checks for categorical principal bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Fixture JSON file, or `builtin:<name>` for a compiled-in fixture.
    #[arg(long, global = true, default_value = "builtin:su2_testbed")]
    fixture: String,

    /// Grid size of the finest level.
    #[arg(long, global = true, default_value_t = 2000)]
    n_steps: usize,

    /// Number of refinement levels, each halving the grid size.
    #[arg(long, global = true, default_value_t = 3)]
    refine: usize,

    /// Overrides the tolerance of discretization-limited checks.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Directory receiving the JSON report and CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crossed-module and categorical-group axioms.
    Validate,
    /// Horizontal lifts, categorical connection batteries, shifted transport.
    Transport,
    /// Functor checks and pushforward well-definedness.
    Pushforward,
    /// Gauge axioms and the transformation law of the connection.
    Gauge,
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var("CATHAUL_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        ConfigError(format!(
            "CATHAUL_THREADS must be a positive integer, got '{value}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(e.to_string()))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("configuration error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let fixture = match load_fixture(&cli.fixture) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("fixture error: {e}");
            return ExitCode::from(EXIT_FIXTURE);
        }
    };
    let cfg = match RunConfig::new(fixture, cli.n_steps, cli.refine, cli.tol, cli.seed, cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!(
            "configuration error: cannot create {}: {e}",
            cfg.out.display()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    let result = match cli.command {
        Command::Validate => cmd_validate(&cfg),
        Command::Transport => cmd_transport(&cfg),
        Command::Pushforward => cmd_pushforward(&cfg),
        Command::Gauge => cmd_gauge(&cfg),
    };
    let report = match result {
        Ok(r) => r,
        Err(cathaul::Error::Io(e)) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("fixture error: {e}");
            return ExitCode::from(EXIT_FIXTURE);
        }
    };
    for e in &report.entries {
        match e.kind {
            CheckKind::Info => println!("info  {:<48} {:.3e}", e.id, e.residual),
            CheckKind::AtLeast => println!(
                "{}  {:<48} {:.3e}  (at least {:.1e})",
                verdict(e.pass),
                e.id,
                e.residual,
                e.tolerance
            ),
            CheckKind::Bound => println!(
                "{}  {:<48} {:.3e}  (tol {:.1e})",
                verdict(e.pass),
                e.id,
                e.residual,
                e.tolerance
            ),
        }
    }
    for s in &report.slopes {
        println!(
            "{}  slope {:<42} {:.3}  (expected {:.1} ± {:.1})",
            verdict(s.pass),
            s.id,
            s.slope,
            s.expected,
            s.tolerance
        );
    }
    match write_report(&cfg, &report) {
        Ok(path) => println!("report written to {}", path.display()),
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    eprintln!("wall time {:.2} s", report.wall_time.as_secs_f64());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
