//! Batch experiment harness over the path-space numerics library.
//!
//! Each subcommand drives one module pipeline, records the residuals it
//! observed together with the tolerances in force, and writes a JSON or CSV
//! report.  Exit code 0 means every assertion passed, 1 means an invariant
//! was violated (the report says which), 2 means bad input.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "pathspace",
    about = "Experiments on discretized path spaces, additive forms and their product structures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Grid step h (times snap to multiples of h)
    #[arg(long, global = true)]
    grid_step: Option<f64>,

    /// Number of grid cells (horizon = grid_max * h)
    #[arg(long, global = true)]
    grid_max: Option<usize>,

    /// Main time parameter of the experiment
    #[arg(long, global = true)]
    t: Option<f64>,

    /// One-particle dimension
    #[arg(long, global = true)]
    dim: Option<usize>,

    /// RNG seed; fixes all randomness in the run
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override for the residual checks
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Report format: json or csv
    #[arg(long, global = true)]
    format: Option<String>,

    /// Report output path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of refinement levels
    #[arg(long, global = true)]
    levels: Option<usize>,

    /// Number of random samples
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// JSON config file mirroring these flags; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition-logarithm convergence table for the unit-path pair
    ConvergeLog,
    /// Synthesized 1-cocycle recovery; --demo ramp runs the full
    /// trivialization worked example
    Cocycle {
        /// Named demo pipeline (ramp)
        #[arg(long)]
        demo: Option<String>,
    },
    /// 2-cocycle table of a coherent section and its trivialization
    Gamma {
        /// Section to use: ramp, constant or random
        #[arg(long, default_value = "ramp")]
        section: String,
    },
    /// Unit-modulus multiplier trivialization
    Multiplier,
    /// Conditional positive definiteness of the built-in kernels
    Cpd,
    /// Positive definiteness of the rooted kernels e^{g/n}
    PdRoot,
    /// Strong-spanning witnesses on sample sets
    Span {
        /// Run the diagonal counterexample set
        #[arg(long)]
        counterexample: bool,
    },
    /// Isometry and multiplicativity of the standard isomorphism
    Iso,
    /// Norm monotonicity and the two-time inequality
    Ineq,
    /// Modulus curves of unit sections with refinement study
    Modulus,
    /// Obstacle-potential concatenation with step-halving fidelity
    DemoObstacle,
}

/// The config-file mirror of the global flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    grid_step: Option<f64>,
    grid_max: Option<usize>,
    t: Option<f64>,
    dim: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    format: Option<String>,
    out: Option<PathBuf>,
    levels: Option<usize>,
    samples: Option<usize>,
}

/// Fully resolved options: builtin defaults, overridden by the config file,
/// overridden by flags.
pub struct Opts {
    pub grid_step: Option<f64>,
    pub grid_max: Option<usize>,
    pub t: f64,
    pub dim: usize,
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub levels: usize,
    pub samples: Option<usize>,
}

fn resolve(cli: &Cli) -> Result<Opts, String> {
    let file = match &cli.config {
        None => ConfigFile::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))?
        }
    };
    let format = cli
        .format
        .clone()
        .or(file.format)
        .map(|s| s.parse::<Format>())
        .transpose()?
        .unwrap_or(Format::Json);
    Ok(Opts {
        grid_step: cli.grid_step.or(file.grid_step),
        grid_max: cli.grid_max.or(file.grid_max),
        t: cli.t.or(file.t).unwrap_or(1.0),
        dim: cli.dim.or(file.dim).unwrap_or(1),
        seed: cli.seed.or(file.seed).unwrap_or(42),
        tol: cli.tol.or(file.tol).unwrap_or(1e-10),
        format,
        out: cli.out.clone().or(file.out),
        levels: cli.levels.or(file.levels).unwrap_or(10),
        samples: cli.samples.or(file.samples),
    })
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PATHSPACE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let opts = match resolve(&cli) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::ConvergeLog => commands::converge_log(&opts),
        Command::Cocycle { demo } => commands::cocycle(&opts, demo.as_deref()),
        Command::Gamma { section } => commands::gamma(&opts, section),
        Command::Multiplier => commands::multiplier(&opts),
        Command::Cpd => commands::cpd(&opts),
        Command::PdRoot => commands::pd_root(&opts),
        Command::Span { counterexample } => commands::span(&opts, *counterexample),
        Command::Iso => commands::iso(&opts),
        Command::Ineq => commands::ineq(&opts),
        Command::Modulus => commands::modulus(&opts),
        Command::DemoObstacle => commands::demo_obstacle(&opts),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(commands::CmdError::BadInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CmdError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
