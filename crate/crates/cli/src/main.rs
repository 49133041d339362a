mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};
use report::{InputDigest, Residual, RunReport, Verdict};

/// Exact fractional clique decompositions: construct, compose and verify.
#[derive(Parser, Debug)]
#[command(name = "fracdecomp", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Artifact destination (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run report destination (default stderr).
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    W,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Main,
    Weakened,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a weighting against a graph exactly.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Lines "u v p/q"; unlisted edges target 1.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Decompose K_k minus a matching.
    DecomposeKminusm {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        /// "u-v,u-v,..."
        #[arg(long, default_value = "")]
        matching: String,
        /// Emit per-type weights instead of every clique.
        #[arg(long)]
        compressed: bool,
    },
    /// Decompose a graph whose complement is split into matchings.
    DecomposeSparse {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Exact edge-class marginals of the W or M family.
    FamilyMarginals {
        #[arg(long, value_enum)]
        kind: FamilyArg,
        #[arg(long)]
        r: usize,
        #[arg(long, required_if_eq("kind", "w"))]
        k: Option<usize>,
        #[arg(long, required_if_eq("kind", "m"))]
        ell: Option<usize>,
        /// Number of chosen groups; gives the unadjusted family at any size.
        #[arg(long)]
        chosen: Option<usize>,
        /// Also enumerate the support and compare every edge.
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u128,
    },
    /// Shape K_{2r+2} weights to hit an edge target.
    Correct {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        targets: PathBuf,
    },
    /// Lift slab (2r+2)-clique weights to an exact K_r decomposition.
    Lift {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Run the staged sampler.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit scaled edge-marginal estimates instead of the samples.
        #[arg(long)]
        marginals: bool,
    },
    /// Exact LP feasibility with a weighting or a Farkas certificate.
    LpCheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = fracdecomp::lp::DEFAULT_MAX_VARIABLES)]
        max_variables: usize,
    },
    /// Full pipeline.
    Decompose {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Integer factor, "auto" or "none".
        #[arg(long, default_value = "auto")]
        blow_up: String,
        /// Refuse hosts below the degree bound.
        #[arg(long)]
        enforce_gate: bool,
        #[arg(long, value_enum, default_value = "main")]
        bound: BoundArg,
        #[arg(long, default_value_t = 64)]
        max_vertices: usize,
        #[arg(long, default_value_t = fracdecomp::lp::DEFAULT_MAX_VARIABLES)]
        max_variables: usize,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pattern_r: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::DecomposeKminusm { .. } => "decompose-kminusm",
            Command::DecomposeSparse { .. } => "decompose-sparse",
            Command::FamilyMarginals { .. } => "family-marginals",
            Command::Correct { .. } => "correct",
            Command::Lift { .. } => "lift",
            Command::Sample { .. } => "sample",
            Command::LpCheck { .. } => "lp-check",
            Command::Decompose { .. } => "decompose",
        }
    }
}

fn emit(global: &Global, artifact: Option<&str>, report: &RunReport) -> std::io::Result<()> {
    if let Some(text) = artifact {
        match &global.out {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
    }
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    match &global.report {
        Some(p) => std::fs::write(p, json),
        None => std::io::stderr().write_all(json.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: cannot start a pool of {n} threads");
            return ExitCode::from(2);
        }
    }
    let name = cli.command.name();
    let mut digest = InputDigest::new();
    digest.add("command", format!("{:?}", cli.command).as_bytes());
    let start = Instant::now();
    let result = commands::run(&cli.command, &mut digest);
    let elapsed = start.elapsed();
    let (outcome, usage) = match result {
        Ok(o) => (o, false),
        Err(e) => {
            let (verdict, usage) = e.classify();
            (
                Outcome {
                    verdict,
                    artifact: None,
                    residuals: vec![Residual::message(e.to_string())],
                    details: serde_json::json!({ "error": e.to_string() }),
                    seed: None,
                },
                usage,
            )
        }
    };
    let code = outcome.verdict.exit_code(usage);
    let report = RunReport::new(name, &digest, outcome.verdict, outcome.residuals, elapsed, outcome.seed, outcome.details);
    if let Err(e) = emit(&cli.global, outcome.artifact.as_deref(), &report) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(3);
    }
    if report.verdict == Verdict::Error {
        eprintln!("error: {}", report.residuals[0].message);
    }
    ExitCode::from(code as u8)
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}
