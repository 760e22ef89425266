use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

mod commands;
mod manifest;
mod plot;

/// Ensemble control synthesis and simulation for iẊ = ω(uσx + vσy)X.
#[derive(Parser)]
#[command(name = "ensemble-su2", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a control schedule for a target profile
    Synthesize(SynthesizeArgs),
    /// Propagate an ensemble under a schedule and write the trajectories
    Simulate(SimulateArgs),
    /// Max-over-ω errors over a grid of (eps1, N)
    Sweep(SweepArgs),
    /// Numerical certificates for the kernel and auxiliary-system statements
    VerifyLemmas(VerifyArgs),
    /// Three back-to-back schedules for exp(−iασx) exp(−iβσy) exp(−iγσx)
    Euler(EulerArgs),
    /// Re-run the command recorded in a manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SynthesizeArgs {
    /// Profile JSON: {"bump": {a,b,c,d}, "amplitude": "<expr in w>"}
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long = "N")]
    pub n: u32,
    /// Target rotation axis, x or y
    #[arg(long, default_value = "y")]
    pub axis: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct OmegaArgs {
    /// Comma-separated ω values
    #[arg(long, value_delimiter = ',', conflicts_with = "omega_grid")]
    pub omega: Option<Vec<f64>>,
    /// Evenly spaced grid lo:hi:count, endpoints included
    #[arg(long)]
    pub omega_grid: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub schedule: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub omegas: OmegaArgs,
    /// Maximum step; defaults to min(0.01, 1/(100 v1), shortest segment/4)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Record every n-th step
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an SVG with P, P_ref vs t and final infidelity vs ω
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps1: Vec<f64>,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    #[arg(long, default_value = "y")]
    pub axis: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub omegas: OmegaArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Subset of checks to run, 1-5; all by default
    #[arg(long, value_delimiter = ',')]
    pub lemma: Option<Vec<u32>>,
    /// ε2 values for the scaling check (4)
    #[arg(long, value_delimiter = ',')]
    pub eps2: Option<Vec<f64>>,
    /// ε1 for the scaling check (4)
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Integrator step for checks 4 and 5
    #[arg(long)]
    pub dt: Option<f64>,
    /// Use a deliberately under-resolved quadrature rule
    #[arg(long)]
    pub coarse: bool,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EulerArgs {
    /// Shared bump a,b,c,d
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.5,1,1.1")]
    pub bump: Vec<f64>,
    #[arg(long, default_value = "0")]
    pub alpha: String,
    #[arg(long, default_value = "0")]
    pub beta: String,
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long = "N")]
    pub n: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub omegas: OmegaArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            msg: msg.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Self {
            code: 3,
            msg: msg.into(),
        }
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Self {
            code: 4,
            msg: msg.into(),
        }
    }
}

impl From<ensemble_su2::Error> for Failure {
    fn from(e: ensemble_su2::Error) -> Self {
        use ensemble_su2::Error as E;
        match e {
            E::NonFiniteGenerator(..) | E::ProfileSingular(_) => Failure::numerical(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<usize, Failure> {
    let n = match std::env::var("ENSEMBLE_SU2_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::usage(format!("ENSEMBLE_SU2_THREADS: not a count: {s:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    Ok(rayon::current_num_threads())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|threads| commands::run(cli.command, threads));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
