//! `bq`: optimal broadcasting fidelities, discord and broadcasting power
//! from the command line.

mod commands;
mod error;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::inputs::BUILTIN_HELP;

#[derive(Debug, Parser)]
#[command(
    name = "bq",
    version,
    about = "Optimal approximate broadcasting of quantum states and correlations"
)]
#[command(
    after_help = "Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 problem too large."
)]
pub struct Cli {
    /// Print the full run report as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity of two states by SDP, checked against the eigenvalue formula.
    #[command(after_help = BUILTIN_HELP)]
    Fidelity(FidelityArgs),
    /// Optimal unilocal n-broadcasting fidelity of a bipartite state.
    #[command(after_help = BUILTIN_HELP)]
    Broadcast(BroadcastArgs),
    /// Two-copy fidelity of cos t|00> + sin t|11> over a grid of angles.
    #[command(after_help = "\
CSV columns: theta,f2_sdp,f2_analytic,f2_via_Xi,f2_via_UQCM
  theta        (pi/4) i/k for i = 1..k
  f2_sdp       optimal fidelity from the SDP
  f2_analytic  closed-form optimum
  f2_via_Xi    fidelity reached by the fixed channel Xi
  f2_via_UQCM  fidelity reached by the universal cloner
Values have nine significant digits; lines end with LF.")]
    SweepTheta(SweepArgs),
    /// Optimal n-broadcasting fidelity of a finite ensemble.
    #[command(after_help = BUILTIN_HELP)]
    Ensemble(EnsembleArgs),
    /// Discord of a two-qubit state over projective measurements.
    #[command(after_help = BUILTIN_HELP)]
    Discord(DiscordArgs),
    /// Sampled worst-case broadcast fidelity of a fixed channel.
    Power(PowerArgs),
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    /// First state: file or built-in name.
    #[arg(long)]
    pub rho: String,
    /// Second state: file or built-in name.
    #[arg(long)]
    pub sigma: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Symmetric channels.
    Standard,
    /// Channels with output in the symmetric subspace.
    Piani,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Symmetry {
    /// Twirled objective and constraints.
    Projected,
    /// Explicit permutation-invariance constraints.
    Explicit,
}

#[derive(Debug, Args)]
pub struct BroadcastArgs {
    /// Bipartite state: file or built-in name. The channel acts on the first factor.
    #[arg(long)]
    pub rho: String,
    /// Number of recipients, 2 to 5.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Variant::Standard)]
    pub variant: Variant,
    #[arg(long, value_enum, default_value_t = Symmetry::Projected)]
    pub symmetry: Symmetry,
    /// Also build the explicit dual certificate (pure states only).
    #[arg(long)]
    pub dual: bool,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the optimal Choi matrix as JSON.
    #[arg(long, value_name = "PATH")]
    pub emit_choi: Option<PathBuf>,
    /// Write the realified standard SDP in plain-text block format.
    #[arg(long, value_name = "PATH")]
    pub dump_sdp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of recipients; the closed-form columns exist for 2 only.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Number of grid points k.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// CSV destination.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Ensemble JSON file: a list of {"p": ..., "matrix": {...}}.
    #[arg(long, value_name = "PATH")]
    pub ensemble: Option<String>,
    /// Member as <p>:<state>; repeat for each member.
    #[arg(long = "member", value_name = "P:STATE")]
    pub members: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Write the optimal Choi matrix as JSON.
    #[arg(long, value_name = "PATH")]
    pub emit_choi: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    /// Two-qubit state: file or built-in name.
    #[arg(long)]
    pub rho: String,
    /// Measure both qubits.
    #[arg(long)]
    pub two_sided: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// `uqcm`, `xi`, or a Choi matrix JSON file.
    #[arg(long)]
    pub channel: String,
    /// Input dimension of the universal cloner.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Number of random states.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Seed of the state sampler.
    #[arg(long)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let start = Instant::now();
    match commands::run(&cli.command) {
        Ok(results) => {
            let report = results.into_report(argv, start.elapsed().as_secs_f64());
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable report")
                );
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
