use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use kd_coherence::measurement::Scheme;
use kd_coherence::optimizer::OptimizerConfig;
use serde::Serialize;

use crate::properties::Fault;

#[derive(Debug, Parser)]
#[command(
    name = "kdc",
    version,
    about = "Kirkwood-Dirac quasiprobabilities and KD coherence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Add optimizer diagnostics to the stderr summary.
    #[arg(long, global = true, conflicts_with = "quiet")]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// KD coherence of a state with respect to a basis or POVM.
    Coherence(CoherenceArgs),
    /// KD quasiprobability table of a state for two bases.
    KdTable(KdTableArgs),
    /// Reconstruct Im KD entries and estimate the coherence from simulated measurements.
    Simulate(SimulateArgs),
    /// Linear response function and its KD coherence bound.
    Response(ResponseArgs),
    /// Run the property suite on seeded random instances.
    CheckProperties(CheckArgs),
    /// Emit a seeded random density matrix.
    RandomState(RandomStateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptArgs {
    /// Optimizer restarts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Simplex iterations per restart.
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig::default()
            .with_restarts(self.restarts)
            .with_max_iters(self.max_iters)
            .with_seed(self.seed)
    }
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("reference").required(true).args(["basis", "computational", "povm"])))]
pub struct CoherenceArgs {
    /// State file or built-in name.
    #[arg(long)]
    pub state: String,
    /// Basis file or built-in name.
    #[arg(long)]
    pub basis: Option<String>,
    /// Use the computational basis of the state's dimension.
    #[arg(long)]
    pub computational: bool,
    /// POVM file; the coherence is maximized over the second basis.
    #[arg(long)]
    pub povm: Option<PathBuf>,
    /// Closed-form qubit value instead of the optimizer.
    #[arg(long, conflicts_with = "povm")]
    pub qubit_analytic: bool,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct KdTableArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub basis_a: String,
    #[arg(long)]
    pub basis_b: String,
    /// Report sum |Pr| - 1.
    #[arg(long)]
    pub nonclassicality: bool,
    /// Invert the table and report the largest entry error.
    #[arg(long)]
    pub reconstruct: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Johansen,
    Weak,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Johansen => Scheme::Johansen,
            SchemeArg::Weak => Scheme::Weak,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub state: String,
    /// Incoherent basis.
    #[arg(long)]
    pub basis_a: String,
    /// Second basis for the reconstructed table; without it only the estimate is reported.
    #[arg(long)]
    pub basis_b: Option<String>,
    /// Shots per estimated expectation value.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Spread of a single weak pointer reading.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Noise-free reconstruction.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ResponseArgs {
    /// Setup file with h0, a_obs, b_obs and state0.
    #[arg(long)]
    pub setup: PathBuf,
    /// Probe time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Perturbation time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tprime: f64,
    /// Random probes with B's spectrum to search for a larger |phi|.
    #[arg(long, default_value_t = 0)]
    pub probe_samples: usize,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub dims: Vec<usize>,
    /// Instances per dimension.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the full per-instance report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum FaultArg {
    FaultyDephasing,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::FaultyDephasing => Fault::FaultyDephasing,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("kind").required(true).args(["pure", "mixed"])))]
pub struct RandomStateArgs {
    #[arg(long)]
    pub dim: usize,
    /// Haar-random pure state.
    #[arg(long)]
    pub pure: bool,
    /// Random mixed state.
    #[arg(long)]
    pub mixed: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
