//! Batch frontend for `qsr-core`: reads state files, dispatches to the core
//! library and renders the results. No numerics live here.

pub mod commands;
pub mod error;
pub mod output;
pub mod state_io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsr_core::rates::RateUnit;

pub use commands::Output;
pub use error::{CliError, CliResult, ExitStatus};
pub use output::Format;

/// Options shared by every command.
#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Seed for every random state or channel the command draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Unit of qubit-rate columns.
    #[arg(long, global = true, value_enum, default_value_t = Units::Qubits)]
    pub units: Units,
    /// Cap on complex amplitudes (or matrix entries) held by one computation.
    #[arg(long, global = true, default_value_t = qsr_core::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Print infinite divergences instead of failing.
    #[arg(long, global = true)]
    pub allow_inf: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Qubits,
    Cobits,
}

impl From<Units> for RateUnit {
    fn from(u: Units) -> Self {
        match u {
            Units::Qubits => RateUnit::Qubits,
            Units::Cobits => RateUnit::Cobits,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qsr",
    version,
    about = "Quantum state redistribution under local coherence constraints"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one information quantity on state files.
    Quantity(QuantityArgs),
    /// Rate report of a pure state on registers R, A, B, C.
    Rates(RatesArgs),
    /// Run a protocol simulation and print its transcript.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Parameter sweep emitting one row per value.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Quick end-to-end checks of the core library.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityName {
    /// von Neumann entropy S(ρ).
    Entropy,
    /// Relative entropy of coherence S(Δ(ρ)) − S(ρ).
    Rc,
    /// I(A:B) with --parts A,B.
    Mi,
    /// S(A|B) with --parts A,B.
    Cond,
    /// I(A:B|C) with --parts A,B,C.
    Cmi,
    /// D(ρ‖σ) of two files.
    D,
    /// D_max(ρ‖σ) of two files.
    Dmax,
    /// D_H^ε(ρ‖σ) of two files, with --eps.
    Dh,
    /// Fidelity F(ρ, σ) of two files.
    Fidelity,
    /// Purified distance of two files.
    Pd,
}

#[derive(Args, Debug)]
pub struct QuantityArgs {
    #[arg(value_enum)]
    pub name: QuantityName,
    /// One state file, or two for divergences and distances.
    #[arg(required = true, num_args = 1..=2)]
    pub files: Vec<PathBuf>,
    /// Comma-separated parts; `+` joins labels within a part (`R+A,C`).
    #[arg(long)]
    pub parts: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    /// Pure-state file; a seeded Haar-random 4-qubit state when omitted.
    pub file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SimulateCommand {
    /// Create coherent qubits from q sent qubits and e singlets.
    CoherenceCreation {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        e: usize,
        /// Embed Bob's reduced state at each of his steps.
        #[arg(long)]
        snapshots: bool,
    },
    /// Convex split at n = ⌈2^k/δ⌉ copies.
    ConvexSplit(ConvexSplitArgs),
    /// One-shot redistribution of C from Alice to Bob.
    Qsr(QsrArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ConvexSplitArgs {
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Smoothing parameter of the bound.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// ρ_PQ; a seeded random two-qubit state on P, Q when omitted.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// σ_Q; its labels define Q. Seeded ½·I/2 + ½·(random qubit state) when omitted.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct QsrArgs {
    /// Pure state on R, A, B, C; a seeded Haar-random 4-qubit state when omitted.
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub eps1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Diagonal σ_C file; Δ(ρ_C) when omitted.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    #[arg(long)]
    pub n_override: Option<usize>,
    #[arg(long)]
    pub b_override: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum SweepCommand {
    /// Per-copy rate report of ψ^{⊗n} over n.
    Copies {
        /// Pure-state file; a seeded Haar-random 4-qubit state when omitted.
        file: Option<PathBuf>,
        /// Copy counts: `1..2` (inclusive) or `1,2`.
        #[arg(long, default_value = "1..2")]
        values: String,
    },
    /// Convex split fidelity over δ.
    Delta {
        #[command(flatten)]
        split: ConvexSplitArgs,
        #[arg(long, default_value = "0.5,0.25,0.125")]
        values: String,
    },
    /// (1/n)·D_H^ε(ρ^{⊗n}‖σ^{⊗n}) against its two-term expansion over n.
    Hypothesis {
        /// ρ; diag(0.9, 0.1) when omitted.
        #[arg(long)]
        rho: Option<PathBuf>,
        /// σ; I/2 when omitted.
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value = "1..12")]
        values: String,
    },
    /// Redistribution over the decoder block length b.
    Block {
        #[command(flatten)]
        qsr: QsrArgs,
        #[arg(long, default_value = "1..4")]
        values: String,
    },
}

/// Runs a parsed command and returns the rendered output.
pub fn run(cli: &Cli) -> CliResult<Output> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Quantity(args) => commands::quantity(cfg, args).map(Output::from),
        Command::Rates(args) => commands::rates(cfg, args).map(Output::from),
        Command::Simulate(sim) => commands::simulate(cfg, sim).map(Output::from),
        Command::Sweep(sweep) => commands::sweep(cfg, sweep).map(Output::from),
        Command::Selftest => commands::selftest(cfg),
    }
}
