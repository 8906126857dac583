use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tsr_core::cipher::CipherKind;

#[derive(Debug, Parser)]
#[command(name = "tsr", version, about = "Time-success-ratio analysis of leakage-resilient stream ciphers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Root seed; every component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel experiments (default 1). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Derived security level of a reduction.
    Security(SecurityArgs),
    /// The comparison table of published bounds.
    Table(TableArgs),
    /// Generate (or verify) a keystream trace with leakage.
    Keystream(KeystreamArgs),
    /// Run the leakage-resilience game.
    LrGame(LrGameArgs),
    /// Build an auxiliary-input simulator, or sweep its cost.
    Simulate(SimulateArgs),
    /// Re-run an artifact from its embedded manifest and compare.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Security(_) => "security",
            Command::Table(_) => "table",
            Command::Keystream(_) => "keystream",
            Command::LrGame(_) => "lr-game",
            Command::Simulate(_) => "simulate",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SecurityArgs {
    /// JSON file with the reduction constants {A, B, C, a, b, c}.
    #[arg(long)]
    pub params: PathBuf,
    /// Base security level in bits.
    #[arg(long)]
    pub k: f64,
    /// Also solve the numerical program.
    #[arg(long)]
    pub oracle: bool,
    /// Oracle grid step in bits of log₂ ε.
    #[arg(long, default_value_t = 0.01)]
    pub step_bits: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TableArgs {
    /// Key length; integer or fraction such as 481/2.
    #[arg(long, default_value = "256")]
    pub k: String,
    #[arg(long, default_value = "0")]
    pub lambda: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CipherArg {
    Ec09,
    Css10,
    Ctrsa13,
}

impl From<CipherArg> for CipherKind {
    fn from(c: CipherArg) -> Self {
        match c {
            CipherArg::Ec09 => CipherKind::Ec09,
            CipherArg::Css10 => CipherKind::Css10,
            CipherArg::Ctrsa13 => CipherKind::Ctrsa13,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KeystreamArgs {
    #[arg(long, value_enum)]
    pub cipher: CipherArg,
    /// JSON file with widths, wPRF choice and initial state.
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub rounds: usize,
    /// JSON leakage plan; no leakage when absent.
    #[arg(long)]
    pub leak_plan: Option<PathBuf>,
    /// Leakage budget; defaults to the plan's first function's width.
    #[arg(long)]
    pub lambda: Option<usize>,
    /// Re-derive the trace and compare it with this file.
    #[arg(long)]
    pub verify: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LrGameArgs {
    /// JSON game configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Skip the exact optimal-adversary computation.
    #[arg(long)]
    pub no_bayes: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Joint distribution (JSON, or CSV when the name ends in .csv).
    #[arg(long, requires = "family")]
    pub dist: Option<PathBuf>,
    /// Distinguisher family (JSON array, or CSV).
    #[arg(long, requires = "dist")]
    pub family: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Sweep (λ, eps) over generated benchmark instances.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub lambdas: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2])]
    pub epss: Vec<f64>,
    /// Benchmark instance: X = {0,1}^x_bits.
    #[arg(long, default_value_t = 3)]
    pub x_bits: usize,
    /// Benchmark instance: auxiliary-input length.
    #[arg(long, default_value_t = 2)]
    pub lambda: usize,
    /// Benchmark instance: members before complement closure.
    #[arg(long, default_value_t = 128)]
    pub family_size: usize,
    /// Benchmark instance: real-valued rather than boolean tables.
    #[arg(long)]
    pub real_valued: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// An artifact previously written by this tool.
    pub artifact: PathBuf,
}
