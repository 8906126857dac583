use thiserror::Error;
use tsr_core::catalog::CatalogError;
use tsr_core::cipher::CipherError;
use tsr_core::game::GameError;
use tsr_core::reduction::ReductionError;
use tsr_core::simulator::SimError;
use tsr_core::wprf::WprfError;

/// Every failure the CLI reports, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Catalog(CatalogError),
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("trace verification failed: {0}")]
    TraceMismatch(String),
    #[error(transparent)]
    Wprf(#[from] WprfError),
    #[error(transparent)]
    Game(GameError),
    #[error(transparent)]
    Simulator(#[from] SimError),
    #[error("input {path} changed since the run: digest {actual}, manifest says {expected}")]
    InputChanged { path: String, expected: String, actual: String },
    #[error("replayed output differs from {0}")]
    ReplayMismatch(String),
    #[error("no run manifest found in {0}")]
    NoManifest(String),
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Reduction(r) => CliError::Reduction(r),
            other => CliError::Catalog(other),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Cipher(c) => CliError::Cipher(c),
            GameError::Wprf(w) => CliError::Wprf(w),
            other => CliError::Game(other),
        }
    }
}

impl CliError {
    /// Process exit code. 0 is success and 2 is reserved for argument
    /// errors reported by the parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Reduction(ReductionError::ConditionViolated { .. }) => 3,
            CliError::Reduction(ReductionError::UnsupportedCoefficient(_)) => 4,
            CliError::Reduction(ReductionError::InvalidParams(_)) => 5,
            CliError::Reduction(ReductionError::NonFiniteLevel) => 6,
            CliError::Reduction(ReductionError::EmptyRange(_)) => 7,
            CliError::Catalog(_) => 8,
            CliError::Io { .. } => 10,
            CliError::Parse { .. } => 11,
            CliError::Cipher(CipherError::OutputWidthMismatch(_)) => 20,
            CliError::Cipher(CipherError::PublicSeqExhausted(_)) => 21,
            CliError::Cipher(CipherError::IllegalLeakage { .. }) => 22,
            CliError::Cipher(CipherError::MalformedTrace(_)) => 23,
            CliError::TraceMismatch(_) => 24,
            CliError::Wprf(_) => 25,
            CliError::Game(GameError::SizeTooLarge { .. }) => 30,
            CliError::Game(_) => 31,
            CliError::Simulator(SimError::DimensionMismatch(_)) => 40,
            CliError::Simulator(SimError::InvalidDistribution(_)) => 41,
            CliError::Simulator(SimError::InvalidTable(_)) => 42,
            CliError::Simulator(SimError::InvalidParameter(_)) => 43,
            CliError::Simulator(SimError::NoConvergence { .. }) => 44,
            CliError::Simulator(SimError::Io(_)) => 45,
            CliError::InputChanged { .. } => 50,
            CliError::ReplayMismatch(_) => 51,
            CliError::NoManifest(_) => 52,
        }
    }
}
