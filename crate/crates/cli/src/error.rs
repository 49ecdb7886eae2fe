use qbroadcast::analytic::AnalyticError;
use qbroadcast::broadcast::BroadcastError;
use qbroadcast::discord::DiscordError;
use qbroadcast::qmat::QmatError;
use qbroadcast::sdp::SdpError;
use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or invalid input; exit code 2.
    #[error("invalid input: {0}")]
    Input(String),
    /// The solver did not certify a result; exit code 3.
    #[error("solver failure: {0}")]
    Solver(String),
    /// The problem exceeds a size limit; exit code 4.
    #[error("resource limit: {0}")]
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Guard(_) => 4,
        }
    }
}

impl From<QmatError> for CliError {
    fn from(e: QmatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SdpError> for CliError {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::Matrix(m) => m.into(),
            SdpError::InvalidTolerance(_) => CliError::Input(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<BroadcastError> for CliError {
    fn from(e: BroadcastError) -> Self {
        match e {
            BroadcastError::Solver(s) => s.into(),
            BroadcastError::TooLarge { .. } => CliError::Guard(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DiscordError> for CliError {
    fn from(e: DiscordError) -> Self {
        match e {
            DiscordError::Broadcast(b) => b.into(),
            DiscordError::Matrix(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}
