use thiserror::Error;

/// Errors raised by the game engine.
///
/// Every variant carries a stable machine-readable [`code`](EngineError::code)
/// which the command-line and HTTP front ends surface verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("strategy matrix is not special-unitary (unitarity defect {defect:.3e}, |det - 1| = {det_error:.3e})")]
    NonUnitaryStrategy { defect: f64, det_error: f64 },

    #[error("gamma = {0} lies outside [0, pi/2]")]
    GammaOutOfRange(f64),

    #[error("custom initial state rejected: {0}")]
    BadCustomState(String),

    #[error("incoherent mode only defines a final state at gamma = 0 or pi/2 (got {0})")]
    IncoherentBranchOnly(f64),

    #[error("matrix exponential did not converge")]
    ExpNotConverged,

    #[error("random SU(3) sample was degenerate after {0} attempts")]
    DegenerateSample(u32),

    #[error("resolved strategy is not special-unitary (unitarity defect {defect:.3e}, |det - 1| = {det_error:.3e})")]
    NonUnitaryResolution { defect: f64, det_error: f64 },

    #[error("invalid mixed strategy: {0}")]
    InvalidMixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::NonUnitaryStrategy { .. } => "NonUnitaryStrategy",
            EngineError::GammaOutOfRange(_) => "GammaOutOfRange",
            EngineError::BadCustomState(_) => "BadCustomState",
            EngineError::IncoherentBranchOnly(_) => "IncoherentBranchOnly",
            EngineError::ExpNotConverged => "ExpNotConverged",
            EngineError::DegenerateSample(_) => "DegenerateSample",
            EngineError::NonUnitaryResolution { .. } => "NonUnitaryResolution",
            EngineError::InvalidMixture(_) => "InvalidMixture",
            EngineError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
