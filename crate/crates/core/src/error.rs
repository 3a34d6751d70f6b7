use thiserror::Error;

/// Faults raised by samplers, integrators and estimators.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("config fault: {0}")]
    Config(String),

    #[error("grid of {m} points cannot resolve the requested operation (needs at least {required})")]
    GridTooSmall { m: usize, required: usize },

    #[error("dealiasing fault: grid of {m} points underresolves |phi|^{p} (needs at least {required})")]
    Dealiasing { m: usize, p: f64, required: usize },

    #[error("domain fault: {0}")]
    Domain(String),

    #[error("characteristic-function inversion did not reach tolerance: {0}")]
    InversionTolerance(String),

    #[error("stuck chain: no acceptance in {window} proposals (acc {accepted}/{proposed}, log-weight {log_weight})")]
    StuckChain {
        window: usize,
        accepted: u64,
        proposed: u64,
        log_weight: f64,
    },

    #[error("trajectory blow-up at step {step}: {observable} is not finite")]
    BlowUp { step: usize, observable: String },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("insufficient signal for a rate fit: {0}")]
    InsufficientSignal(String),

    #[error("io fault: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed record: {0}")]
    Malformed(String),
}
