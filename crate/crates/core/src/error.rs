use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("stage {stage} out of range for horizon {horizon}")]
    StageOutOfRange { stage: usize, horizon: usize },

    #[error("v-update factorization built for (rho1={built_rho1}, rho2={built_rho2}) used with (rho1={rho1}, rho2={rho2})")]
    StaleFactorization {
        built_rho1: f64,
        built_rho2: f64,
        rho1: f64,
        rho2: f64,
    },

    #[error("v-update factorization has not been built")]
    MissingFactorization,

    #[error("no feasible point at grid resolution {0}")]
    InfeasibleAtResolution(usize),

    #[error("oracle horizon {n} exceeds the supported maximum {max}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("empty table")]
    EmptyTable,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
