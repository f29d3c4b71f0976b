use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The power-law interaction must decay faster than the dimension for a
    /// critical point to exist.
    #[error("no critical point for interaction exponent p = {p} <= dimension d = {d}")]
    NoCriticalPoint { d: u32, p: u32 },

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("could not place atom {atom} after {attempts} attempts with r_min = {r_min}")]
    Overconstrained {
        atom: usize,
        attempts: usize,
        r_min: f64,
    },

    #[error("full basis requested for {atoms} atoms, cap is {cap}")]
    FullBasisCap { atoms: usize, cap: usize },

    #[error("basis dimension {dim} exceeds state cap {cap}")]
    BasisTooLarge { dim: u128, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("step size underflow at tau = {tau:e} (dt = {dt:e}); stiff Hamiltonian, check r_min")]
    StepUnderflow { tau: f64, dt: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("realization {index} (seed {seed:#018x}) failed: {source}")]
    Realization {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("nonpositive data: {0}")]
    NonPositiveData(String),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 4,
            Error::StepUnderflow { .. } | Error::NonConvergence(_) => 3,
            Error::Realization { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
