use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dispersion is constant (all hopping weights vanish)")]
    DegenerateEdge,
    #[error("root polishing stalled at residual {residual:e} near phi = {phi}")]
    SolverFailure { phi: f64, residual: f64 },
    #[error("Jacobi-Trudi determinants disagree: {primal} vs {dual}")]
    OracleMismatch { primal: f64, dual: f64 },
    #[error("Fourier band not captured: tail {tail:e} on a grid of {grid}")]
    BandTooNarrow { grid: usize, tail: f64 },
    #[error("contour quadrature did not settle (last change {delta:e} at {nodes} nodes)")]
    NoConvergence { nodes: usize, delta: f64 },
    #[error("unsupported edge: {0}")]
    UnsupportedEdge(String),
    #[error("Airy contour tail {tail:e} too large at t = {t_max}")]
    TruncationFailure { t_max: f64, tail: f64 },
    #[error("Fredholm determinant moved by {delta:e} when doubling {nodes} nodes")]
    NodeCountInsufficient { nodes: usize, delta: f64 },
    #[error("Toeplitz matrix lost positivity at order {order}")]
    NotPositiveDefinite { order: usize },
    #[error("window of {width} sites leaves trace {tail:e}")]
    WindowTooSmall { width: usize, tail: f64 },
    #[error("window leakage {leakage:e} exceeds bound")]
    LeakageTooLarge { leakage: f64 },
    #[error("x = {x} lies below the edge b = {b}")]
    SubcriticalPhase { x: f64, b: f64 },
    #[error("probability {value} outside [0, 1] beyond rounding")]
    ProbabilityOutOfRange { value: f64 },
    #[error("two eigenvalue angles coincide")]
    CoincidentAngles,
}

impl Error {
    /// Variant name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::DegenerateEdge => "DegenerateEdge",
            Error::SolverFailure { .. } => "SolverFailure",
            Error::OracleMismatch { .. } => "OracleMismatch",
            Error::BandTooNarrow { .. } => "BandTooNarrow",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::UnsupportedEdge(_) => "UnsupportedEdge",
            Error::TruncationFailure { .. } => "TruncationFailure",
            Error::NodeCountInsufficient { .. } => "NodeCountInsufficient",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::LeakageTooLarge { .. } => "LeakageTooLarge",
            Error::SubcriticalPhase { .. } => "SubcriticalPhase",
            Error::ProbabilityOutOfRange { .. } => "ProbabilityOutOfRange",
            Error::CoincidentAngles => "CoincidentAngles",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
