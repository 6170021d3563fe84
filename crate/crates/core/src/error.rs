use thiserror::Error;

pub type Result<T, E = LfcError> = std::result::Result<T, E>;

/// Failures raised by model construction, analysis and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LfcError {
    #[error("transfer function denominator vanishes at s = 0")]
    ZeroDcDenominator,
    #[error("numerator degree {num} exceeds denominator degree {den}")]
    ImproperTransferFunction { num: usize, den: usize },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquareMatrix { rows: usize, cols: usize },
    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("governor time constants Td2 and Td3 coincide ({td2} vs {td3})")]
    DegenerateTimeConstants { td2: f64, td3: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("PV current solve did not converge at V = {voltage}")]
    NoConvergence { voltage: f64 },
    #[error("state/control ordering mismatch: missing label `{0}`")]
    OrderingMismatch(String),
    #[error("plant has no state labelled `{0}`")]
    MissingFrequencyState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("step size too large: |lambda_max| * dt = {product:.4} exceeds {limit}")]
    UnstableStepSize { product: f64, limit: f64 },
    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("system matrix is singular (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("no stable gain set found after {evaluations} evaluations")]
    NoStableGainsFound { evaluations: usize },
}

impl LfcError {
    /// Variant name, used as the machine-readable error category by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            LfcError::ZeroDcDenominator => "ZeroDcDenominator",
            LfcError::ImproperTransferFunction { .. } => "ImproperTransferFunction",
            LfcError::InvalidPolynomial(_) => "InvalidPolynomial",
            LfcError::NonSquareMatrix { .. } => "NonSquareMatrix",
            LfcError::ConvergenceFailure { .. } => "ConvergenceFailure",
            LfcError::DegenerateTimeConstants { .. } => "DegenerateTimeConstants",
            LfcError::InvalidParameter(_) => "InvalidParameter",
            LfcError::NoConvergence { .. } => "NoConvergence",
            LfcError::OrderingMismatch(_) => "OrderingMismatch",
            LfcError::MissingFrequencyState(_) => "MissingFrequencyState",
            LfcError::DimensionMismatch(_) => "DimensionMismatch",
            LfcError::UnstableStepSize { .. } => "UnstableStepSize",
            LfcError::NonFiniteState { .. } => "NonFiniteState",
            LfcError::SingularSystem { .. } => "SingularSystem",
            LfcError::UnknownInput(_) => "UnknownInput",
            LfcError::InvalidScenario(_) => "InvalidScenario",
            LfcError::NoStableGainsFound { .. } => "NoStableGainsFound",
        }
    }
}
