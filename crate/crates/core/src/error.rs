use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator norm {norm} exceeds the allowed bound {bound}")]
    NormPromiseViolated { norm: f64, bound: f64 },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("spectrum out of range: eigenvalue {value} not in {range}")]
    SpectrumOutOfRange { value: f64, range: String },
    #[error("post-selected branch has vanishing probability {probability:e}")]
    ZeroOutcome { probability: f64 },
    #[error("amplification overflow: gamma * sigma_max = {product}")]
    AmplificationOverflow { product: f64 },
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("zero matrix")]
    ZeroMatrix,
    #[error("zero vector")]
    ZeroVector,
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("empty term list")]
    EmptyTermList,
    #[error("linear combination has zero total weight")]
    DegenerateCombination,
    #[error("tensor profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("non-positive weight {0}")]
    NonPositiveWeight(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("polynomial is not admissible (max |P| = {max_abs} on the grid)")]
    NotAdmissible { max_abs: f64 },
    #[error("matrix is singular (smallest magnitude {smallest:e})")]
    Singular { smallest: f64 },
    #[error("matrix is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("start vector overlap {overlap:e} with the target eigenvector collapsed")]
    OverlapCollapse { overlap: f64 },
    #[error("start vector has zero overlap with the ground state")]
    ZeroOverlap,
    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },
    #[error("number of samples {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: String, value: f64 },
    #[error("formula parse error: {0}")]
    FormulaParse(String),
    #[error("matrix format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("step size {0} outside (0, 1/2)")]
    StepSizeOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal conditions surfaced alongside a result.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    GapTooSmall { level: usize, configured: f64, measured: f64 },
    DegenerateTopEigenvalue { gap: f64 },
    SymmetrizedInput { asymmetry: f64 },
    Rescaled { what: String, factor: f64 },
    InvalidCoefficients { declared_order: usize, measured_order: usize },
}
