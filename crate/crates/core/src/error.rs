use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid coefficient tensor: {0}")]
    InvalidTensor(String),

    #[error("kernel spec field `{field}`: {message}")]
    SpecField { field: String, message: String },

    #[error("matrix is not Hermitian: defect {defect:e} exceeds tolerance {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error(
        "degree {degree} is beyond the explicit range (j_max = {j_max}) and no tail is declared"
    )]
    DegreeOutOfRange { degree: usize, j_max: usize },

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("length mismatch: {points} points but {values} coefficients")]
    LengthMismatch { points: usize, values: usize },

    /// The Gram matrix is numerically singular. `near_null` is a unit vector
    /// `v` with `v^H G v ≈ λ_min`; `conj(v)` is a candidate coefficient vector
    /// for a degeneracy witness.
    #[error("singular Gram matrix: min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e}")]
    SingularGram {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
        near_null: DVector<Complex64>,
    },

    #[error("interpolation residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
