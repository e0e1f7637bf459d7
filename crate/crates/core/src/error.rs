use thiserror::Error;

/// Errors raised by the conestab library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (residual {residual:.3e} exceeds {bound:.3e})")]
    NotHermitian { residual: f64, bound: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:.3e})")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("matrix is indefinite (smallest eigenvalue {lambda_min:.3e})")]
    Indefinite { lambda_min: f64 },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("variable lists differ: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("polynomial has non-real coefficients")]
    NonReal,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("constant polynomial")]
    ConstantPolynomial,
    #[error("polynomial of degree {0} is not linear")]
    NotLinear(u32),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("point is not in the interior of the cone")]
    NotInterior,
    #[error("expansion cap exceeded: n = {n}, d = {d} (cap n <= {max_n}, d <= {max_d})")]
    ExpansionCap {
        n: usize,
        d: usize,
        max_n: usize,
        max_d: usize,
    },
    #[error("block ({0}, {1}) is not diagonal")]
    NonDiagonalBlock(usize, usize),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
