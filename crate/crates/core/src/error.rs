use thiserror::Error;

/// Errors produced by the dimer computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid torus size m={m}, n={n}: both must be at least 1")]
    InvalidSize { m: usize, n: usize },

    #[error("n={n} is not a multiple of 3; the reference matching is only defined when 3 | n")]
    NotMultipleOfThree { n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exhaustive enumeration refused: graph has {vertices} vertices, cap is {cap} (raise the cap to override)")]
    EnumerationCap { vertices: usize, cap: usize },

    #[error("matchings belong to different graphs")]
    MismatchedGraphs,

    #[error("precision failure: {detail}; retry with higher precision")]
    Precision { detail: String },

    #[error("nome |q| = {modulus} is not inside the unit disk")]
    NomeOutsideDisk { modulus: f64 },

    #[error("modular parameter must have positive imaginary part, got Im = {im}")]
    NotUpperHalfPlane { im: f64 },

    #[error("phi = {re}{im:+}i lies outside the analyticity strip of the spectral roots")]
    OutsideStrip { re: f64, im: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("division by an exactly zero product in {0}")]
    ZeroDivision(String),

    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn precision(detail: impl Into<String>) -> Self {
        Error::Precision { detail: detail.into() }
    }

    pub fn is_precision_failure(&self) -> bool {
        matches!(self, Error::Precision { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
