use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("log_gamma has a pole at s = {0}")]
    Pole(f64),

    #[error("series overflow at |z| = {modulus}; rescale z or use the asymptotic expansion")]
    Overflow { modulus: f64 },

    #[error("z lies outside the validity sector: |arg z - arg(i conj xi)| = {offset:.4} >= {limit:.4}")]
    OutOfSector { offset: f64, limit: f64 },

    #[error("|z| = {modulus} is below the asymptotic validity floor {floor}; use the series or Mellin-Barnes method")]
    BelowFloor { modulus: f64, floor: f64 },

    #[error("tolerance {tol:e} not met; achieved {achieved:e}")]
    Tolerance { tol: f64, achieved: f64 },

    #[error("Vandermonde system is nearly singular (genericity gap {0:e})")]
    Degenerate(f64),
}
