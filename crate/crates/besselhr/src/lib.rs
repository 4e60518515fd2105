//! Fundamental Bessel functions J(x;ς,λ) of arbitrary rank n, the Bessel
//! kernels J_(λ,δ)(±x) built from them, and the associated Hankel transform.
//!
//! Three independent evaluation paths are provided:
//!
//! * [`series`]: ascending (first-kind) series and their connection to
//!   J(z;ς,λ), summed in multiprecision so that cancellation is harmless;
//! * [`asympt`]: second-kind asymptotic expansions with recurrence-generated
//!   coefficients and superasymptotic truncation;
//! * [`mellinbarnes`]: direct quadrature of the defining Mellin–Barnes
//!   integral along a saddle-adapted contour.
//!
//! [`coeffs`] holds the exact combinatorial tables (A, U, V) and the numeric
//! asymptotic coefficients B_m(λ;ξ); [`kernel`] combines everything into the
//! Bessel kernel and the Hankel transform.

pub mod asympt;
pub mod classical;
pub mod coeffs;
pub mod dd;
pub mod error;
pub mod gamma;
pub mod index;
pub mod kernel;
pub mod mellinbarnes;
pub mod mp;
pub mod poly;
pub mod quad;
pub mod series;

pub use error::{Error, Result};
pub use index::{
    lambda_of_nu, nu_of_lambda, NuIndex, RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64,
};

/// Which evaluation path produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    Asymptotic,
    MellinBarnes,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Asymptotic => "asympt",
            Method::MellinBarnes => "mb",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Method::Series),
            "asympt" | "asymptotic" => Ok(Method::Asymptotic),
            "mb" | "mellin-barnes" => Ok(Method::MellinBarnes),
            _ => Err(Error::Invalid(format!("unknown method {s:?}"))),
        }
    }
}

/// A value with an a posteriori error estimate (absolute) and its origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: C64,
    pub error_estimate: f64,
    pub method: Method,
}

impl EvalResult {
    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.value.norm()
    }
}
