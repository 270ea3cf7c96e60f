use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Payloads are stored as `f64` regardless of the scalar type the
/// computation ran in, so that the error type stays independent of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unphysical input: {0}")]
    Unphysical(String),

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("u = {u} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { u: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge (achieved error {achieved:e}, requested {requested:e})")]
    NonConvergence {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular channel: {0}")]
    Singular(String),

    #[error("scaled Bessel function out of range at l = {l}, x = {x}")]
    BesselRange { l: usize, x: f64 },

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
