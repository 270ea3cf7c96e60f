//! Quadrature, thermal sums and dense factorizations shared by the physics modules.

pub mod linalg;
pub mod matsubara;
pub mod quadrature;
pub mod summation;

pub use linalg::{logdet_spd, spectral_radius_symmetric, Cholesky, DenseMatrix};
pub use matsubara::{matsubara_frequency, matsubara_sum, MatsubaraEstimate, SumSpec};
pub use quadrature::{
    integrate_finite, integrate_semi_infinite, try_integrate_finite, try_integrate_from, Estimate,
    QuadratureSpec, SemiInfiniteMap,
};
pub use summation::pairwise_sum;
