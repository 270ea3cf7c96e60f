//! Casimir forces and free energies for dielectric bodies on the imaginary
//! frequency axis.
//!
//! Natural units (ħ = c = k_B = 1) are used throughout: lengths in an
//! arbitrary unit `L`, frequencies and temperatures in `1/L`, pressures in
//! `1/L⁴`. Negative pressures and free energies mean attraction.
//!
//! Everything is generic over [`Real`]; the `*64` and `*32` aliases below fix the precision.

pub mod dielectric;
pub mod dipole_oracle;
pub mod error;
pub mod numerics;
pub mod planar;
pub mod scalar;
pub mod spherical;
pub mod validation;

pub use dielectric::{DielectricResponse, Medium, PolarizabilityModel};
pub use error::{Error, Result};
pub use scalar::Real;

pub type PolarizabilityModel64 = PolarizabilityModel<f64>;
pub type Medium64 = Medium<f64>;
pub type DielectricResponse64 = DielectricResponse<f64>;
pub type QuadratureSpec64 = numerics::QuadratureSpec<f64>;
pub type SumSpec64 = numerics::SumSpec<f64>;
pub type PlanarCavity64 = planar::PlanarCavity<f64>;
pub type PlanarSpec64 = planar::PlanarSpec<f64>;
pub type PlanarEstimate64 = planar::PlanarEstimate<f64>;
pub type BallChannel64 = spherical::BallChannel<f64>;
pub type DipoleLattice64 = dipole_oracle::DipoleLattice<f64>;
pub type OracleSpec64 = dipole_oracle::OracleSpec<f64>;

pub type PlanarCavity32 = planar::PlanarCavity<f32>;
pub type BallChannel32 = spherical::BallChannel<f32>;
pub type DipoleLattice32 = dipole_oracle::DipoleLattice<f32>;
