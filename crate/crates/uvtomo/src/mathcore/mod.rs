//! Special functions, quadrature rules, and rotation sampling.
//!
//! Everything here is a pure function of its inputs and safe to call
//! concurrently; random sampling takes the caller's generator state.

mod bessel;
mod legendre;
mod quadrature;
mod rotation;
mod sph;

pub use bessel::{
    bessel_j_sequence, scaled_bessel_i_half, scaled_i_half_sequence, spherical_bessel_j,
    spherical_j_sequence,
};
pub use legendre::{legendre, normalized_assoc_legendre};
pub use quadrature::{gauss_legendre, uniform_gregory, QuadratureRule};
pub use rotation::{uniform_rotation, Rotation};
pub use sph::{real_sph_harm, real_sph_harm_all, real_sph_harm_all_dir};

/// Errors from domain violations or ill-posed rule requests.
#[derive(Debug, thiserror::Error)]
pub enum MathError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid quadrature request: {0}")]
    InvalidQuadrature(String),
}
