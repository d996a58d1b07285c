//! Low-frequency scattering of scalar waves by inhomogeneous planar slabs.
//!
//! The amplitude is expanded in powers of `kℓ`, with `ℓ` the slab thickness.
//! The first two coefficients are closed-form functionals of the transverse
//! Fourier moments of the permittivity deviation `w = ε̂ − 1`.

pub mod amp2d;
pub mod amp3d;
pub mod cloak;
pub mod dyson1d;
pub mod error;
pub mod exactborn;
pub mod kernels;
pub mod numerics;
pub mod profiles;

pub use error::{Error, NumericsError, Result};
pub use num_complex::Complex64;
