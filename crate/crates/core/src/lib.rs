//! Macrofacet media: statistical Gaussian-process surfaces rendered as
//! exponential participating media.
//!
//! The crate is organised bottom-up: [`math`] (special functions, frames,
//! random streams), [`ndf`] (normal distributions and Smith Λ), [`medium`]
//! (density, extinction, transmittance, phase function), [`scene`] and
//! [`render`] (a small volumetric path tracer), and [`gp`], a brute-force
//! Gaussian-process oracle used to validate the rest.

pub mod error;
pub mod math;
pub mod ndf;

pub use error::{Error, Result};
pub mod medium;
pub mod scene;
pub mod render;
pub mod gp;
pub mod validate;
