//! Numerical building blocks shared by every other module.

pub mod color;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod vec;

pub use color::Rgb;
pub use rng::RandomStream;
pub use special::{erf, erfc, erfcx, gauss_cdf, gauss_pdf, ln_gauss_cdf};
pub use vec::{build_frame, Direction, Frame, Point, SphericalAngles, Vec3};
