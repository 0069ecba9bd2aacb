//! Normal distributions and the Smith machinery built on them.

pub mod distribution;
pub mod kernel;
pub mod lambda;
pub mod vndf;

pub use distribution::{beckmann_ndf, gdf_pdf, generalized_ndf, generalized_ndf_dir, ggx_ndf, ndf_from_gdf_quadrature};
pub use kernel::{roughness_from_kernel, KernelParams, RoughnessTriple};
pub use lambda::{
    beckmann_lambda, generalized_lambda, generalized_lambda_dir, ggx_lambda, ggx_projected_area, projected_area,
    projected_area_dir,
};
pub use vndf::{sample_beckmann_visible, vndf_eval, vndf_sample};

use crate::error::{Error, Result};
use crate::math::special::FRAC_1_SQRT_PI;
use crate::math::{Direction, RandomStream};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdfKind {
    Beckmann,
    Ggx,
    Generalized,
}

impl fmt::Display for NdfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NdfKind::Beckmann => "beckmann",
            NdfKind::Ggx => "ggx",
            NdfKind::Generalized => "generalized",
        })
    }
}

impl FromStr for NdfKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "beckmann" => Ok(NdfKind::Beckmann),
            "ggx" => Ok(NdfKind::Ggx),
            "generalized" => Ok(NdfKind::Generalized),
            _ => Err(Error::Config(format!("unknown ndf kind '{s}' (beckmann, ggx, generalized)"))),
        }
    }
}

/// A distribution kind bound to its roughness. Height-field kinds store
/// `az = 0` whatever they were given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Microsurface {
    pub kind: NdfKind,
    pub roughness: RoughnessTriple,
}

impl Microsurface {
    pub fn new(kind: NdfKind, a: RoughnessTriple) -> Result<Self> {
        let roughness = match kind {
            NdfKind::Generalized => {
                if a.az <= 0.0 {
                    return Err(Error::Domain("the generalized distribution needs az > 0".into()));
                }
                a
            }
            NdfKind::Beckmann | NdfKind::Ggx => a.height_field(),
        };
        Ok(Microsurface { kind, roughness })
    }

    #[inline]
    pub fn ndf(&self, m: Direction) -> f64 {
        let a = &self.roughness;
        match self.kind {
            NdfKind::Beckmann => beckmann_ndf(m, a.ax, a.ay),
            NdfKind::Ggx => ggx_ndf(m, a.ax, a.ay),
            NdfKind::Generalized => generalized_ndf_dir(m, a),
        }
    }

    /// Blocker area σ(ω) seen by a ray travelling along `w`.
    #[inline]
    pub fn projected_area(&self, w: Direction) -> f64 {
        match self.kind {
            NdfKind::Ggx => ggx_projected_area(w, self.roughness.ax, self.roughness.ay),
            _ => projected_area_dir(w, &self.roughness),
        }
    }

    /// An upper bound on σ(ω) over all directions.
    pub fn projected_area_bound(&self) -> f64 {
        let a = &self.roughness;
        let w = (a.ax * a.ax + a.ay * a.ay + a.az * a.az).sqrt();
        match self.kind {
            // σ = E[max(0, −ω·g)] ≤ max(0, −z) + spread/(2√π)
            NdfKind::Beckmann | NdfKind::Generalized => 1.0 + 0.5 * FRAC_1_SQRT_PI * w,
            NdfKind::Ggx => 0.5 * ((1.0 + w * w).sqrt() + 1.0),
        }
    }

    pub fn vndf(&self, m: Direction, wo: Direction) -> Result<f64> {
        let s = self.projected_area(wo);
        if s < vndf::MIN_PROJECTED_AREA {
            return Err(Error::DegenerateVisibility(s));
        }
        let cos = -wo.dot(m);
        if cos <= 0.0 {
            return Ok(0.0);
        }
        Ok(cos * self.ndf(m) / s)
    }

    /// Mixture sample: Beckmann visible normals with probability `mix`, a
    /// uniform hemisphere about −ω_o otherwise. The density returned is that
    /// of the whole mixture.
    pub fn sample_visible(&self, wo: Direction, mix: f64, rng: &mut RandomStream) -> Result<(Direction, f64)> {
        vndf::check_mix(mix)?;
        let s = self.projected_area(wo);
        if s < vndf::MIN_PROJECTED_AREA {
            return Err(Error::DegenerateVisibility(s));
        }
        Ok(vndf::sample_mixture(wo, &self.roughness, mix, rng))
    }

    pub fn visible_pdf(&self, m: Direction, wo: Direction, mix: f64) -> f64 {
        vndf::mixture_pdf(m, wo, &self.roughness, mix)
    }
}
