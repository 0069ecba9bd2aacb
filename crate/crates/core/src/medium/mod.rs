//! The macrofacet medium: microflake density over SDF value, extinction,
//! closed-form and stochastic transmittance, and the conductor phase function.

pub mod tracking;

pub use tracking::{
    delta_track, Step,
    ratio_transmittance, sample_collision, transmittance_estimate, MediumEvent, MediumEventKind, Tentative, Tracker,
};

use crate::error::{Error, Result};
use crate::math::special::{erfcx, gauss_cdf, gauss_pdf, ln_gauss_cdf};
use crate::math::{Direction, Frame, RandomStream, Rgb, SphericalAngles};
use crate::ndf::{
    generalized_lambda_dir, ggx_lambda, KernelParams, Microsurface, NdfKind, RoughnessTriple,
};
use std::f64::consts::{FRAC_2_PI, SQRT_2};

/// Reflectance model at real collisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fresnel {
    Conductor { eta: Rgb, k: Rgb },
    /// F ≡ 1: lossless, used by furnace tests.
    One,
}

impl Fresnel {
    /// A gold-like default; aesthetic, not measured.
    pub const GOLD: Fresnel = Fresnel::Conductor {
        eta: Rgb::new(0.2, 0.92, 1.1),
        k: Rgb::new(3.9, 2.45, 2.14),
    };

    pub fn eval(&self, cos_i: f64) -> Rgb {
        match *self {
            Fresnel::One => Rgb::WHITE,
            Fresnel::Conductor { eta, k } => Rgb([
                fresnel_conductor(cos_i, eta[0], k[0]),
                fresnel_conductor(cos_i, eta[1], k[1]),
                fresnel_conductor(cos_i, eta[2], k[2]),
            ]),
        }
    }
}

impl Default for Fresnel {
    fn default() -> Self {
        Fresnel::GOLD
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacrofacetMedium {
    pub surface: Microsurface,
    /// Standard deviation of the SDF; the shell is ±3σ around the base surface.
    pub sigma: f64,
    pub fresnel: Fresnel,
    /// Probability of the Beckmann branch in visible-normal sampling.
    pub mix_ratio: f64,
}

impl MacrofacetMedium {
    pub const DEFAULT_MIX_RATIO: f64 = 0.5;

    pub fn new(kind: NdfKind, roughness: RoughnessTriple, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(MacrofacetMedium {
            surface: Microsurface::new(kind, roughness)?,
            sigma,
            fresnel: Fresnel::default(),
            mix_ratio: Self::DEFAULT_MIX_RATIO,
        })
    }

    pub fn from_kernel(kind: NdfKind, k: &KernelParams) -> Result<Self> {
        Self::new(kind, crate::ndf::roughness_from_kernel(k), k.sigma)
    }

    pub fn with_fresnel(mut self, f: Fresnel) -> Result<Self> {
        if let Fresnel::Conductor { eta, k } = f {
            if !(0..3).all(|i| eta[i] > 0.0 && eta[i].is_finite() && k[i] >= 0.0 && k[i].is_finite()) {
                return Err(Error::Domain("conductor needs eta > 0 and k >= 0".into()));
            }
        }
        self.fresnel = f;
        Ok(self)
    }

    pub fn with_mix_ratio(mut self, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("mix ratio must lie in [0, 1], got {r}")));
        }
        self.mix_ratio = r;
        Ok(self)
    }

    #[inline]
    pub fn kind(&self) -> NdfKind {
        self.surface.kind
    }

    #[inline]
    pub fn roughness(&self) -> RoughnessTriple {
        self.surface.roughness
    }

    #[inline]
    pub fn shell_half_width(&self) -> f64 {
        3.0 * self.sigma
    }

    /// Traversal below this SDF value counts as absorbed.
    #[inline]
    pub fn depth_cap(&self) -> f64 {
        -6.0 * self.sigma
    }

    #[inline]
    pub fn density(&self, f: f64) -> f64 {
        density(f, self.sigma)
    }

    /// σ_t for a direction already expressed in the local frame.
    #[inline]
    pub fn extinction_local(&self, w: Direction, f: f64) -> f64 {
        let rho = self.density(f);
        if rho == 0.0 {
            return 0.0;
        }
        rho * self.surface.projected_area(w)
    }

    /// Smith Λ for the medium's distribution; singular at the horizon.
    pub fn lambda(&self, w: Direction) -> Result<f64> {
        match self.kind() {
            NdfKind::Ggx => ggx_lambda(w, self.roughness().ax, self.roughness().ay),
            _ => generalized_lambda_dir(w, &self.roughness()),
        }
    }
}

/// Microflake density ρ(f) = φ(f)/Φ(f) for SDF value `f`.
pub fn density(f: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    let z = f / (sigma * SQRT_2);
    if z >= 0.0 {
        // the numerator underflows long before Φ leaves [0.5, 1]
        let pdf = gauss_pdf(f, 0.0, sigma * sigma).unwrap_or(0.0);
        let cdf = gauss_cdf(f, 0.0, sigma * sigma).unwrap_or(1.0);
        pdf / cdf
    } else {
        // φ/Φ = √(2/π) / (σ·erfcx(−f/(σ√2))): no 0/0 in the lower tail
        FRAC_2_PI.sqrt() / (sigma * erfcx(-z))
    }
}

/// ρ(f)·σ(ω) with ω measured in `local_frame`.
pub fn extinction(wo: Direction, f: f64, m: &MacrofacetMedium, local_frame: &Frame) -> f64 {
    m.extinction_local(local_frame.dir_to_local(wo), f)
}

/// Closed-form transmittance through a flat shell from SDF height `h0` to
/// `h1` along `w`: (Φ(h1)/Φ(h0))^{−Λ(ω)}.
pub fn planar_transmittance(h0: f64, h1: f64, w: SphericalAngles, m: &MacrofacetMedium) -> Result<f64> {
    let d = w.direction();
    if d.z().abs() < 1e-12 {
        return Err(Error::UnsupportedGeometry(
            "horizontal ray in a flat shell has no closed form; use the stochastic estimator".into(),
        ));
    }
    if (h1 - h0) * d.z() < 0.0 {
        return Err(Error::Domain(format!("h1 = {h1} is not reachable from h0 = {h0} along θ = {}", w.theta)));
    }
    if h1 == h0 {
        return Ok(1.0);
    }
    let var = m.sigma * m.sigma;
    let lambda = m.lambda(d)?;
    let log_ratio = ln_gauss_cdf(h1, 0.0, var)? - ln_gauss_cdf(h0, 0.0, var)?;
    Ok((-lambda * log_ratio).exp().min(1.0))
}

/// Unpolarized reflectance of a conductor with complex index η + ik.
pub fn fresnel_conductor(cos_i: f64, eta: f64, k: f64) -> f64 {
    if eta == 1.0 && k == 0.0 {
        return 0.0;
    }
    let c = cos_i.clamp(0.0, 1.0);
    let cos2 = c * c;
    let sin2 = 1.0 - cos2;
    let eta2 = eta * eta;
    let k2 = k * k;
    let t0 = eta2 - k2 - sin2;
    let a2b2 = (t0 * t0 + 4.0 * eta2 * k2).sqrt();
    let t1 = a2b2 + cos2;
    let a = (0.5 * (a2b2 + t0)).max(0.0).sqrt();
    let t2 = 2.0 * c * a;
    let rs = (t1 - t2) / (t1 + t2);
    let t3 = cos2 * a2b2 + sin2 * sin2;
    let t4 = t2 * sin2;
    let rp = rs * (t3 - t4) / (t3 + t4);
    (0.5 * (rs + rp)).clamp(0.0, 1.0)
}

/// Half vector between the reversed propagation direction and `wi`.
#[inline]
fn half_vector(wo: Direction, wi: Direction) -> Option<Direction> {
    ((-wo).vec() + wi.vec()).try_normalize().filter(|h| h.dot(wi) > 0.0)
}

/// Phase function in the local frame, F(ω_i·ω_h)·D(ω_h)/(4σ(ω_o)).
///
/// `wo` is the propagation direction of the incoming ray, `wi` the
/// scattered direction. The visible-normal clamp ⟨−ω_o, ω_h⟩ > 0 always
/// holds for the half vector, so the clamped cosine cancels the Jacobian.
pub fn phase_eval_local(wo: Direction, wi: Direction, m: &MacrofacetMedium) -> Rgb {
    let Some(h) = half_vector(wo, wi) else {
        return Rgb::BLACK;
    };
    let s = m.surface.projected_area(wo);
    if s < crate::ndf::vndf::MIN_PROJECTED_AREA {
        return Rgb::BLACK;
    }
    let d = m.surface.ndf(h);
    if d == 0.0 {
        return Rgb::BLACK;
    }
    m.fresnel.eval(wi.dot(h)) * (d / (4.0 * s))
}

pub fn phase_eval(wo: Direction, wi: Direction, m: &MacrofacetMedium, local_frame: &Frame) -> Rgb {
    phase_eval_local(local_frame.dir_to_local(wo), local_frame.dir_to_local(wi), m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub wi: Direction,
    pub pdf: f64,
    /// phase / pdf, per channel.
    pub weight: Rgb,
}

/// Samples a half vector from the visible-normal mixture and mirrors −ω_o
/// about it.
pub fn phase_sample_local(wo: Direction, m: &MacrofacetMedium, rng: &mut RandomStream) -> Result<PhaseSample> {
    let (h, pdf_h) = m.surface.sample_visible(wo, m.mix_ratio, rng)?;
    let v = -wo;
    let vh = v.dot(h);
    let wi = v.reflect(h);
    if vh < 1e-12 || pdf_h <= 0.0 {
        return Ok(PhaseSample { wi, pdf: 0.0, weight: Rgb::BLACK });
    }
    let pdf = pdf_h / (4.0 * vh);
    let ratio = m.surface.vndf(h, wo)? / pdf_h;
    let weight = m.fresnel.eval(vh) * ratio;
    Ok(PhaseSample { wi, pdf, weight })
}

/// Density of [`phase_sample_local`] at `wi`.
pub fn phase_sample_pdf_local(wo: Direction, wi: Direction, m: &MacrofacetMedium) -> f64 {
    let Some(h) = half_vector(wo, wi) else {
        return 0.0;
    };
    let vh = -wo.dot(h);
    if vh < 1e-12 {
        return 0.0;
    }
    m.surface.visible_pdf(h, wo, m.mix_ratio) / (4.0 * vh)
}

pub fn phase_sample(
    wo: Direction,
    m: &MacrofacetMedium,
    local_frame: &Frame,
    rng: &mut RandomStream,
) -> Result<PhaseSample> {
    let s = phase_sample_local(local_frame.dir_to_local(wo), m, rng)?;
    Ok(PhaseSample { wi: local_frame.dir_to_world(s.wi), ..s })
}
