//! Visible normals: evaluation for every kind, and mixture importance
//! sampling (Beckmann visible normals blended with a uniform hemisphere).

use super::distribution::beckmann_ndf;
use super::kernel::RoughnessTriple;
use super::lambda::projected_area_dir;
use super::{Microsurface, NdfKind};
use crate::error::{Error, Result};
use crate::math::special::{erfc, erfcx, SQRT_PI};
use crate::math::{build_frame, Direction, RandomStream, Vec3};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Below this projected area the visible distribution is undefined.
pub const MIN_PROJECTED_AREA: f64 = 1e-12;

/// D_ωo(ω_m) = ⟨−ω_o, ω_m⟩⁺ D(ω_m) / σ(ω_o).
pub fn vndf_eval(wm: Direction, wo: Direction, kind: NdfKind, a3: RoughnessTriple) -> Result<f64> {
    Microsurface::new(kind, a3)?.vndf(wm, wo)
}

/// Draws a normal from the mixture and returns it with the mixture density.
pub fn vndf_sample(
    wo: Direction,
    kind: NdfKind,
    a3: RoughnessTriple,
    mix_ratio: f64,
    rng: &mut RandomStream,
) -> Result<(Direction, f64)> {
    Microsurface::new(kind, a3)?.sample_visible(wo, mix_ratio, rng)
}

pub(crate) fn check_mix(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("mix ratio must lie in [0, 1], got {r}")))
    }
}

/// Beckmann height-field projected area for `wo`, the normalizer of the
/// Beckmann visible-normal sampler.
#[inline]
pub(crate) fn beckmann_area(wo: Direction, a: &RoughnessTriple) -> f64 {
    projected_area_dir(wo, &a.height_field())
}

/// Mixture weight actually used: the Beckmann branch is dropped where its
/// visible distribution does not exist.
#[inline]
pub(crate) fn effective_mix(wo: Direction, a: &RoughnessTriple, r: f64) -> (f64, f64) {
    let sb = beckmann_area(wo, a);
    if sb < MIN_PROJECTED_AREA {
        (0.0, sb)
    } else {
        (r, sb)
    }
}

/// Density of the mixture at `wm`.
pub(crate) fn mixture_pdf(wm: Direction, wo: Direction, a: &RoughnessTriple, r: f64) -> f64 {
    let v = -wo;
    let cos = v.dot(wm);
    if cos <= 0.0 {
        return 0.0;
    }
    let (r, sb) = effective_mix(wo, a, r);
    let pb = if r > 0.0 { cos * beckmann_ndf(wm, a.ax, a.ay) / sb } else { 0.0 };
    r * pb + (1.0 - r) / (2.0 * PI)
}

pub(crate) fn sample_mixture(
    wo: Direction,
    a: &RoughnessTriple,
    r: f64,
    rng: &mut RandomStream,
) -> (Direction, f64) {
    let v = -wo;
    let (r_eff, _) = effective_mix(wo, a, r);
    let wm = if r_eff > 0.0 && rng.uniform() < r_eff {
        sample_beckmann_visible(v, a.ax, a.ay, rng).unwrap_or_else(|| sample_hemisphere(v, rng))
    } else {
        sample_hemisphere(v, rng)
    };
    (wm, mixture_pdf(wm, wo, a, r))
}

/// Uniform direction on the hemisphere around `v`.
pub(crate) fn sample_hemisphere(v: Direction, rng: &mut RandomStream) -> Direction {
    let z = rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.uniform();
    let local = Vec3::new(r * phi.cos(), r * phi.sin(), z);
    let f = build_frame(v);
    Direction::new_unchecked(f.to_world(local))
}

/// Samples a Beckmann normal m with density ⟨v, m⟩⁺ D(m)/σ, for any `v`
/// including ones below the horizon. Returns `None` only when no normal is
/// visible (v straight down after stretching).
///
/// In stretched slope space the visible density factors into
/// (c − p)⁺e^{−p²} along the stretched view azimuth (c = cot θ') and e^{−q²}
/// across it.
pub fn sample_beckmann_visible(v: Direction, ax: f64, ay: f64, rng: &mut RandomStream) -> Option<Direction> {
    let (sx, sy, sz) = (ax * v.x(), ay * v.y(), v.z());
    let rho = sx.hypot(sy);
    let (p, q, cos_phi, sin_phi);
    if rho < 1e-12 * sz.abs() {
        if sz < 0.0 {
            return None;
        }
        p = FRAC_1_SQRT_2 * rng.normal();
        q = FRAC_1_SQRT_2 * rng.normal();
        cos_phi = 1.0;
        sin_phi = 0.0;
    } else {
        let c = sz / rho;
        p = sample_visible_slope(c, rng);
        q = FRAC_1_SQRT_2 * rng.normal();
        cos_phi = sx / rho;
        sin_phi = sy / rho;
    }
    let u = cos_phi * p - sin_phi * q;
    let w = sin_phi * p + cos_phi * q;
    Vec3::new(-ax * u, -ay * w, 1.0).try_normalize()
}

/// Draws p from the density ∝ (c − p) e^{−p²} on p < c.
fn sample_visible_slope(c: f64, rng: &mut RandomStream) -> f64 {
    if c <= -2.0 {
        // u = c − p has density ∝ u e^{−2|c|u} e^{−u²}: Gamma(2) proposal,
        // exact rejection on the last factor
        let rate = -2.0 * c;
        loop {
            let u = -((1.0 - rng.uniform()) * (1.0 - rng.uniform())).ln() / rate;
            if rng.uniform() < (-u * u).exp() {
                return c - u;
            }
        }
    }
    let target = (rng.uniform().max(1e-300)).ln() + ln_slope_cdf(c, c);
    // bracket: lnF is increasing, −∞ at −∞
    let mut lo = c.min(0.0) - 1.0;
    while ln_slope_cdf(lo, c) > target {
        lo = 2.0 * lo - 1.0;
    }
    let mut hi = c;
    let mut p = 0.5 * (lo + hi);
    for _ in 0..100 {
        let h = ln_slope_cdf(p, c) - target;
        if h.abs() < 1e-15 {
            break;
        }
        if h > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        if hi - lo < 1e-14 * (1.0 + p.abs()) {
            break;
        }
        // d lnF/dp = (c − p) e^{−p²} / F
        let deriv = (c - p) * (-p * p - ln_slope_cdf(p, c)).exp();
        let newton = p - h / deriv;
        p = if deriv > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    p
}

/// ln ∫_{−∞}^p (c − t) e^{−t²} dt = ln[c(√π/2) erfc(−p) + ½e^{−p²}].
fn ln_slope_cdf(p: f64, c: f64) -> f64 {
    if p >= 0.0 {
        (c * 0.5 * SQRT_PI * erfc(-p) + 0.5 * (-p * p).exp()).ln()
    } else {
        -p * p + (c * 0.5 * SQRT_PI * erfcx(-p) + 0.5).ln()
    }
}
