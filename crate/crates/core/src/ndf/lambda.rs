//! Smith Λ and the projected blocker area σ(ω) = Λ(ω)·cosθ.
//!
//! A direction ω is the propagation direction of a ray; blockers are the
//! normals with (−ω)·ω_m > 0. With g ~ N(e_z, diag(α²)/2) the SDF gradient,
//! σ(ω) = E[max(0, −ω·g)], which is where the closed forms below come from.

use super::kernel::RoughnessTriple;
use crate::error::{Error, Result};
use crate::math::special::{erf, erfc, erfcx, FRAC_1_SQRT_PI};
use crate::math::{Direction, SphericalAngles};

/// Spread of ω·g around its mean, times √2: √(αx²x² + αy²y² + αz²z²).
#[inline]
pub(crate) fn slope_spread(w: Direction, a: &RoughnessTriple) -> f64 {
    let (x, y, z) = (w.x() * a.ax, w.y() * a.ay, w.z() * a.az);
    (x * x + y * y + z * z).sqrt()
}

/// Λ as a function of a = cosθ/spread.
pub fn lambda_of_a(a: f64) -> f64 {
    if a < 0.0 {
        // written through the reflection identity so Λ(a) + Λ(−a) = −1 holds
        // to rounding even near the horizon, where |Λ| is huge
        -1.0 - lambda_of_a(-a)
    } else if a > 8.0 {
        // e^{-a²}/(2a√π) − erfc(a)/2 = e^{-a²}/(2a√π) · Σ_{k≥1} (−1)^{k+1} (2k−1)!!/(2a²)^k
        let r = 0.5 / (a * a);
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..40 {
            term *= -((2 * k - 1) as f64) * r;
            sum -= term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        (-a * a).exp() * 0.5 * FRAC_1_SQRT_PI / a * sum
    } else {
        (-a * a).exp() * 0.5 * (FRAC_1_SQRT_PI / a - erfcx(a))
    }
}

/// Generalized Smith Λ. Singular for horizontal directions: |a| < 1e-9 is a
/// [`Error::GrazingSingularity`]; use [`projected_area`] there.
pub fn generalized_lambda(w: SphericalAngles, a3: RoughnessTriple) -> Result<f64> {
    generalized_lambda_dir(w.direction(), &a3)
}

pub fn generalized_lambda_dir(w: Direction, a3: &RoughnessTriple) -> Result<f64> {
    let s = slope_spread(w, a3);
    if s == 0.0 {
        // vertical with az = 0: a = ±∞
        return Ok(if w.z() > 0.0 { 0.0 } else { -1.0 });
    }
    let a = w.z() / s;
    if a.abs() < 1e-9 {
        return Err(Error::GrazingSingularity { a });
    }
    Ok(lambda_of_a(a))
}

/// Classic anisotropic Beckmann Smith Λ for a height field, a = 1/(α_φ tanθ).
pub fn beckmann_lambda(w: Direction, ax: f64, ay: f64) -> f64 {
    let st2 = w.x() * w.x() + w.y() * w.y();
    if st2 == 0.0 {
        return if w.z() > 0.0 { 0.0 } else { -1.0 };
    }
    let alpha = ((w.x() * w.x() * ax * ax + w.y() * w.y() * ay * ay) / st2).sqrt();
    let a = w.z() / (alpha * st2.sqrt());
    lambda_of_a(a)
}

/// σ(ω) = Λ(ω)cosθ, finite and continuous everywhere including grazing.
pub fn projected_area(w: SphericalAngles, a3: RoughnessTriple) -> f64 {
    projected_area_dir(w.direction(), &a3)
}

pub fn projected_area_dir(w: Direction, a3: &RoughnessTriple) -> f64 {
    let s = slope_spread(w, a3);
    let z = w.z();
    if s == 0.0 {
        return (-z).max(0.0);
    }
    let a = z / s;
    let gauss = (-a * a).exp() * 0.5 * FRAC_1_SQRT_PI * s;
    if a < 0.0 {
        gauss - 0.5 * z * (1.0 + erf(-a))
    } else if a < 1e-3 {
        gauss - 0.5 * z * erfc(a)
    } else {
        z * lambda_of_a(a)
    }
}

/// GGX (Trowbridge–Reitz) Smith Λ, extended to downward directions through
/// Λ(−ω) = −1 − Λ(ω).
pub fn ggx_lambda(w: Direction, ax: f64, ay: f64) -> Result<f64> {
    let z = w.z();
    if z.abs() < 1e-12 {
        return Err(Error::GrazingSingularity { a: z });
    }
    Ok(ggx_projected_area(w, ax, ay) / z)
}

/// GGX projected area (√(z² + s²) − z)/2 with s = √(αx²x² + αy²y²).
pub fn ggx_projected_area(w: Direction, ax: f64, ay: f64) -> f64 {
    let (x, y, z) = (w.x() * ax, w.y() * ay, w.z());
    let s2 = x * x + y * y;
    let r = (z * z + s2).sqrt();
    if z > 0.0 {
        // (r − z)/2 without cancellation
        0.5 * s2 / (r + z)
    } else {
        0.5 * (r - z)
    }
}
