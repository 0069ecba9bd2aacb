//! Error functions and Gaussian densities.
//!
//! `erf`/`erfc` are the fdlibm algorithms (via `libm`), accurate to about one
//! ulp. `erfcx` and the log-CDF are built on top of them so that tails stay
//! accurate in relative terms.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfcx(-y) = 2 e^{y²} - erfcx(y)
        let y = -x;
        if y > 26.6 {
            return f64::INFINITY;
        }
        return 2.0 * exp_square(y) - erfcx(y);
    }
    if x < 26.0 {
        return exp_square(x) * erfc(x);
    }
    // Asymptotic series; the terms shrink by (2k-1)/(2x²) < 1/1000 here.
    let inv2x2 = 0.5 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum * FRAC_1_SQRT_PI / x
}

/// `exp(x²)` with the square split so the rounding of `x*x` does not get
/// amplified by the exponential.
#[inline]
fn exp_square(x: f64) -> f64 {
    let hi = (x * 134_217_729.0) - ((x * 134_217_729.0) - x); // Dekker split
    let lo = x - hi;
    (hi * hi).exp() * (2.0 * hi * lo + lo * lo).exp()
}

fn check_var(var: f64) -> Result<()> {
    if var > 0.0 && var.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("variance must be positive and finite, got {var}")))
    }
}

/// Gaussian probability density φ(x; μ, σ²).
pub fn gauss_pdf(x: f64, mu: f64, var: f64) -> Result<f64> {
    check_var(var)?;
    let d = x - mu;
    Ok((-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt())
}

/// Gaussian cumulative distribution Φ(x; μ, σ²), evaluated through `erfc`.
pub fn gauss_cdf(x: f64, mu: f64, var: f64) -> Result<f64> {
    check_var(var)?;
    Ok(0.5 * erfc(-(x - mu) / (2.0 * var).sqrt()))
}

/// ln Φ(x; μ, σ²), finite far into the lower tail.
pub fn ln_gauss_cdf(x: f64, mu: f64, var: f64) -> Result<f64> {
    check_var(var)?;
    let z = -(x - mu) / (2.0 * var).sqrt();
    if z < 1.0 {
        Ok((0.5 * erfc(z)).ln())
    } else {
        Ok((0.5 * erfcx(z)).ln() - z * z)
    }
}
