use crate::error::{Error, Result};
use std::f64::consts::SQRT_2;

/// Statistics of the squared-exponential Gaussian process: SDF standard
/// deviation and per-axis correlation lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub sigma: f64,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl KernelParams {
    pub fn new(sigma: f64, lx: f64, ly: f64, lz: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("lx", lx), ("ly", ly), ("lz", lz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("kernel {name} must be positive and finite, got {v}")));
            }
        }
        Ok(KernelParams { sigma, lx, ly, lz })
    }

    pub fn isotropic(sigma: f64, l: f64) -> Result<Self> {
        Self::new(sigma, l, l, l)
    }

    /// Kernel with the given roughness triple at SDF deviation `sigma`.
    /// Requires `az > 0` (a finite vertical correlation).
    pub fn from_roughness(sigma: f64, a: RoughnessTriple) -> Result<Self> {
        if a.az <= 0.0 {
            return Err(Error::Domain("az = 0 has no finite correlation length".into()));
        }
        Self::new(sigma, SQRT_2 * sigma / a.ax, SQRT_2 * sigma / a.ay, SQRT_2 * sigma / a.az)
    }

    pub fn min_length(&self) -> f64 {
        self.lx.min(self.ly).min(self.lz)
    }

    pub fn max_length(&self) -> f64 {
        self.lx.max(self.ly).max(self.lz)
    }

    /// κ(d) = σ² exp(−½ Σ dᵢ²/lᵢ²).
    pub fn covariance(&self, dx: f64, dy: f64, dz: f64) -> f64 {
        let q = (dx / self.lx).powi(2) + (dy / self.ly).powi(2) + (dz / self.lz).powi(2);
        self.sigma * self.sigma * (-0.5 * q).exp()
    }
}

/// Roughness along each axis. `az == 0` is the height-field limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessTriple {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl RoughnessTriple {
    pub fn new(ax: f64, ay: f64, az: f64) -> Result<Self> {
        if !(ax > 0.0 && ax.is_finite() && ay > 0.0 && ay.is_finite()) {
            return Err(Error::Domain(format!("ax, ay must be positive and finite, got ({ax}, {ay})")));
        }
        if !(az >= 0.0 && az.is_finite()) {
            return Err(Error::Domain(format!("az must be non-negative and finite, got {az}")));
        }
        Ok(RoughnessTriple { ax, ay, az })
    }

    pub fn isotropic(a: f64) -> Result<Self> {
        Self::new(a, a, a)
    }

    pub fn height_field(self) -> Self {
        RoughnessTriple { az: 0.0, ..self }
    }
}

/// α = √2·σ/l on each axis.
pub fn roughness_from_kernel(k: &KernelParams) -> RoughnessTriple {
    RoughnessTriple {
        ax: SQRT_2 * k.sigma / k.lx,
        ay: SQRT_2 * k.sigma / k.ly,
        az: SQRT_2 * k.sigma / k.lz,
    }
}
