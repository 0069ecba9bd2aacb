//! Synthesis of squared-exponential Gaussian-process realizations on a
//! periodic grid by spectral filtering of white noise.

use crate::error::{Error, Result};
use crate::math::{Point, RandomStream, Vec3};
use crate::ndf::KernelParams;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Mean function added to the zero-mean fluctuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpMean {
    /// μ(x) = z: a statistically planar surface through z = 0.
    Planar,
    ConstantZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub spacing: f64,
}

impl GridSpec {
    pub const MAX_DIM: usize = 192;

    /// Spacing min(l)/4 and an extent of 12·max(l) on every axis.
    pub fn auto(k: &KernelParams) -> Result<Self> {
        let spacing = k.min_length() / 4.0;
        let n = ((12.0 * k.max_length() / spacing).ceil() as usize).next_multiple_of(2);
        let g = GridSpec { dims: [n; 3], spacing };
        g.validate(k)?;
        Ok(g)
    }

    pub fn validate(&self, k: &KernelParams) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got {}", self.spacing)));
        }
        if self.spacing > k.min_length() / 4.0 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "grid spacing {} exceeds min(l)/4 = {}",
                self.spacing,
                k.min_length() / 4.0
            )));
        }
        for (axis, &n) in ["x", "y", "z"].iter().zip(&self.dims) {
            if n > Self::MAX_DIM {
                return Err(Error::Config(format!("grid {axis} size {n} exceeds the cap {}", Self::MAX_DIM)));
            }
            if (n as f64) * self.spacing < 8.0 * k.max_length() * (1.0 - 1e-12) {
                return Err(Error::Config(format!(
                    "grid {axis} extent {} is below 8·max(l) = {}",
                    n as f64 * self.spacing,
                    8.0 * k.max_length()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Vec3 {
        Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.spacing
    }
}

/// Precomputed spectrum and FFT plans for one (kernel, grid) pair; reusable
/// across realizations.
pub struct GpSynthesizer {
    kernel: KernelParams,
    grid: GridSpec,
    sqrt_eig: Vec<f64>,
    wavenumbers: [Vec<f64>; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for GpSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GpSynthesizer").field("kernel", &self.kernel).field("grid", &self.grid).finish()
    }
}

impl GpSynthesizer {
    pub fn new(kernel: KernelParams, grid: GridSpec) -> Result<Self> {
        grid.validate(&kernel)?;
        let mut planner = FftPlanner::new();
        let fwd = grid.dims.map(|n| planner.plan_fft_forward(n));
        let inv = grid.dims.map(|n| planner.plan_fft_inverse(n));
        let ls = [kernel.lx, kernel.ly, kernel.lz];

        // The SE kernel is separable, so the circulant eigenvalues are a
        // product of 1D transforms of the periodized axis kernels.
        let axis_eig: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let n = grid.dims[a];
                // Periodize by summing images rather than by minimum image: the
                // latter has a slope kink at half the period whose spectral
                // tail would dominate the field's derivatives.
                let period = n as f64 * grid.spacing;
                let mut c: Vec<Complex64> = (0..n)
                    .map(|m| {
                        let v = (-3..=3)
                            .map(|p| {
                                let d = (m as f64 * grid.spacing + p as f64 * period) / ls[a];
                                (-0.5 * d * d).exp()
                            })
                            .sum();
                        Complex64::new(v, 0.0)
                    })
                    .collect();
                fwd[a].process(&mut c);
                c.iter().map(|z| z.re).collect()
            })
            .collect();
        let [nx, ny, nz] = grid.dims;
        let var = kernel.sigma * kernel.sigma;
        let mut sqrt_eig = Vec::with_capacity(grid.len());
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let e = var * axis_eig[0][ix] * axis_eig[1][iy] * axis_eig[2][iz];
                    sqrt_eig.push(e.max(0.0).sqrt());
                }
            }
        }
        let wavenumbers = grid.dims.map(|n| {
            (0..n)
                .map(|m| {
                    let signed = if 2 * m < n {
                        m as f64
                    } else if 2 * m == n {
                        0.0 // Nyquist: keeps derivative spectra Hermitian
                    } else {
                        m as f64 - n as f64
                    };
                    2.0 * PI * signed / (n as f64 * grid.spacing)
                })
                .collect()
        });
        Ok(GpSynthesizer { kernel, grid, sqrt_eig, wavenumbers, fwd, inv })
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn realize(&self, mean: GpMean, rng: &mut RandomStream) -> GpRealization {
        let n = self.grid.len();
        let [nx, ny, _] = self.grid.dims;
        let mut a: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.normal(), 0.0)).collect();
        fft3(&mut a, self.grid.dims, &self.fwd);
        let scale = 1.0 / n as f64;
        for (z, s) in a.iter_mut().zip(&self.sqrt_eig) {
            *z *= s * scale;
        }
        // Two real fields per inverse transform: (f, ∂x f) and (∂y f, ∂z f).
        let mut b1 = a.clone();
        let mut b2 = a;
        let [kx, ky, kz] = &self.wavenumbers;
        for (idx, (p, q)) in b1.iter_mut().zip(b2.iter_mut()).enumerate() {
            let (ix, iy, iz) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
            let v = *p;
            *p = v * (1.0 - kx[ix]);
            *q = v * Complex64::new(-kz[iz], ky[iy]);
        }
        fft3(&mut b1, self.grid.dims, &self.inv);
        fft3(&mut b2, self.grid.dims, &self.inv);
        let values: Vec<f64> = b1.iter().map(|z| z.re).collect();
        let gradients: Vec<[f64; 3]> = b1.iter().zip(&b2).map(|(p, q)| [p.im, q.re, q.im]).collect();
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ext = self.grid.extent();
        GpRealization {
            values,
            gradients,
            dims: self.grid.dims,
            spacing: self.grid.spacing,
            origin: ext * -0.5,
            kernel: self.kernel,
            mean,
            noise_bound: bound,
        }
    }
}

fn fft3(data: &mut [Complex64], dims: [usize; 3], plans: &[Arc<dyn Fft<f64>>; 3]) {
    let [nx, ny, nz] = dims;
    plans[0].process(data);
    let mut line = vec![Complex64::default(); ny.max(nz)];
    for iz in 0..nz {
        for ix in 0..nx {
            for iy in 0..ny {
                line[iy] = data[(iz * ny + iy) * nx + ix];
            }
            plans[1].process(&mut line[..ny]);
            for iy in 0..ny {
                data[(iz * ny + iy) * nx + ix] = line[iy];
            }
        }
    }
    for iy in 0..ny {
        for ix in 0..nx {
            for iz in 0..nz {
                line[iz] = data[(iz * ny + iy) * nx + ix];
            }
            plans[2].process(&mut line[..nz]);
            for iz in 0..nz {
                data[(iz * ny + iy) * nx + ix] = line[iz];
            }
        }
    }
}

/// One sample function f = μ + n of the process. The fluctuation n is
/// periodic with the grid, so the field is defined everywhere.
#[derive(Debug, Clone)]
pub struct GpRealization {
    values: Vec<f64>,
    gradients: Vec<[f64; 3]>,
    pub dims: [usize; 3],
    pub spacing: f64,
    pub origin: Point,
    pub kernel: KernelParams,
    pub mean: GpMean,
    noise_bound: f64,
}

impl GpRealization {
    /// max |n| over the grid; trilinear interpolation never exceeds it.
    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    /// Grid samples of the zero-mean fluctuation, x fastest.
    pub fn grid_values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn mean_at(&self, p: Point) -> f64 {
        match self.mean {
            GpMean::Planar => p.z,
            GpMean::ConstantZero => 0.0,
        }
    }

    /// Trilinear cell lookup: eight corner indices and weights.
    #[inline]
    fn cell(&self, p: Point) -> ([usize; 8], [f64; 8]) {
        let q = (p - self.origin) / self.spacing;
        let mut i0 = [0usize; 3];
        let mut i1 = [0usize; 3];
        let mut fr = [0.0; 3];
        for a in 0..3 {
            let n = self.dims[a];
            let c = q[a].rem_euclid(n as f64);
            let fl = c.floor();
            let i = (fl as usize).min(n - 1);
            i0[a] = i;
            i1[a] = if i + 1 == n { 0 } else { i + 1 };
            fr[a] = c - fl;
        }
        let [nx, ny, _] = self.dims;
        let idx = |x: usize, y: usize, z: usize| (z * ny + y) * nx + x;
        let (fx, fy, fz) = (fr[0], fr[1], fr[2]);
        (
            [
                idx(i0[0], i0[1], i0[2]),
                idx(i1[0], i0[1], i0[2]),
                idx(i0[0], i1[1], i0[2]),
                idx(i1[0], i1[1], i0[2]),
                idx(i0[0], i0[1], i1[2]),
                idx(i1[0], i0[1], i1[2]),
                idx(i0[0], i1[1], i1[2]),
                idx(i1[0], i1[1], i1[2]),
            ],
            [
                (1.0 - fx) * (1.0 - fy) * (1.0 - fz),
                fx * (1.0 - fy) * (1.0 - fz),
                (1.0 - fx) * fy * (1.0 - fz),
                fx * fy * (1.0 - fz),
                (1.0 - fx) * (1.0 - fy) * fz,
                fx * (1.0 - fy) * fz,
                (1.0 - fx) * fy * fz,
                fx * fy * fz,
            ],
        )
    }

    /// Zero-mean fluctuation at `p` (trilinear).
    pub fn noise(&self, p: Point) -> f64 {
        let (ix, w) = self.cell(p);
        ix.iter().zip(&w).map(|(&i, &w)| w * self.values[i]).sum()
    }

    /// Field value f(p) = μ(p) + n(p).
    pub fn value(&self, p: Point) -> f64 {
        self.mean_at(p) + self.noise(p)
    }

    /// ∇f at `p`, interpolated from spectrally exact derivative grids.
    pub fn gradient(&self, p: Point) -> Vec3 {
        let (ix, w) = self.cell(p);
        let mut g = [0.0; 3];
        for (&i, &w) in ix.iter().zip(&w) {
            for a in 0..3 {
                g[a] += w * self.gradients[i][a];
            }
        }
        let dz = if self.mean == GpMean::Planar { 1.0 } else { 0.0 };
        Vec3::new(g[0], g[1], g[2] + dz)
    }
}

/// One realization drawn with a fresh synthesizer.
pub fn realize_gp(kernel: KernelParams, mean: GpMean, grid: GridSpec, rng: &mut RandomStream) -> Result<GpRealization> {
    Ok(GpSynthesizer::new(kernel, grid)?.realize(mean, rng))
}
