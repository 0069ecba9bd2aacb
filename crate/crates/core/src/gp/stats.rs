//! Monte Carlo statistics over many realizations: transmittance, visible
//! normals, ensemble radiance and the multiplicativity gap.
//!
//! Each realization carries many rays at random lateral offsets. Rays inside
//! one realization are correlated, so standard errors treat realizations as
//! clusters (ratio estimators with per-realization totals).

use super::ray::{first_hit, mirror};
use super::{GpMean, GpRealization, GpSynthesizer, GridSpec};
use crate::error::{Error, Result};
use crate::math::quadrature::GaussLegendre;
use crate::math::{Direction, Point, RandomStream, Rgb, SphericalAngles, Vec3};
use crate::medium::Fresnel;
use crate::ndf::KernelParams;
use crate::render::{ImageMeta, RadianceImage};
use crate::scene::{Camera, Environment};
use rayon::prelude::*;
use std::f64::consts::PI;

pub const MAX_REALIZATIONS: usize = 4096;
pub const MAX_ENSEMBLE_PIXELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub realizations: usize,
    pub rays_per_realization: usize,
    pub seed: u64,
    /// Defaults to [`GridSpec::auto`].
    pub grid: Option<GridSpec>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { realizations: 256, rays_per_realization: 64, seed: 0, grid: None }
    }
}

impl OracleOptions {
    fn synthesizer(&self, kernel: KernelParams, min_realizations: usize) -> Result<GpSynthesizer> {
        if self.realizations < min_realizations || self.realizations > MAX_REALIZATIONS {
            return Err(Error::Config(format!(
                "realizations must lie in [{min_realizations}, {MAX_REALIZATIONS}], got {}",
                self.realizations
            )));
        }
        if self.rays_per_realization == 0 {
            return Err(Error::Config("rays per realization must be positive".into()));
        }
        let grid = match self.grid {
            Some(g) => g,
            None => GridSpec::auto(&kernel)?,
        };
        GpSynthesizer::new(kernel, grid)
    }

    /// Runs `work` on every realization (in parallel) and returns the results
    /// in realization order.
    fn map_realizations<T: Send>(
        &self,
        syn: &GpSynthesizer,
        mean: GpMean,
        work: impl Fn(&GpRealization, &mut RandomStream) -> T + Sync,
    ) -> Vec<T> {
        (0..self.realizations as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = RandomStream::new(self.seed, r);
                let real = syn.realize(mean, &mut rng);
                work(&real, &mut rng)
            })
            .collect()
    }
}

fn lateral_origin(r: &GpRealization, z: f64, rng: &mut RandomStream) -> Point {
    let ext = Vec3::new(r.dims[0] as f64, r.dims[1] as f64, 0.0) * r.spacing;
    Vec3::new(r.origin.x + ext.x * rng.uniform(), r.origin.y + ext.y * rng.uniform(), z)
}

fn ray_limit(k: &KernelParams) -> f64 {
    1e3 * k.max_length().max(k.sigma)
}

/// Ratio Σnum/Σden over clusters, with its delta-method standard error.
fn cluster_ratio(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let (sn, sd, m) = pairs.clone().fold((0.0, 0.0, 0.0), |(a, b, c), (n, d)| (a + n, b + d, c + 1.0));
    if sd == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = sn / sd;
    let ss: f64 = pairs.map(|(n, d)| (n - r * d).powi(2)).sum();
    let se = if m > 1.0 { (m / (m - 1.0) * ss).sqrt() / sd } else { f64::NAN };
    (r, se)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmittanceRow {
    pub t: f64,
    pub tr: f64,
    pub std_error: f64,
}

/// Probability that a ray started at height `z0` in direction `w` travels
/// beyond `t` before its first crossing, over rays that start outside the
/// realized surface (f > 0), for a planar-mean process.
pub fn empirical_transmittance(
    kernel: KernelParams,
    z0: f64,
    w: SphericalAngles,
    t_grid: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<TransmittanceRow>> {
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain("transmittance distances must be finite and non-negative".into()));
    }
    let syn = opts.synthesizer(kernel, 64)?;
    let d = w.direction();
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let per = opts.map_realizations(&syn, GpMean::Planar, |r, rng| {
        let mut den = 0.0;
        let mut num = vec![0.0; t_grid.len()];
        for _ in 0..opts.rays_per_realization {
            let o = lateral_origin(r, z0, rng);
            if r.value(o) < 0.0 {
                continue;
            }
            den += 1.0;
            let h = first_hit(r, o, d, t_max);
            let travel = if h.hit { h.travel } else { f64::INFINITY };
            for (n, &t) in num.iter_mut().zip(t_grid) {
                if travel > t {
                    *n += 1.0;
                }
            }
        }
        (den, num)
    });
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (tr, se) = cluster_ratio(per.iter().map(|(den, num)| (num[j], *den)));
            TransmittanceRow { t, tr, std_error: se }
        })
        .collect())
}

/// Equal-area binning of the sphere: uniform in cos θ (from +1 down) and φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereBins {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereBins {
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solid_angle(&self) -> f64 {
        4.0 * PI / self.len() as f64
    }

    pub fn index(&self, d: Direction) -> usize {
        let a = d.to_angles();
        let i = (((1.0 - d.z()) * 0.5 * self.n_theta as f64) as usize).min(self.n_theta - 1);
        let j = ((a.phi / (2.0 * PI) * self.n_phi as f64) as usize).min(self.n_phi - 1);
        i * self.n_phi + j
    }

    /// (cos θ range, φ range) of bin `b`, each as (lo, hi).
    pub fn bounds(&self, b: usize) -> ((f64, f64), (f64, f64)) {
        let (i, j) = (b / self.n_phi, b % self.n_phi);
        let du = 2.0 / self.n_theta as f64;
        let dp = 2.0 * PI / self.n_phi as f64;
        ((1.0 - (i + 1) as f64 * du, 1.0 - i as f64 * du), (j as f64 * dp, (j + 1) as f64 * dp))
    }

    /// Mean of `f` over bin `b` by a tensor Gauss–Legendre rule in (cos θ, φ).
    pub fn bin_average(&self, b: usize, f: &impl Fn(Direction) -> f64) -> f64 {
        let gl = GaussLegendre::new(8);
        let ((u0, u1), (p0, p1)) = self.bounds(b);
        let s = gl.integrate(u0, u1, |u| {
            gl.integrate(p0, p1, |phi| {
                let st = (1.0 - u * u).max(0.0).sqrt();
                f(Direction::new_unchecked(Vec3::new(st * phi.cos(), st * phi.sin(), u)))
            })
        });
        s / ((u1 - u0) * (p1 - p0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VndfHistogram {
    pub bins: SphereBins,
    pub wo: Direction,
    /// Density per steradian of first-hit normals, one entry per bin.
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    pub hits: usize,
    pub rays: usize,
}

impl VndfHistogram {
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bins.solid_angle()
    }

    /// ∫|ĥ − f| over the sphere, with `f` averaged over each bin.
    pub fn l1_distance(&self, f: impl Fn(Direction) -> f64) -> f64 {
        let omega = self.bins.solid_angle();
        (0..self.bins.len()).map(|b| (self.density[b] - self.bins.bin_average(b, &f)).abs() * omega).sum()
    }
}

/// Histograms of first-hit normals for parallel rays arriving from above in
/// each direction of `wos` (propagation directions, pointing down). Every
/// realization serves all directions.
///
/// Parallel rays already meet each normal in proportion to its projected
/// area, so hits are counted without extra weighting.
pub fn empirical_vndf(
    kernel: KernelParams,
    wos: &[Direction],
    bins: SphereBins,
    opts: &OracleOptions,
) -> Result<Vec<VndfHistogram>> {
    if bins.is_empty() {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if let Some(w) = wos.iter().find(|w| w.z() >= 0.0) {
        return Err(Error::Domain(format!("incident direction must point down, got {w:?}")));
    }
    let syn = opts.synthesizer(kernel, 1)?;
    let t_max = ray_limit(&kernel);
    let per = opts.map_realizations(&syn, GpMean::Planar, |r, rng| {
        let z_start = r.noise_bound() + 0.5 * kernel.sigma;
        wos.iter()
            .map(|&wo| {
                let mut counts = vec![0.0; bins.len()];
                let mut hits = 0.0;
                for _ in 0..opts.rays_per_realization {
                    let o = lateral_origin(r, z_start, rng);
                    let h = first_hit(r, o, wo, t_max);
                    if h.hit {
                        counts[bins.index(h.normal)] += 1.0;
                        hits += 1.0;
                    }
                }
                (hits, counts)
            })
            .collect::<Vec<_>>()
    });
    let omega = bins.solid_angle();
    Ok(wos
        .iter()
        .enumerate()
        .map(|(k, &wo)| {
            let mut density = vec![0.0; bins.len()];
            let mut std_error = vec![0.0; bins.len()];
            for b in 0..bins.len() {
                let (p, se) = cluster_ratio(per.iter().map(|v| (v[k].1[b], v[k].0)));
                density[b] = p / omega;
                std_error[b] = se / omega;
            }
            let hits = per.iter().map(|v| v[k].0).sum::<f64>() as usize;
            VndfHistogram {
                bins,
                wo,
                density,
                std_error,
                hits,
                rays: opts.realizations * opts.rays_per_realization,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativityProbe {
    pub tr_xy: f64,
    pub tr_xz: f64,
    pub tr_zy: f64,
    /// |Tr(x→y) − Tr(x→z)·Tr(z→y)|
    pub gap: f64,
    pub std_error: f64,
}

/// Transmittances over x→y, x→z and z→y for rays x + t·w with z at
/// `t_split` and y at `t_end`, all on shared realizations. Each leg is
/// conditioned on its own start point lying outside the surface.
pub fn multiplicativity_probe(
    kernel: KernelParams,
    z0: f64,
    w: SphericalAngles,
    t_split: f64,
    t_end: f64,
    opts: &OracleOptions,
) -> Result<MultiplicativityProbe> {
    if !(t_split > 0.0 && t_end > t_split && t_end.is_finite()) {
        return Err(Error::Domain(format!("need 0 < split < end, got {t_split}, {t_end}")));
    }
    let syn = opts.synthesizer(kernel, 256)?;
    let d = w.direction();
    // per realization: [n_x, clear_xy, clear_xz, n_z, clear_zy]
    let per = opts.map_realizations(&syn, GpMean::Planar, |r, rng| {
        let mut c = [0.0; 5];
        for _ in 0..opts.rays_per_realization {
            let x = lateral_origin(r, z0, rng);
            if r.value(x) >= 0.0 {
                c[0] += 1.0;
                let h = first_hit(r, x, d, t_end);
                let travel = if h.hit { h.travel } else { f64::INFINITY };
                c[1] += (travel > t_end) as u8 as f64;
                c[2] += (travel > t_split) as u8 as f64;
            }
            let z = x + d.vec() * t_split;
            if r.value(z) >= 0.0 {
                c[3] += 1.0;
                let h = first_hit(r, z, d, t_end - t_split);
                c[4] += (!h.hit) as u8 as f64;
            }
        }
        c
    });
    let tot = per.iter().fold([0.0; 5], |mut a, c| {
        for i in 0..5 {
            a[i] += c[i];
        }
        a
    });
    if tot[0] == 0.0 || tot[3] == 0.0 {
        return Err(Error::NumericFailure("no ray started outside the surface".into()));
    }
    let a = tot[1] / tot[0];
    let b = tot[2] / tot[0];
    let c = tot[4] / tot[3];
    let g = a - b * c;
    // influence of each realization on a − b·c
    let m = per.len() as f64;
    let ss: f64 = per
        .iter()
        .map(|p| {
            let ia = (p[1] - a * p[0]) / tot[0];
            let ib = (p[2] - b * p[0]) / tot[0];
            let ic = (p[4] - c * p[3]) / tot[3];
            (ia - c * ib - b * ic).powi(2)
        })
        .sum();
    Ok(MultiplicativityProbe {
        tr_xy: a,
        tr_xz: b,
        tr_zy: c,
        gap: g.abs(),
        std_error: (m / (m - 1.0) * ss).sqrt(),
    })
}

/// Small scene over a statistically planar GPIS patch at z = 0: mirror
/// reflection off the realized surface with a conductor Fresnel term.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleScene {
    pub camera: Camera,
    pub environment: Environment,
    pub fresnel: Fresnel,
    pub max_bounces: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleImage {
    pub image: RadianceImage,
    /// Standard error of each pixel mean across realizations.
    pub std_error: Vec<Rgb>,
}

/// Radiance along one ray through a single realization, following specular
/// bounces until escape. Paths longer than `max_bounces` contribute zero, as
/// do rays that start below the surface.
pub fn realization_radiance(
    r: &GpRealization,
    origin: Point,
    dir: Direction,
    fresnel: &Fresnel,
    env: &Environment,
    max_bounces: usize,
) -> Rgb {
    let t_max = ray_limit(&r.kernel);
    let eps = 1e-6 * r.kernel.min_length();
    let (mut o, mut d) = (origin, dir);
    let mut beta = Rgb::WHITE;
    for bounce in 0..=max_bounces {
        let h = first_hit(r, o, d, t_max);
        if !h.hit {
            return beta * env.radiance(d);
        }
        let cos = -d.dot(h.normal);
        if bounce == max_bounces || cos <= 0.0 {
            return Rgb::BLACK;
        }
        beta *= fresnel.eval(cos);
        d = mirror(d, h.normal);
        // step off the surface until the start point is clearly outside
        let mut off = eps;
        o = h.position + h.normal.vec() * off;
        while r.value(o) <= 0.0 && off < 1e-2 * r.kernel.min_length() {
            off *= 10.0;
            o = h.position + h.normal.vec() * off;
        }
    }
    Rgb::BLACK
}

/// Per-pixel mean over realizations of the per-realization radiance, each
/// realization rendered with `spp` jittered samples per pixel.
pub fn ensemble_radiance(
    kernel: KernelParams,
    scene: &EnsembleScene,
    spp: usize,
    opts: &OracleOptions,
) -> Result<EnsembleImage> {
    scene.camera.validate()?;
    let (w, h) = (scene.camera.width, scene.camera.height);
    if w > MAX_ENSEMBLE_PIXELS || h > MAX_ENSEMBLE_PIXELS {
        return Err(Error::Config(format!("ensemble images are capped at {MAX_ENSEMBLE_PIXELS}² pixels, got {w}×{h}")));
    }
    if spp == 0 || scene.max_bounces == 0 {
        return Err(Error::Config("spp and max_bounces must be positive".into()));
    }
    let syn = opts.synthesizer(kernel, 2)?;
    let mut sum = vec![Rgb::BLACK; w * h];
    let mut sum2 = vec![Rgb::BLACK; w * h];
    // bounded memory: realizations in ordered chunks
    let chunk = 32;
    for start in (0..opts.realizations).step_by(chunk) {
        let end = (start + chunk).min(opts.realizations);
        let images: Vec<Vec<Rgb>> = (start as u64..end as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = RandomStream::new(opts.seed, r);
                let real = syn.realize(GpMean::Planar, &mut rng);
                (0..w * h)
                    .map(|idx| {
                        let (x, y) = (idx % w, idx / w);
                        let mut acc = Rgb::BLACK;
                        for _ in 0..spp {
                            let (o, d) = scene.camera.ray(x as f64 + rng.uniform(), y as f64 + rng.uniform());
                            acc += realization_radiance(&real, o, d, &scene.fresnel, &scene.environment, scene.max_bounces);
                        }
                        acc / spp as f64
                    })
                    .collect()
            })
            .collect();
        for img in images {
            for (i, p) in img.into_iter().enumerate() {
                sum[i] += p;
                sum2[i] += p * p;
            }
        }
    }
    let m = opts.realizations as f64;
    let pixels: Vec<Rgb> = sum.iter().map(|s| *s / m).collect();
    let std_error = pixels
        .iter()
        .zip(&sum2)
        .map(|(mean, s2)| {
            let var = (*s2 / m - *mean * *mean).map(|v| v.max(0.0)) * (m / (m - 1.0));
            (var / m).map(f64::sqrt)
        })
        .collect();
    Ok(EnsembleImage {
        image: RadianceImage {
            width: w,
            height: h,
            pixels,
            meta: ImageMeta { seed: opts.seed, spp, scene_hash: String::new() },
        },
        std_error,
    })
}
