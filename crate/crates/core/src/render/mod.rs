//! A small deterministic volumetric path tracer for shell scenes.

mod image;

pub use image::{decode_pfm, encode_pfm, encode_ppm, read_pfm, write_image, ImageFormat};

use crate::error::{Error, Result};
use crate::math::{Direction, Point, RandomStream, Rgb};
use crate::medium::{delta_track, phase_eval, phase_sample, ratio_transmittance, MediumEventKind};
use crate::scene::ShellScene;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// Scattering events after which Russian roulette starts.
pub const ROULETTE_START: usize = 8;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageMeta {
    pub seed: u64,
    pub spp: usize,
    pub scene_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadianceImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top.
    pub pixels: Vec<Rgb>,
    pub meta: ImageMeta,
}

impl RadianceImage {
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> Rgb {
        let s = self.pixels.iter().fold(Rgb::BLACK, |a, &p| a + p);
        s / self.pixels.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub spp: usize,
    pub seed: u64,
    pub max_bounces: usize,
    /// Worker count; `None` lets the thread pool decide.
    pub threads: Option<usize>,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings { spp: 16, seed: 0, max_bounces: 64, threads: None }
    }
}

/// Radiance arriving at `origin` from direction −`dir`, estimated with delta
/// tracking, next-event estimation towards the sun and phase sampling.
/// `max_bounces` caps the number of real scattering events.
pub fn trace_path(
    origin: Point,
    dir: Direction,
    scene: &ShellScene,
    max_bounces: usize,
    rng: &mut RandomStream,
) -> Result<Rgb> {
    if max_bounces == 0 {
        return Err(Error::Domain("max_bounces must be at least 1".into()));
    }
    let mut radiance = Rgb::BLACK;
    let mut beta = Rgb::WHITE;
    let (mut p, mut d) = (origin, dir);
    let mut bounces = 0;
    loop {
        let ev = delta_track(&scene.objects, p, d, f64::INFINITY, rng)?;
        match ev.kind {
            MediumEventKind::Escaped => {
                radiance += beta * scene.environment.radiance(d);
                break;
            }
            MediumEventKind::Absorbed | MediumEventKind::NullScatter => break,
            MediumEventKind::RealScatter => {}
        }
        bounces += 1;
        if bounces > max_bounces {
            break;
        }
        let obj = ev.object.expect("real collisions carry their object");
        let medium = &scene.objects[obj].medium;
        let frame = ev.local_frame;

        if let Some(sun) = scene.sun {
            let f = phase_eval(d, sun.direction, medium, &frame);
            if !f.is_black() {
                let tr = ratio_transmittance(&scene.objects, ev.position, sun.direction, f64::INFINITY, rng)?;
                radiance += beta * f * sun.irradiance * tr;
            }
        }

        let s = phase_sample(d, medium, &frame, rng)?;
        if s.pdf <= 0.0 || s.weight.is_black() {
            break;
        }
        beta *= s.weight;
        if bounces >= ROULETTE_START {
            let q = beta.max_component().min(1.0);
            if rng.uniform() >= q {
                break;
            }
            beta = beta / q;
        }
        p = ev.position;
        d = s.wi;
    }
    Ok(radiance)
}

pub fn scene_hash(scene: &ShellScene) -> String {
    let digest = Sha256::digest(format!("{scene:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders every pixel with its own random stream (stream id = pixel index),
/// so the result does not depend on scheduling or thread count.
pub fn render(scene: &ShellScene, settings: &RenderSettings) -> Result<RadianceImage> {
    if settings.spp == 0 {
        return Err(Error::Domain("spp must be at least 1".into()));
    }
    let (w, h) = (scene.camera.width, scene.camera.height);
    let work = || -> Result<Vec<Rgb>> {
        (0..w * h)
            .into_par_iter()
            .map(|idx| {
                let (x, y) = (idx % w, idx / w);
                let mut rng = RandomStream::new(settings.seed, idx as u64);
                let mut sum = Rgb::BLACK;
                for _ in 0..settings.spp {
                    let (o, d) = scene.camera_ray(x, y, &mut rng);
                    sum += trace_path(o, d, scene, settings.max_bounces, &mut rng)?;
                }
                let px = sum / settings.spp as f64;
                if !px.is_valid() {
                    return Err(Error::NumericFailure(format!("pixel ({x}, {y}) is not finite and non-negative: {px:?}")));
                }
                Ok(px)
            })
            .collect()
    };
    let pixels = match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(RadianceImage {
        width: w,
        height: h,
        pixels,
        meta: ImageMeta { seed: settings.seed, spp: settings.spp, scene_hash: scene_hash(scene) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quadrature::adaptive_gauss_legendre;
    use crate::math::{Frame, SphericalAngles, Vec3};
    use crate::medium::{planar_transmittance, Fresnel, MacrofacetMedium};
    use crate::ndf::{NdfKind, RoughnessTriple};
    use crate::scene::{Camera, Environment, SdfPrimitive, ShellObject, Sun};

    fn camera(w: usize, h: usize) -> Camera {
        Camera { position: Vec3::new(0.0, -3.0, 3.0), look_at: Vec3::ZERO, up: Vec3::Z, vfov_deg: 40.0, width: w, height: h }
    }

    fn flat_scene(medium: MacrofacetMedium, env: Rgb, sun: Option<Sun>, res: usize) -> ShellScene {
        ShellScene::new(
            vec![ShellObject { shape: SdfPrimitive::Plane { z0: 0.0 }, medium }],
            camera(res, res),
            Environment::Constant(env),
            sun,
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_returns_environment() {
        let s = ShellScene::new(vec![], camera(2, 2), Environment::Constant(Rgb::new(0.1, 0.2, 0.3)), None).unwrap();
        let mut rng = RandomStream::new(0, 0);
        let l = trace_path(Vec3::ZERO, Direction::new(0.3, 0.1, -1.0), &s, 4, &mut rng).unwrap();
        assert_eq!(l, Rgb::new(0.1, 0.2, 0.3));
    }

    #[test]
    fn black_environment_gives_black_image() {
        let m = MacrofacetMedium::new(NdfKind::Generalized, RoughnessTriple::isotropic(0.5).unwrap(), 0.1).unwrap();
        let s = flat_scene(m, Rgb::BLACK, None, 8);
        let img = render(&s, &RenderSettings { spp: 2, ..Default::default() }).unwrap();
        assert!(img.pixels.iter().all(|p| p.is_black()));
    }

    #[test]
    fn furnace_small() {
        let m = MacrofacetMedium::new(NdfKind::Generalized, RoughnessTriple::isotropic(1.0).unwrap(), 0.1)
            .unwrap()
            .with_fresnel(Fresnel::One)
            .unwrap();
        let s = flat_scene(m, Rgb::WHITE, None, 8);
        let img = render(&s, &RenderSettings { spp: 64, ..Default::default() }).unwrap();
        let mean = img.mean();
        assert!((mean[0] - 1.0).abs() < 0.02, "{mean:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let m = MacrofacetMedium::new(NdfKind::Generalized, RoughnessTriple::isotropic(0.6).unwrap(), 0.1).unwrap();
        let sun = Sun { direction: Direction::new(0.3, 0.2, 1.0), irradiance: Rgb::splat(2.0) };
        let s = flat_scene(m, Rgb::new(0.2, 0.3, 0.4), Some(sun), 6);
        let a = render(&s, &RenderSettings { spp: 4, seed: 9, threads: Some(1), ..Default::default() }).unwrap();
        let b = render(&s, &RenderSettings { spp: 4, seed: 9, threads: Some(3), ..Default::default() }).unwrap();
        assert_eq!(encode_pfm(&a), encode_pfm(&b));
        let c = render(&s, &RenderSettings { spp: 4, seed: 10, threads: Some(1), ..Default::default() }).unwrap();
        assert_ne!(encode_pfm(&a), encode_pfm(&c));
    }

    #[test]
    fn single_scatter_matches_depth_quadrature() {
        // L = E·p·∫ σ_t(t) Tr_view(t) Tr_light(t) dt on a flat shell
        let sigma = 0.2;
        let m = MacrofacetMedium::new(NdfKind::Generalized, RoughnessTriple::new(0.5, 0.8, 0.6).unwrap(), sigma)
            .unwrap()
            .with_fresnel(Fresnel::One)
            .unwrap();
        let light = SphericalAngles::from_degrees(40.0, 200.0);
        let sun = Sun { direction: light.direction(), irradiance: Rgb::WHITE };
        let s = flat_scene(m, Rgb::BLACK, Some(sun), 2);
        let view = SphericalAngles::from_degrees(130.0, 30.0);
        let d = view.direction();
        let top = 3.0 * sigma;
        let origin = Vec3::new(0.0, 0.0, top + 1.0);
        let p = phase_eval(d, sun.direction, &m, &Frame::WORLD)[0];
        let integrand = |h: f64| {
            let tv = planar_transmittance(top, h, view, &m).unwrap();
            let tl = planar_transmittance(h, top, light, &m).unwrap();
            m.density(h) * m.surface.projected_area(d) * tv * tl / d.z().abs()
        };
        let (q, _) = adaptive_gauss_legendre(-6.0 * sigma, top, 1e-10, 1 << 14, integrand).unwrap();
        let expected = p * q;
        let mut rng = RandomStream::new(77, 0);
        let n = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let v = trace_path(origin, d, &s, 1, &mut rng).unwrap()[0];
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "{mean} ± {se} vs {expected}");
    }

    #[test]
    fn variance_halves_with_doubled_spp() {
        let m = MacrofacetMedium::new(NdfKind::Generalized, RoughnessTriple::isotropic(0.7).unwrap(), 0.1).unwrap();
        let sun = Sun { direction: Direction::new(0.0, 0.5, 1.0), irradiance: Rgb::splat(1.0) };
        let s = flat_scene(m, Rgb::splat(0.5), Some(sun), 4);
        let var_at = |spp: usize| {
            let (mut a, mut a2) = (0.0, 0.0);
            let reps = 300;
            for r in 0..reps {
                let mut rng = RandomStream::new(1000 + r, 5);
                let mut sum = 0.0;
                for _ in 0..spp {
                    let (o, d) = s.camera_ray(2, 2, &mut rng);
                    sum += trace_path(o, d, &s, 16, &mut rng).unwrap()[0];
                }
                let v = sum / spp as f64;
                a += v;
                a2 += v * v;
            }
            let mean = a / reps as f64;
            a2 / reps as f64 - mean * mean
        };
        let ratio = var_at(8) / var_at(16);
        assert!(ratio > 1.5 && ratio < 2.7, "variance ratio {ratio}");
    }
}
