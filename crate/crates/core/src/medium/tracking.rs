//! Null-scattering free-flight sampling through the shells of a scene.
//!
//! A [`Tracker`] walks one ray lazily: sphere tracing between shells, and
//! inside a medium proposing tentative collisions under a majorant that is
//! rebuilt for every short segment. Delta tracking accepts a tentative
//! collision with probability σ_t/μ̄; ratio tracking multiplies by
//! 1 − σ_t/μ̄.

use crate::error::{Error, Result};
use crate::math::{build_frame, Direction, Frame, Point, RandomStream};
use crate::scene::{SdfPrimitive, ShellObject, ShellScene};

/// A collision proposed by the majorant; not yet classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tentative {
    pub t: f64,
    pub position: Point,
    pub object: usize,
    pub f: f64,
    pub frame: Frame,
    pub extinction: f64,
    pub majorant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Collision(Tentative),
    /// Left every shell for good, or reached the end of the track.
    Exited,
    /// Went deeper than the traversal cap below some shell.
    Absorbed { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediumEventKind {
    Escaped,
    Absorbed,
    RealScatter,
    NullScatter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumEvent {
    pub kind: MediumEventKind,
    pub position: Point,
    pub distance: f64,
    pub local_f: f64,
    pub local_frame: Frame,
    pub object: Option<usize>,
}

const MAX_ITERATIONS: usize = 10_000_000;
/// Relative slack allowed before a sampled extinction counts as exceeding
/// its majorant.
const MAJORANT_SLACK: f64 = 1e-9;

pub struct Tracker<'a> {
    objects: &'a [ShellObject],
    origin: Point,
    dir: Direction,
    t: f64,
    t_max: f64,
    iterations: usize,
}

impl<'a> Tracker<'a> {
    pub fn new(objects: &'a [ShellObject], origin: Point, dir: Direction) -> Self {
        Self::with_limit(objects, origin, dir, f64::INFINITY)
    }

    /// Track only the first `t_max` units of the ray.
    pub fn with_limit(objects: &'a [ShellObject], origin: Point, dir: Direction, t_max: f64) -> Self {
        Tracker { objects, origin, dir, t: 0.0, t_max, iterations: 0 }
    }

    #[inline]
    fn at(&self, t: f64) -> Point {
        self.origin + self.dir.vec() * t
    }

    pub fn next(&mut self, rng: &mut RandomStream) -> Result<Step> {
        loop {
            self.iterations += 1;
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::NumericFailure(format!(
                    "tracking did not terminate (origin {:?}, direction {:?}, t = {})",
                    self.origin, self.dir, self.t
                )));
            }
            if self.t >= self.t_max {
                return Ok(Step::Exited);
            }
            let p = self.at(self.t);

            // region: absorbed, inside the medium of one object, or in vacuum
            let mut current = None;
            let mut gap = f64::INFINITY;
            for (i, o) in self.objects.iter().enumerate() {
                let f = o.shape.sdf(p);
                let s = o.medium.sigma;
                if f < o.medium.depth_cap() {
                    return Ok(Step::Absorbed { t: self.t });
                }
                let g = f - 3.0 * s;
                if g <= 1e-6 * s {
                    current = Some((i, f));
                } else {
                    gap = gap.min(g);
                }
            }

            let Some((i, f)) = current else {
                let escaping =
                    self.objects.iter().all(|o| o.shape.escaping(p, self.dir, o.medium.shell_half_width()));
                if escaping {
                    return Ok(Step::Exited);
                }
                self.t += gap;
                continue;
            };

            let obj = &self.objects[i];
            let m = &obj.medium;
            let (len, f_min, area) = match obj.shape {
                SdfPrimitive::Plane { .. } => {
                    // f is linear along the ray and σ(ω) is constant
                    let dz = self.dir.z();
                    let len = 0.5 * m.sigma / dz.abs().max(1e-3);
                    (len, f + len * dz.min(0.0), m.surface.projected_area(self.dir))
                }
                _ => {
                    let len = 0.5 * m.sigma;
                    (len, f - len, m.surface.projected_area_bound())
                }
            };
            // stay clear of other shells; they are disjoint from this one
            let len = len.min(gap.max(1e-6 * m.sigma)).min(self.t_max - self.t);
            let majorant = m.density(f_min.max(m.depth_cap())) * area;
            if !(majorant > 0.0) {
                self.t += len;
                continue;
            }
            let s = rng.exponential(majorant);
            if s >= len {
                self.t += len;
                continue;
            }
            self.t += s;
            let q = self.at(self.t);
            let fq = obj.shape.sdf(q);
            if fq < m.depth_cap() {
                return Ok(Step::Absorbed { t: self.t });
            }
            let frame = build_frame(obj.shape.gradient(q));
            let extinction = if fq > m.shell_half_width() {
                0.0
            } else {
                m.extinction_local(frame.dir_to_local(self.dir), fq)
            };
            if extinction > majorant * (1.0 + MAJORANT_SLACK) {
                return Err(Error::MajorantViolation { extinction, majorant, sdf: fq });
            }
            return Ok(Step::Collision(Tentative { t: self.t, position: q, object: i, f: fq, frame, extinction, majorant }));
        }
    }
}

/// Delta tracking: the first real collision, or how the ray left.
pub fn sample_collision(origin: Point, dir: Direction, scene: &ShellScene, rng: &mut RandomStream) -> Result<MediumEvent> {
    delta_track(&scene.objects, origin, dir, f64::INFINITY, rng)
}

pub fn delta_track(
    objects: &[ShellObject],
    origin: Point,
    dir: Direction,
    t_max: f64,
    rng: &mut RandomStream,
) -> Result<MediumEvent> {
    let mut tr = Tracker::with_limit(objects, origin, dir, t_max);
    loop {
        match tr.next(rng)? {
            Step::Collision(c) => {
                if rng.uniform() * c.majorant < c.extinction {
                    return Ok(MediumEvent {
                        kind: MediumEventKind::RealScatter,
                        position: c.position,
                        distance: c.t,
                        local_f: c.f,
                        local_frame: c.frame,
                        object: Some(c.object),
                    });
                }
            }
            Step::Exited => {
                let t = tr.t.min(t_max);
                return Ok(leave(MediumEventKind::Escaped, origin + dir.vec() * t, t));
            }
            Step::Absorbed { t } => return Ok(leave(MediumEventKind::Absorbed, origin + dir.vec() * t, t)),
        }
    }
}

fn leave(kind: MediumEventKind, position: Point, distance: f64) -> MediumEvent {
    MediumEvent { kind, position, distance, local_f: f64::NAN, local_frame: Frame::WORLD, object: None }
}

/// One ratio-tracking estimate of the transmittance over [0, t_max].
pub fn ratio_transmittance(
    objects: &[ShellObject],
    origin: Point,
    dir: Direction,
    t_max: f64,
    rng: &mut RandomStream,
) -> Result<f64> {
    let mut tr = Tracker::with_limit(objects, origin, dir, t_max);
    let mut w = 1.0;
    loop {
        match tr.next(rng)? {
            Step::Collision(c) => {
                w *= 1.0 - c.extinction / c.majorant;
                if w <= 0.0 {
                    return Ok(0.0);
                }
            }
            Step::Exited => return Ok(w),
            Step::Absorbed { .. } => return Ok(0.0),
        }
    }
}

/// Mean and standard error of `n_samples` ratio-tracking estimates.
pub fn transmittance_estimate(
    origin: Point,
    dir: Direction,
    scene: &ShellScene,
    t_max: f64,
    n_samples: usize,
    rng: &mut RandomStream,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n_samples {
        let v = ratio_transmittance(&scene.objects, origin, dir, t_max, rng)?;
        s += v;
        s2 += v * v;
    }
    let n = n_samples as f64;
    let mean = s / n;
    let var = if n_samples > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Rgb, SphericalAngles, Vec3};
    use crate::medium::{planar_transmittance, MacrofacetMedium};
    use crate::ndf::{NdfKind, RoughnessTriple};
    use crate::scene::{Camera, Environment};
    use std::f64::consts::PI;

    fn flat(kind: NdfKind, a: f64, sigma: f64) -> ShellScene {
        let medium = MacrofacetMedium::new(kind, RoughnessTriple::isotropic(a).unwrap(), sigma).unwrap();
        let camera = Camera { position: Vec3::new(0.0, 0.0, 5.0), look_at: Vec3::ZERO, up: Vec3::Y, vfov_deg: 30.0, width: 4, height: 4 };
        ShellScene::new(
            vec![ShellObject { shape: SdfPrimitive::Plane { z0: 0.0 }, medium }],
            camera,
            Environment::Constant(Rgb::WHITE),
            None,
        )
        .unwrap()
    }

    #[test]
    fn missing_ray_transmits_exactly() {
        let s = flat(NdfKind::Generalized, 1.0, 1.0);
        let mut rng = RandomStream::new(1, 0);
        let (m, se) = transmittance_estimate(Vec3::new(0.0, 0.0, 5.0), Direction::UP, &s, f64::INFINITY, 100, &mut rng).unwrap();
        assert_eq!((m, se), (1.0, 0.0));
    }

    #[test]
    fn ratio_tracking_matches_closed_form() {
        let s = flat(NdfKind::Generalized, 1.0, 1.0);
        let m = s.objects[0].medium;
        let mut rng = RandomStream::new(2, 0);
        // 45° upward from the mean surface to the top of the shell
        let w = SphericalAngles::from_degrees(45.0, 0.0);
        let d = w.direction();
        let t_max = 3.0 / d.z();
        let (est, se) = transmittance_estimate(Vec3::ZERO, d, &s, t_max, 100_000, &mut rng).unwrap();
        let exact = planar_transmittance(0.0, 3.0, w, &m).unwrap();
        assert!((est - exact).abs() < 3.0 * se.max(1e-6), "{est} ± {se} vs {exact}");
        assert!((est - 0.9439).abs() < 0.003);
        // straight down through the whole shell
        let w = SphericalAngles::new(PI, 0.0);
        let (est, se) =
            transmittance_estimate(Vec3::new(0.0, 0.0, 3.0), Direction::DOWN, &s, 6.0, 100_000, &mut rng).unwrap();
        let exact = planar_transmittance(3.0, -3.0, w, &m).unwrap();
        assert!((est - exact).abs() < 3.0 * se, "{est} ± {se} vs {exact}");
    }

    #[test]
    fn curved_majorant_holds_for_all_kinds() {
        for kind in [NdfKind::Beckmann, NdfKind::Ggx, NdfKind::Generalized] {
            let medium = MacrofacetMedium::new(kind, RoughnessTriple::new(0.3, 1.2, 0.8).unwrap(), 0.05).unwrap();
            let objs = [ShellObject { shape: SdfPrimitive::Sphere { center: Vec3::ZERO, radius: 1.0 }, medium }];
            let mut rng = RandomStream::new(3, 0);
            for k in 0..2000 {
                let d = SphericalAngles::new(PI * rng.uniform(), 2.0 * PI * rng.uniform()).direction();
                let o = Vec3::new(0.0, 0.0, 0.0) - d.vec() * 3.0 + Vec3::new(0.3 * rng.uniform(), 0.9 * rng.uniform(), 0.0);
                let e = delta_track(&objs, o, d, f64::INFINITY, &mut rng);
                assert!(e.is_ok(), "{kind:?} ray {k}: {e:?}");
            }
        }
    }

    #[test]
    fn collision_depth_distribution() {
        // Kolmogorov–Smirnov between sampled collision heights and 1 − Tr
        let s = flat(NdfKind::Beckmann, 0.5, 1.0);
        let m = s.objects[0].medium;
        let mut rng = RandomStream::new(4, 0);
        let w = SphericalAngles::from_degrees(150.0, 0.0);
        let d = w.direction();
        let o = Vec3::new(0.0, 0.0, 3.0);
        let n = 100_000;
        let mut heights = Vec::new();
        let mut escaped = 0usize;
        for _ in 0..n {
            let e = sample_collision(o, d, &s, &mut rng).unwrap();
            match e.kind {
                MediumEventKind::RealScatter => heights.push(e.position.z),
                _ => escaped += 1,
            }
        }
        // the CDF of the collision height (from the top) is 1 − Tr(3 → h)
        heights.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut ks: f64 = 0.0;
        for (k, &h) in heights.iter().enumerate() {
            let model = 1.0 - planar_transmittance(3.0, h, w, &m).unwrap();
            let emp_hi = (k + 1) as f64 / n as f64;
            let emp_lo = k as f64 / n as f64;
            ks = ks.max((model - emp_hi).abs()).max((model - emp_lo).abs());
        }
        assert!(ks <= 0.01, "KS = {ks}");
        let absorbed_model = planar_transmittance(3.0, -6.0, w, &m).unwrap();
        let p = escaped as f64 / n as f64;
        let se = (absorbed_model * (1.0 - absorbed_model) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((p - absorbed_model).abs() <= 3.0 * se + 1e-6, "{p} vs {absorbed_model}");
    }

    #[test]
    fn mirror_limit_collides_at_surface() {
        let s = flat(NdfKind::Beckmann, 1e-3, 1e-5);
        let mut rng = RandomStream::new(5, 0);
        let d = SphericalAngles::from_degrees(135.0, 0.0).direction();
        let o = Vec3::new(0.0, 0.0, 1.0);
        let mut close = 0;
        for _ in 0..1000 {
            let e = sample_collision(o, d, &s, &mut rng).unwrap();
            if e.kind == MediumEventKind::RealScatter && e.position.z.abs() < 1e-3 {
                close += 1;
            }
        }
        assert!(close >= 990);
    }
}
