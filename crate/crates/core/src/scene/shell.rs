use super::ShellScene;
use crate::error::{Error, Result};
use crate::math::{Direction, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellInterval {
    pub t_enter: f64,
    pub t_exit: f64,
    pub object: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShellHits {
    /// Disjoint, sorted by `t_enter`.
    pub intervals: Vec<ShellInterval>,
    /// The ray passes below some shell (f < −3σ).
    pub deep: bool,
}

const MAX_STEPS: usize = 1_000_000;

/// Intervals of the ray where some base SDF satisfies |f| ≤ 3σ, found by
/// sphere tracing |f| − 3σ.
pub fn shell_intersect(origin: Point, dir: Direction, scene: &ShellScene) -> Result<ShellHits> {
    let objs = &scene.objects;
    let mut hits = ShellHits::default();
    if objs.is_empty() {
        return Ok(hits);
    }
    let scale = objs.iter().map(|o| o.medium.sigma).fold(f64::INFINITY, f64::min);
    let eps = 1e-9 * scale.max(1e-6);
    let at = |t: f64| origin + dir.vec() * t;

    // (signed gap to the nearest shell, its index, whether below it)
    let probe = |p: Point| {
        let mut best = (f64::INFINITY, 0usize, false);
        for (i, o) in objs.iter().enumerate() {
            let f = o.shape.sdf(p);
            let g = f.abs() - o.medium.shell_half_width();
            if g < best.0 {
                best = (g, i, f < -o.medium.shell_half_width());
            }
        }
        best
    };
    let gone = |p: Point| {
        objs.iter().all(|o| {
            let w = o.medium.shell_half_width();
            o.shape.escaping(p, dir, w) || leaving_deep_plane(&o.shape, p, dir, w)
        })
    };

    let eps_in = 1e-6 * scale.max(1e-6);
    let room = |i: usize, t: f64| objs[i].medium.shell_half_width() - objs[i].shape.sdf(at(t)).abs();

    let mut t = 0.0;
    let mut inside: Option<(usize, f64)> = None;
    let mut just_left = false;
    for _ in 0..MAX_STEPS {
        match inside {
            None => {
                let p = at(t);
                let (g, i, deep) = probe(p);
                hits.deep |= deep;
                if g <= eps && !just_left {
                    inside = Some((i, t));
                    continue;
                }
                just_left = false;
                if gone(p) {
                    return Ok(hits);
                }
                t += g.max(eps);
            }
            Some((i, t0)) => {
                // inside, the shell boundary is at least `room` away
                let step = room(i, t).max(eps_in);
                let next = t + step;
                if room(i, next) < 0.0 {
                    let (mut lo, mut hi) = (t, next);
                    while hi - lo > eps {
                        let mid = 0.5 * (lo + hi);
                        if room(i, mid) < 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    hits.intervals.push(ShellInterval { t_enter: t0, t_exit: hi, object: i });
                    inside = None;
                    just_left = true;
                    t = hi + eps_in;
                    continue;
                }
                t = next;
            }
        }
    }
    Err(Error::NumericFailure(format!(
        "shell intersection did not terminate after {MAX_STEPS} steps (ray origin {origin:?}, direction {dir:?})"
    )))
}

fn leaving_deep_plane(s: &super::SdfPrimitive, p: Point, d: Direction, margin: f64) -> bool {
    match *s {
        super::SdfPrimitive::Plane { z0 } => p.z - z0 < -margin && d.z() <= 0.0,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Rgb, Vec3};
    use crate::medium::MacrofacetMedium;
    use crate::ndf::{NdfKind, RoughnessTriple};
    use crate::scene::{Camera, Environment, SdfPrimitive, ShellObject};

    fn scene(shapes: &[(SdfPrimitive, f64)]) -> ShellScene {
        let objects = shapes
            .iter()
            .map(|&(shape, sigma)| ShellObject {
                shape,
                medium: MacrofacetMedium::new(NdfKind::Beckmann, RoughnessTriple::isotropic(0.5).unwrap(), sigma).unwrap(),
            })
            .collect();
        let camera = Camera { position: Vec3::new(0.0, 0.0, 10.0), look_at: Vec3::ZERO, up: Vec3::Y, vfov_deg: 40.0, width: 4, height: 4 };
        ShellScene::new(objects, camera, Environment::Constant(Rgb::WHITE), None).unwrap()
    }

    #[test]
    fn vertical_plane_crossing() {
        let s = scene(&[(SdfPrimitive::Plane { z0: 0.0 }, 1.0)]);
        let h = shell_intersect(Vec3::new(0.0, 0.0, 10.0), Direction::DOWN, &s).unwrap();
        assert_eq!(h.intervals.len(), 1);
        let iv = h.intervals[0];
        assert!((iv.t_enter - 7.0).abs() < 1e-6 && (iv.t_exit - 13.0).abs() < 1e-6, "{iv:?}");
        assert!(h.deep);
        let up = shell_intersect(Vec3::new(0.0, 0.0, 10.0), Direction::UP, &s).unwrap();
        assert!(up.intervals.is_empty() && !up.deep);
    }

    #[test]
    fn missing_sphere() {
        let s = scene(&[(SdfPrimitive::Sphere { center: Vec3::ZERO, radius: 1.0 }, 0.05)]);
        let h = shell_intersect(Vec3::new(-5.0, 2.0, 0.0), Direction::new(1.0, 0.0, 0.0), &s).unwrap();
        assert!(h.intervals.is_empty());
    }

    #[test]
    fn grazing_sphere_shell_matches_quadratic() {
        let (r, sigma) = (1.0, 0.05);
        let outer = r + 3.0 * sigma;
        let inner = r - 3.0 * sigma;
        let s = scene(&[(SdfPrimitive::Sphere { center: Vec3::ZERO, radius: r }, sigma)]);
        // passes the centre at distance b: only the outer shell face is cut
        for b in [outer - 1e-3, 1.0, inner + 1e-3, 0.5] {
            let o = Vec3::new(-5.0, b, 0.0);
            let h = shell_intersect(o, Direction::new(1.0, 0.0, 0.0), &s).unwrap();
            let half = |rad: f64| (rad * rad - b * b).max(0.0).sqrt();
            let (xo, xi) = (half(outer), half(inner));
            let expect: Vec<(f64, f64)> = if b >= inner {
                vec![(5.0 - xo, 5.0 + xo)]
            } else {
                vec![(5.0 - xo, 5.0 - xi), (5.0 + xi, 5.0 + xo)]
            };
            assert_eq!(h.intervals.len(), expect.len(), "b={b}: {:?}", h.intervals);
            for (iv, (a, z)) in h.intervals.iter().zip(expect) {
                assert!((iv.t_enter - a).abs() < 1e-4 && (iv.t_exit - z).abs() < 1e-4, "b={b}: {iv:?} vs ({a}, {z})");
            }
            assert_eq!(h.deep, b < inner);
        }
    }

    #[test]
    fn intervals_sorted_across_objects() {
        let s = scene(&[
            (SdfPrimitive::Sphere { center: Vec3::ZERO, radius: 1.0 }, 0.05),
            (SdfPrimitive::Box { center: Vec3::new(4.0, 0.0, 0.0), half: Vec3::splat(0.5) }, 0.02),
        ]);
        let h = shell_intersect(Vec3::new(-5.0, 0.0, 0.0), Direction::new(1.0, 0.0, 0.0), &s).unwrap();
        assert_eq!(h.intervals.len(), 4);
        for w in h.intervals.windows(2) {
            assert!(w[0].t_exit < w[1].t_enter);
        }
        assert_eq!(h.intervals[2].object, 1);
        assert!((h.intervals[2].t_enter - (9.0 - 0.5 - 0.06)).abs() < 1e-6);
    }
}
