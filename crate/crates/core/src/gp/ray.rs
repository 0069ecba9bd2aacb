//! Ray casting against a realization's zero level set.

use super::{GpMean, GpRealization};
use crate::math::{Direction, Point, Vec3};

pub const BISECTION_STEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstHit {
    pub hit: bool,
    pub position: Point,
    /// Normalized field gradient (pointing to f > 0).
    pub normal: Direction,
    pub travel: f64,
}

impl FirstHit {
    fn miss(origin: Point, dir: Direction, t: f64) -> Self {
        FirstHit { hit: false, position: origin + dir.vec() * t, normal: Direction::UP, travel: t }
    }
}

impl GpRealization {
    pub fn march_step(&self) -> f64 {
        self.kernel.min_length() / 8.0
    }

    /// Range of t in [0, t_max] that can contain a crossing for a planar
    /// mean, where the surface is confined to |z| ≤ noise bound.
    fn active_range(&self, origin: Point, dir: Direction, outside: bool, t_max: f64) -> Option<(f64, f64)> {
        if self.mean != GpMean::Planar {
            return Some((0.0, t_max));
        }
        let b = self.noise_bound();
        let (z, dz) = (origin.z, dir.z());
        // f > 0 can only end where z ≤ b; f < 0 only where z ≥ −b
        let (wall, inside_slab, leaving) = if outside { (b, z <= b, dz > 0.0) } else { (-b, z >= -b, dz < 0.0) };
        if inside_slab {
            if leaving {
                Some((0.0, ((wall - z) / dz).min(t_max)))
            } else {
                Some((0.0, t_max))
            }
        } else if leaving || dz == 0.0 {
            None
        } else {
            let t0 = (wall - z) / dz;
            (t0 < t_max).then_some((t0, t_max))
        }
    }
}

/// First sign change of the field along `origin + t·dir`, t ∈ (0, t_max].
///
/// Samples sit on a lattice fixed to the line (not to the origin), so moving
/// the origin along the ray never changes which crossing is found.
pub fn first_hit(r: &GpRealization, origin: Point, dir: Direction, t_max: f64) -> FirstHit {
    let f0 = r.value(origin);
    let outside = f0 >= 0.0;
    let Some((t_lo, t_hi)) = r.active_range(origin, dir, outside, t_max) else {
        return FirstHit::miss(origin, dir, t_max);
    };
    let step = r.march_step();
    let t_ref = -origin.dot(dir.vec());
    let crossed = |f: f64| if outside { f < 0.0 } else { f >= 0.0 };
    let at = |t: f64| r.value(origin + dir.vec() * t);

    let mut t_prev = t_lo;
    let mut k = ((t_prev - t_ref) / step).floor() + 1.0;
    loop {
        let t = (t_ref + k * step).min(t_hi);
        let t = if t <= t_prev { (t_prev + step).min(t_hi) } else { t };
        let f = at(t);
        if crossed(f) {
            let (mut a, mut b) = (t_prev, t);
            for _ in 0..BISECTION_STEPS {
                let m = 0.5 * (a + b);
                if crossed(at(m)) {
                    b = m;
                } else {
                    a = m;
                }
            }
            let tm = 0.5 * (a + b);
            let p = origin + dir.vec() * tm;
            let normal = r.gradient(p).try_normalize().unwrap_or(Direction::UP);
            return FirstHit { hit: true, position: p, normal, travel: tm };
        }
        if t >= t_hi {
            return FirstHit::miss(origin, dir, t_max);
        }
        t_prev = t;
        k += 1.0;
    }
}

/// Mirror `d` about the unit normal `n`.
pub(crate) fn mirror(d: Direction, n: Direction) -> Direction {
    let v: Vec3 = d.vec() - n.vec() * (2.0 * d.dot(n));
    v.try_normalize().unwrap_or(d)
}
