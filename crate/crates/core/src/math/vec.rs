use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

/// Plain 3-vector of doubles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type Point = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Normalized copy; `None` for zero or non-finite input.
    pub fn try_normalize(self) -> Option<Direction> {
        let l = self.length();
        if l > 0.0 && l.is_finite() {
            Some(Direction(self / l))
        } else {
            None
        }
    }

    #[inline]
    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    #[inline]
    pub fn max_elem(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    #[inline]
    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Unit vector. Construction normalizes; the wrapped value always has unit
/// length up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec3);

impl Direction {
    pub const UP: Direction = Direction(Vec3::Z);
    pub const DOWN: Direction = Direction(Vec3 { x: 0.0, y: 0.0, z: -1.0 });

    /// Normalizes `(x, y, z)`; panics on a zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(x, y, z)
            .try_normalize()
            .expect("direction must be non-zero and finite")
    }

    /// Wraps a vector the caller guarantees is unit length.
    #[inline]
    pub fn new_unchecked(v: Vec3) -> Self {
        Direction(v)
    }

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn z(self) -> f64 {
        self.0.z
    }

    #[inline]
    pub fn dot(self, o: Direction) -> f64 {
        self.0.dot(o.0)
    }

    /// Mirror `self` about the unit normal `n`: 2(v·n)n − v.
    #[inline]
    pub fn reflect(self, n: Direction) -> Direction {
        let v = self.0;
        Direction::new_unchecked(n.0 * (2.0 * v.dot(n.0)) - v)
            .renormalized()
    }

    #[inline]
    fn renormalized(self) -> Direction {
        Direction(self.0 / self.0.length())
    }

    pub fn from_angles(a: SphericalAngles) -> Direction {
        let (st, ct) = a.theta.sin_cos();
        let (sp, cp) = a.phi.sin_cos();
        Direction(Vec3::new(st * cp, st * sp, ct))
    }

    /// Polar angle from +z and azimuth in [0, 2π); azimuth is 0 at the poles.
    pub fn to_angles(self) -> SphericalAngles {
        let v = self.0;
        let theta = v.z.clamp(-1.0, 1.0).acos();
        let rho = v.x.hypot(v.y);
        let phi = if rho < 1e-15 {
            0.0
        } else {
            let p = v.y.atan2(v.x);
            if p < 0.0 {
                p + 2.0 * PI
            } else {
                p
            }
        };
        SphericalAngles { theta, phi }
    }
}

impl Neg for Direction {
    type Output = Direction;
    #[inline]
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

impl From<Direction> for Vec3 {
    fn from(d: Direction) -> Vec3 {
        d.0
    }
}

/// Polar angle θ ∈ [0, π] from +z and azimuth φ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngles {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        SphericalAngles { theta, phi }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        SphericalAngles { theta: theta_deg.to_radians(), phi: phi_deg.to_radians() }
    }

    pub fn direction(self) -> Direction {
        Direction::from_angles(self)
    }
}

/// Orthonormal right-handed frame with `tangent × bitangent = normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Direction,
    pub bitangent: Direction,
    pub normal: Direction,
}

impl Frame {
    pub const WORLD: Frame = Frame {
        tangent: Direction(Vec3::X),
        bitangent: Direction(Vec3::Y),
        normal: Direction(Vec3::Z),
    };

    #[inline]
    pub fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.tangent.0), v.dot(self.bitangent.0), v.dot(self.normal.0))
    }

    #[inline]
    pub fn to_world(&self, v: Vec3) -> Vec3 {
        self.tangent.0 * v.x + self.bitangent.0 * v.y + self.normal.0 * v.z
    }

    #[inline]
    pub fn dir_to_local(&self, d: Direction) -> Direction {
        Direction(self.to_local(d.0))
    }

    #[inline]
    pub fn dir_to_world(&self, d: Direction) -> Direction {
        Direction(self.to_world(d.0))
    }
}

/// Branchless orthonormal basis around `n` (Duff et al. 2017); stable at both
/// poles.
pub fn build_frame(n: Direction) -> Frame {
    let n = n.0;
    let sign = 1f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let bt = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    Frame { tangent: Direction(t), bitangent: Direction(bt), normal: Direction(n) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_frame(f: &Frame) {
        let (t, b, n) = (f.tangent.vec(), f.bitangent.vec(), f.normal.vec());
        for (u, v) in [(t, b), (t, n), (b, n)] {
            assert!(u.dot(v).abs() < 1e-10);
        }
        for u in [t, b, n] {
            assert!((u.length() - 1.0).abs() < 1e-10);
        }
        let c = t.cross(b);
        assert!((c - n).length() < 1e-10, "not right-handed: {c:?} vs {n:?}");
    }

    #[test]
    fn frame_poles_and_axes() {
        let up = build_frame(Direction::UP);
        assert_eq!(up.normal, Direction::UP);
        check_frame(&up);
        check_frame(&build_frame(Direction::DOWN));
        check_frame(&build_frame(Direction::new(1.0, 0.0, 0.0)));
        check_frame(&build_frame(Direction::new(0.0, -1.0, 1e-300)));
    }

    #[test]
    fn angles_at_poles_canonical() {
        let a = Direction::UP.to_angles();
        assert_eq!((a.theta, a.phi), (0.0, 0.0));
        let b = Direction::DOWN.to_angles();
        assert!((b.theta - PI).abs() < 1e-15);
        assert_eq!(b.phi, 0.0);
    }

    #[test]
    fn reflect_is_involution() {
        let n = Direction::new(0.3, -0.2, 0.9);
        let v = Direction::new(-0.5, 0.1, 0.4);
        let r = v.reflect(n);
        assert!((r.dot(n) - v.dot(n)).abs() < 1e-14);
        let back = r.reflect(n);
        assert!((back.vec() - v.vec()).length() < 1e-14);
    }

    proptest! {
        #[test]
        fn frame_orthonormal(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            prop_assume!(x * x + y * y + z * z > 1e-6);
            let n = Direction::new(x, y, z);
            let f = build_frame(n);
            check_frame(&f);
            let v = Vec3::new(0.2, -0.7, 0.4);
            prop_assert!((f.to_world(f.to_local(v)) - v).length() < 1e-12);
        }

        #[test]
        fn angles_round_trip(theta in 1e-6f64..(PI - 1e-6), phi in 0.0f64..(2.0 * PI)) {
            let a = SphericalAngles::new(theta, phi);
            let d = a.direction();
            prop_assert!((d.vec().length() - 1.0).abs() < 1e-12);
            let b = d.to_angles();
            prop_assert!((b.theta - theta).abs() < 1e-9);
            let dphi = (b.phi - phi).abs();
            prop_assert!(dphi.min(2.0 * PI - dphi) < 1e-9 / theta.sin().max(1e-3));
            prop_assert!((b.direction().vec() - d.vec()).length() < 1e-12);
        }
    }
}
