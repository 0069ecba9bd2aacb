//! Analytic SDF scenes: base primitives, their shells, camera and lights.

mod shell;

pub use shell::{shell_intersect, ShellHits, ShellInterval};

use crate::error::{Error, Result};
use crate::math::{Direction, Point, RandomStream, Rgb, Vec3};
use crate::medium::MacrofacetMedium;
use std::f64::consts::PI;

/// Base surface with an exact signed distance and analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SdfPrimitive {
    /// Horizontal plane z = z0, outside above.
    Plane { z0: f64 },
    Sphere { center: Point, radius: f64 },
    /// Axis-aligned box.
    Box { center: Point, half: Vec3 },
}

impl SdfPrimitive {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SdfPrimitive::Plane { z0 } => z0.is_finite(),
            SdfPrimitive::Sphere { center, radius } => center.is_finite() && radius > 0.0 && radius.is_finite(),
            SdfPrimitive::Box { center, half } => {
                center.is_finite() && half.is_finite() && half.x > 0.0 && half.y > 0.0 && half.z > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedGeometry(format!("invalid primitive {self:?}")))
        }
    }

    #[inline]
    pub fn sdf(&self, p: Point) -> f64 {
        match *self {
            SdfPrimitive::Plane { z0 } => p.z - z0,
            SdfPrimitive::Sphere { center, radius } => (p - center).length() - radius,
            SdfPrimitive::Box { center, half } => {
                let q = (p - center).abs() - half;
                let outside = q.map(|c| c.max(0.0)).length();
                outside + q.max_elem().min(0.0)
            }
        }
    }

    /// Unit gradient of the SDF. Where it is not differentiable (sphere
    /// centre, box medial surfaces) one of the one-sided gradients is used.
    #[inline]
    pub fn gradient(&self, p: Point) -> Direction {
        match *self {
            SdfPrimitive::Plane { .. } => Direction::UP,
            SdfPrimitive::Sphere { center, .. } => (p - center).try_normalize().unwrap_or(Direction::UP),
            SdfPrimitive::Box { center, half } => {
                let d = p - center;
                let q = d.abs() - half;
                let sgn = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
                if q.max_elem() > 0.0 {
                    let o = q.map(|c| c.max(0.0));
                    Vec3::new(sgn(d.x) * o.x, sgn(d.y) * o.y, sgn(d.z) * o.z)
                        .try_normalize()
                        .unwrap_or(Direction::UP)
                } else if q.x >= q.y && q.x >= q.z {
                    Direction::new_unchecked(Vec3::new(sgn(d.x), 0.0, 0.0))
                } else if q.y >= q.z {
                    Direction::new_unchecked(Vec3::new(0.0, sgn(d.y), 0.0))
                } else {
                    Direction::new_unchecked(Vec3::new(0.0, 0.0, sgn(d.z)))
                }
            }
        }
    }

    /// Bounding sphere of the solid; `None` for unbounded shapes.
    pub fn bounding_sphere(&self) -> Option<(Point, f64)> {
        match *self {
            SdfPrimitive::Plane { .. } => None,
            SdfPrimitive::Sphere { center, radius } => Some((center, radius)),
            SdfPrimitive::Box { center, half } => Some((center, half.length())),
        }
    }

    /// True when a ray at `p` moving along `d` can never again come within
    /// `margin` of the surface from outside.
    pub fn escaping(&self, p: Point, d: Direction, margin: f64) -> bool {
        match *self {
            SdfPrimitive::Plane { z0 } => p.z - z0 > margin && d.z() >= 0.0,
            _ => {
                let (c, r) = self.bounding_sphere().expect("bounded");
                let rel = p - c;
                rel.length() > r + margin && rel.dot(d.vec()) >= 0.0
            }
        }
    }

    /// Lower bound on the distance between the two surfaces.
    fn surface_gap(&self, o: &SdfPrimitive) -> f64 {
        use SdfPrimitive::*;
        match (*self, *o) {
            (Plane { z0: a }, Plane { z0: b }) => (a - b).abs(),
            (Sphere { center, radius }, other) | (other, Sphere { center, radius }) => {
                other.sdf(center).abs() - radius
            }
            (Plane { z0 }, Box { center, half }) | (Box { center, half }, Plane { z0 }) => {
                (center.z - z0).abs() - half.z
            }
            (Box { center: c1, half: h1 }, Box { center: c2, half: h2 }) => {
                let gap = (c1 - c2).abs() - h1 - h2;
                if gap.max_elem() <= 0.0 {
                    // solids overlap or nest
                    f64::NEG_INFINITY
                } else {
                    gap.map(|g| g.max(0.0)).length()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellObject {
    pub shape: SdfPrimitive,
    pub medium: MacrofacetMedium,
}

/// Pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Point,
    pub look_at: Point,
    pub up: Vec3,
    pub vfov_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("camera resolution must be positive".into()));
        }
        if !(self.vfov_deg > 0.0 && self.vfov_deg < 180.0) {
            return Err(Error::Config(format!("vertical fov must lie in (0, 180), got {}", self.vfov_deg)));
        }
        let fwd = self.look_at - self.position;
        if fwd.try_normalize().is_none() || fwd.cross(self.up).try_normalize().is_none() {
            return Err(Error::Config("camera look-at and up must define a frame".into()));
        }
        Ok(())
    }

    /// Primary ray through image position (`px`, `py`) in pixel units,
    /// row 0 at the top.
    pub fn ray(&self, px: f64, py: f64) -> (Point, Direction) {
        let fwd = (self.look_at - self.position).try_normalize().expect("validated camera");
        let right = fwd.vec().cross(self.up).try_normalize().expect("validated camera");
        let up = right.vec().cross(fwd.vec());
        let tan = (0.5 * self.vfov_deg.to_radians()).tan();
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * px / self.width as f64 - 1.0) * tan * aspect;
        let sy = (1.0 - 2.0 * py / self.height as f64) * tan;
        let d = fwd.vec() + right.vec() * sx + up * sy;
        (self.position, d.try_normalize().expect("finite camera ray"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    Constant(Rgb),
    /// Equirectangular map, row 0 at the zenith, φ increasing with column.
    LatLong { width: usize, height: usize, texels: Vec<Rgb> },
}

impl Environment {
    pub fn radiance(&self, d: Direction) -> Rgb {
        match self {
            Environment::Constant(c) => *c,
            Environment::LatLong { width, height, texels } => {
                let a = d.to_angles();
                let u = ((a.phi / (2.0 * PI)) * *width as f64) as usize;
                let v = ((a.theta / PI) * *height as f64) as usize;
                texels[v.min(height - 1) * width + u.min(width - 1)]
            }
        }
    }
}

/// Directional light; `direction` points from the scene towards the light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sun {
    pub direction: Direction,
    /// Irradiance on a surface facing the light.
    pub irradiance: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellScene {
    pub objects: Vec<ShellObject>,
    pub camera: Camera,
    pub environment: Environment,
    pub sun: Option<Sun>,
}

impl ShellScene {
    /// Validates primitives, camera and pairwise shell separation.
    pub fn new(objects: Vec<ShellObject>, camera: Camera, environment: Environment, sun: Option<Sun>) -> Result<Self> {
        for o in &objects {
            o.shape.validate()?;
        }
        camera.validate()?;
        if let Environment::LatLong { width, height, texels } = &environment {
            if *width == 0 || *height == 0 || texels.len() != width * height {
                return Err(Error::Config("environment map size does not match its texels".into()));
            }
        }
        for (i, a) in objects.iter().enumerate() {
            for (j, b) in objects.iter().enumerate().skip(i + 1) {
                let gap = a.shape.surface_gap(&b.shape);
                let need = a.medium.shell_half_width() + b.medium.shell_half_width();
                if !(gap > need) {
                    return Err(Error::UnsupportedGeometry(format!(
                        "shells of objects {i} and {j} overlap: surface gap {gap} <= {need}"
                    )));
                }
            }
        }
        Ok(ShellScene { objects, camera, environment, sun })
    }

    /// Jittered primary ray for pixel (`x`, `y`).
    pub fn camera_ray(&self, x: usize, y: usize, rng: &mut RandomStream) -> (Point, Direction) {
        self.camera.ray(x as f64 + rng.uniform(), y as f64 + rng.uniform())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndf::{NdfKind, RoughnessTriple};
    use proptest::prelude::*;

    fn medium(sigma: f64) -> MacrofacetMedium {
        MacrofacetMedium::new(NdfKind::Beckmann, RoughnessTriple::isotropic(0.3).unwrap(), sigma).unwrap()
    }

    fn camera() -> Camera {
        Camera { position: Vec3::new(0.0, -5.0, 2.0), look_at: Vec3::ZERO, up: Vec3::Z, vfov_deg: 40.0, width: 8, height: 6 }
    }

    /// Brute-force distance to the box surface by dense sampling of its faces.
    fn box_distance_bruteforce(c: Point, h: Vec3, p: Point) -> f64 {
        let n = 120;
        let mut best = f64::INFINITY;
        for axis in 0..3 {
            for s in [-1.0, 1.0] {
                for i in 0..=n {
                    for j in 0..=n {
                        let u = -1.0 + 2.0 * i as f64 / n as f64;
                        let v = -1.0 + 2.0 * j as f64 / n as f64;
                        let q = match axis {
                            0 => Vec3::new(s * h.x, u * h.y, v * h.z),
                            1 => Vec3::new(u * h.x, s * h.y, v * h.z),
                            _ => Vec3::new(u * h.x, v * h.y, s * h.z),
                        };
                        best = best.min((c + q - p).length());
                    }
                }
            }
        }
        best
    }

    #[test]
    fn box_sdf_is_exact() {
        let b = SdfPrimitive::Box { center: Vec3::new(0.1, -0.2, 0.3), half: Vec3::new(0.5, 0.8, 0.3) };
        let (c, h) = (Vec3::new(0.1, -0.2, 0.3), Vec3::new(0.5, 0.8, 0.3));
        for p in [Vec3::new(1.0, 1.0, 1.0), Vec3::new(0.2, -0.1, 0.35), Vec3::new(0.9, 0.0, 0.3), Vec3::new(-0.5, -1.5, -0.5)] {
            let d = b.sdf(p);
            let r = box_distance_bruteforce(c, h, p);
            assert!((d.abs() - r).abs() < 2e-2, "{p:?}: {d} vs {r}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let shapes = [
            SdfPrimitive::Plane { z0: 0.3 },
            SdfPrimitive::Sphere { center: Vec3::new(0.0, 1.0, 0.0), radius: 0.7 },
            SdfPrimitive::Box { center: Vec3::ZERO, half: Vec3::new(0.5, 0.6, 0.7) },
        ];
        let pts = [Vec3::new(0.9, 0.2, 1.1), Vec3::new(-0.1, 0.05, 0.2), Vec3::new(2.0, -1.0, 0.4)];
        let h = 1e-6;
        for s in shapes {
            for p in pts {
                let g = s.gradient(p);
                let fd = Vec3::new(
                    s.sdf(p + Vec3::X * h) - s.sdf(p - Vec3::X * h),
                    s.sdf(p + Vec3::Y * h) - s.sdf(p - Vec3::Y * h),
                    s.sdf(p + Vec3::Z * h) - s.sdf(p - Vec3::Z * h),
                ) / (2.0 * h);
                assert!((g.vec() - fd).length() < 1e-6, "{s:?} at {p:?}");
            }
        }
    }

    #[test]
    fn overlap_rejected() {
        let env = Environment::Constant(Rgb::WHITE);
        let a = ShellObject { shape: SdfPrimitive::Sphere { center: Vec3::ZERO, radius: 1.0 }, medium: medium(0.1) };
        let b = ShellObject { shape: SdfPrimitive::Sphere { center: Vec3::new(2.7, 0.0, 0.0), radius: 1.0 }, medium: medium(0.1) };
        assert!(ShellScene::new(vec![a, b], camera(), env.clone(), None).is_ok());
        let c = ShellObject { shape: SdfPrimitive::Sphere { center: Vec3::new(2.7, 0.0, 0.0), radius: 1.0 }, medium: medium(0.1) };
        let d = ShellObject { shape: SdfPrimitive::Plane { z0: -1.4 }, medium: medium(0.1) };
        assert!(ShellScene::new(vec![a, c, d], camera(), env.clone(), None).is_err());
        let e = ShellObject { shape: SdfPrimitive::Box { center: Vec3::new(0.0, 0.0, 3.0), half: Vec3::splat(0.5) }, medium: medium(0.1) };
        assert!(ShellScene::new(vec![a, e], camera(), env.clone(), None).is_ok());
        let f = ShellObject { shape: SdfPrimitive::Box { center: Vec3::new(0.0, 0.0, 1.6), half: Vec3::splat(0.5) }, medium: medium(0.1) };
        assert!(ShellScene::new(vec![a, f], camera(), env, None).is_err());
    }

    #[test]
    fn camera_centre_ray() {
        let c = Camera { position: Vec3::new(0.0, 0.0, 5.0), look_at: Vec3::ZERO, up: Vec3::Y, vfov_deg: 30.0, width: 4, height: 4 };
        let (_, d) = c.ray(2.0, 2.0);
        assert!((d.z() + 1.0).abs() < 1e-15);
        let (_, top) = c.ray(2.0, 0.0);
        assert!(top.y() > 0.0);
        let (_, right) = c.ray(4.0, 2.0);
        assert!(right.x() > 0.0);
        assert!((right.dot(d).acos() - 15f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn latlong_lookup() {
        let env = Environment::LatLong { width: 2, height: 2, texels: vec![Rgb::splat(1.0), Rgb::splat(2.0), Rgb::splat(3.0), Rgb::splat(4.0)] };
        assert_eq!(env.radiance(Direction::UP), Rgb::splat(1.0));
        assert_eq!(env.radiance(Direction::DOWN), Rgb::splat(3.0));
        assert_eq!(env.radiance(Direction::new(-1.0, -0.1, 0.1)), Rgb::splat(2.0));
    }

    proptest! {
        #[test]
        fn sdf_is_one_lipschitz(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0,
                                dx in -0.5f64..0.5, dy in -0.5f64..0.5, dz in -0.5f64..0.5) {
            let p = Vec3::new(x, y, z);
            let q = p + Vec3::new(dx, dy, dz);
            for s in [SdfPrimitive::Sphere { center: Vec3::ZERO, radius: 1.0 },
                      SdfPrimitive::Box { center: Vec3::ZERO, half: Vec3::new(1.0, 0.5, 0.2) }] {
                prop_assert!((s.sdf(p) - s.sdf(q)).abs() <= (p - q).length() + 1e-12);
            }
        }
    }
}
