//! Gauss–Legendre rules and a product rule on the sphere.

use super::vec::{Direction, SphericalAngles};
use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_a^b f with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Composite Gauss–Legendre, doubling the panel count until the relative
/// change drops below `rel_tol`. Returns the estimate and the last change, or
/// `None` if `max_panels` is reached first.
pub fn adaptive_gauss_legendre(
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<(f64, f64), (f64, f64)> {
    let rule = GaussLegendre::new(8);
    let mut panels = 4;
    let mut prev = rule.integrate_composite(a, b, panels, &mut f);
    loop {
        panels *= 2;
        let cur = rule.integrate_composite(a, b, panels, &mut f);
        let change = (cur - prev).abs();
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        if change <= rel_tol * scale {
            return Ok((cur, change / scale));
        }
        if panels >= max_panels {
            return Err((cur, change / scale));
        }
        prev = cur;
    }
}

/// Product rule on the unit sphere: composite 8-point Gauss–Legendre in θ and
/// the midpoint rule in φ.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub points: Vec<(Direction, f64)>,
}

impl SphereQuadrature {
    pub fn new(theta_panels: usize, phi_steps: usize) -> Self {
        Self::over_theta(0.0, PI, theta_panels, phi_steps)
    }

    /// Restricted to θ ∈ [θ0, θ1].
    pub fn over_theta(theta0: f64, theta1: f64, theta_panels: usize, phi_steps: usize) -> Self {
        let rule = GaussLegendre::new(8);
        let h = (theta1 - theta0) / theta_panels as f64;
        let dphi = 2.0 * PI / phi_steps as f64;
        let mut points = Vec::with_capacity(theta_panels * 8 * phi_steps);
        for p in 0..theta_panels {
            let lo = theta0 + h * p as f64;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let theta = lo + 0.5 * h * (1.0 + x);
                let wt = w * 0.5 * h * theta.sin() * dphi;
                for j in 0..phi_steps {
                    let phi = (j as f64 + 0.5) * dphi;
                    points.push((SphericalAngles::new(theta, phi).direction(), wt));
                }
            }
        }
        SphereQuadrature { points }
    }

    pub fn integrate(&self, mut f: impl FnMut(Direction) -> f64) -> f64 {
        self.points.iter().map(|&(d, w)| w * f(d)).sum()
    }
}
