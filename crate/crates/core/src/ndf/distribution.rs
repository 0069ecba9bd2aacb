//! Normal distributions: the two height-field classics and the full-sphere
//! distribution induced by a Gaussian-process SDF, plus its gradient density.

use super::kernel::RoughnessTriple;
use crate::error::{Error, Result};
use crate::math::quadrature::adaptive_gauss_legendre;
use crate::math::special::{erfc, SQRT_PI};
use crate::math::{Direction, SphericalAngles};
use std::f64::consts::PI;

/// Anisotropic Beckmann distribution; zero on the lower hemisphere.
pub fn beckmann_ndf(wm: Direction, ax: f64, ay: f64) -> f64 {
    let z = wm.z();
    if z <= 0.0 {
        return 0.0;
    }
    let z2 = z * z;
    let s = (wm.x() / ax).powi(2) + (wm.y() / ay).powi(2);
    (-s / z2).exp() / (PI * ax * ay * z2 * z2)
}

/// Anisotropic GGX (Trowbridge–Reitz); zero on the lower hemisphere.
pub fn ggx_ndf(wm: Direction, ax: f64, ay: f64) -> f64 {
    let z = wm.z();
    if z <= 0.0 {
        return 0.0;
    }
    let s = (wm.x() / ax).powi(2) + (wm.y() / ay).powi(2);
    let d = s + z * z;
    1.0 / (PI * ax * ay * d * d)
}

/// Density of the SDF gradient at a surface point: N((0,0,1), diag(α²)/2).
pub fn gdf_pdf(g: [f64; 3], a3: &RoughnessTriple) -> f64 {
    let q = (g[0] / a3.ax).powi(2) + (g[1] / a3.ay).powi(2) + ((g[2] - 1.0) / a3.az).powi(2);
    (-q).exp() / (PI.powf(1.5) * a3.ax * a3.ay * a3.az)
}

/// Full-sphere NDF of a Gaussian-process SDF (requires az > 0).
pub fn generalized_ndf(wm: SphericalAngles, a3: RoughnessTriple) -> Result<f64> {
    check_az(&a3)?;
    Ok(generalized_ndf_dir(wm.direction(), &a3))
}

fn check_az(a3: &RoughnessTriple) -> Result<()> {
    if a3.az > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("generalized NDF needs az > 0, got {}", a3.az)))
    }
}

/// ∫₀^∞ u³ e^{-u² + 2su} du = e^{s²}·J(s) in closed form, where
/// J(s) = ½(s²+1)e^{-s²} + (√π/2)s(s²+3/2)erfc(−s).
fn j_closed(s: f64) -> f64 {
    0.5 * (s * s + 1.0) * (-s * s).exp() + 0.5 * SQRT_PI * s * (s * s + 1.5) * erfc(-s)
}

/// ∫₀^∞ u³ e^{-u² − pu} du for p = −2s ≥ 12, by the asymptotic series
/// Σ_k (−1)^k (2k+3)!/(k!·p^{2k+4}).
fn k_series(s: f64) -> f64 {
    let p = -2.0 * s;
    let ip2 = 1.0 / (p * p);
    let mut term = 6.0 * ip2 * ip2;
    let mut sum = term;
    for k in 0..60 {
        let kf = k as f64;
        let next = -term * (2.0 * kf + 4.0) * (2.0 * kf + 5.0) / (kf + 1.0) * ip2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Direction-valued evaluation; caller guarantees az > 0.
///
/// With S = x²/αx² + y²/αy², c = z and A = S + c²/αz² the density is
/// exp(−C + s²)·J(s)/(π^{3/2}αxαyαz A²) with s = c/(αz²√A), C = 1/αz².
/// The exponent −C + s² collapses to −S/(αz²S + c²), so nothing overflows;
/// for s ≪ 0 the closed form cancels and the series for e^{s²}J is used.
pub fn generalized_ndf_dir(wm: Direction, a3: &RoughnessTriple) -> f64 {
    let (ax, ay, az) = (a3.ax, a3.ay, a3.az);
    let az2 = az * az;
    let c = wm.z();
    let s_xy = (wm.x() / ax).powi(2) + (wm.y() / ay).powi(2);
    let a = s_xy + c * c / az2;
    let s = c / (az2 * a.sqrt());
    let ln_pref = -(PI.powf(1.5) * ax * ay * az).ln() - 2.0 * a.ln();
    if s >= -6.0 {
        let expo = -s_xy / (az2 * s_xy + c * c);
        (expo + ln_pref).exp() * j_closed(s)
    } else {
        (-1.0 / az2 + ln_pref).exp() * k_series(s)
    }
}

/// Oracle for [`generalized_ndf`]: ∫₀^∞ P(t·ω_m) t³ dt with P = [`gdf_pdf`],
/// by adaptive Gauss–Legendre until the relative change is below 1e-8.
pub fn ndf_from_gdf_quadrature(wm: SphericalAngles, a3: RoughnessTriple) -> Result<f64> {
    check_az(&a3)?;
    let w = wm.direction();
    let (x, y, z) = (w.x(), w.y(), w.z());
    // exponent −(A t² − 2B t + C): Gaussian factor in t centred at B/A
    let a = (x / a3.ax).powi(2) + (y / a3.ay).powi(2) + (z / a3.az).powi(2);
    let b = z / (a3.az * a3.az);
    let centre = (b / a).max(0.0);
    // Gaussian factor below 1e-14 of its peak beyond here (ln 1e14 ≈ 32.2)
    let upper = centre + (40.0 / a).sqrt();
    let f = |t: f64| gdf_pdf([t * x, t * y, t * z], &a3) * t * t * t;
    match adaptive_gauss_legendre(0.0, upper, 1e-8, 1 << 16, f) {
        Ok((v, _)) => Ok(v),
        Err((v, change)) => Err(Error::NumericFailure(format!(
            "gradient quadrature did not converge at θ={}, φ={}: estimate {v:e}, relative change {change:e}",
            wm.theta, wm.phi
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quadrature::SphereQuadrature;
    use crate::math::RandomStream;
    use crate::ndf::lambda::projected_area_dir;
    use proptest::prelude::*;

    fn iso(a: f64) -> RoughnessTriple {
        RoughnessTriple::isotropic(a).unwrap()
    }

    #[test]
    fn height_field_peaks() {
        assert!((beckmann_ndf(Direction::UP, 1.0, 1.0) - 1.0 / PI).abs() < 1e-15);
        assert!((ggx_ndf(Direction::UP, 1.0, 1.0) - 1.0 / PI).abs() < 1e-15);
        assert!((beckmann_ndf(Direction::UP, 0.3, 0.5) - 1.0 / (PI * 0.15)).abs() < 1e-12);
        let d = Direction::new(0.3, 0.1, -0.2);
        assert_eq!(beckmann_ndf(d, 1.0, 1.0), 0.0);
        assert_eq!(ggx_ndf(d, 1.0, 1.0), 0.0);
        assert_eq!(beckmann_ndf(Direction::new(1.0, 0.0, 0.0), 1.0, 1.0), 0.0);
    }

    #[test]
    fn height_field_normalization() {
        let q = SphereQuadrature::over_theta(0.0, PI / 2.0, 64, 128);
        for (ax, ay) in [(1.0, 1.0), (0.3, 0.6), (0.1, 0.1)] {
            let b = q.integrate(|m| m.z() * beckmann_ndf(m, ax, ay));
            assert!((b - 1.0).abs() < 1e-3, "beckmann {ax},{ay}: {b}");
        }
        // GGX has heavy tails; integrate more finely near the horizon
        for (ax, ay) in [(1.0, 1.0), (0.3, 0.6)] {
            let g = q.integrate(|m| m.z() * ggx_ndf(m, ax, ay));
            assert!((g - 1.0).abs() < 1e-3, "ggx {ax},{ay}: {g}");
        }
    }

    #[test]
    fn gdf_peak() {
        assert!((gdf_pdf([0.0, 0.0, 1.0], &iso(1.0)) - 0.179_587_122_125_166_56).abs() < 1e-15);
    }

    #[test]
    fn gdf_moments_by_sampling() {
        // sample g = e_z + α·N(0, ½) and weigh by nothing: checks the
        // covariance convention that gdf_pdf claims
        let a = RoughnessTriple::new(1.0, 1.0, 1.0).unwrap();
        let mut rng = RandomStream::new(11, 0);
        let n = 1_000_000;
        let (mut m, mut v) = ([0.0; 3], [0.0; 3]);
        for _ in 0..n {
            let g = [
                a.ax * rng.normal() * 0.5f64.sqrt(),
                a.ay * rng.normal() * 0.5f64.sqrt(),
                1.0 + a.az * rng.normal() * 0.5f64.sqrt(),
            ];
            for i in 0..3 {
                m[i] += g[i];
                v[i] += (g[i] - [0.0, 0.0, 1.0][i]).powi(2);
            }
        }
        for i in 0..3 {
            let mean = m[i] / n as f64;
            let var = v[i] / n as f64;
            let se_mean = (0.5 / n as f64).sqrt();
            let se_var = (2.0 * 0.25 / n as f64).sqrt();
            assert!((mean - [0.0, 0.0, 1.0][i]).abs() < 3.0 * se_mean);
            assert!((var - 0.5).abs() < 3.0 * se_var);
        }
        // and gdf_pdf integrates to one over a box: ∫ by tensor midpoint rule
        let h = 0.05;
        let mut s = 0.0;
        let k = 100;
        for i in -k..k {
            for j in -k..k {
                for l in -k..k {
                    let g = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h, 1.0 + (l as f64 + 0.5) * h];
                    s += gdf_pdf(g, &a);
                }
            }
        }
        assert!((s * h * h * h - 1.0).abs() < 1e-6);
    }

    #[test]
    fn generalized_peak_value() {
        let d = generalized_ndf(SphericalAngles::new(0.0, 0.0), iso(1.0)).unwrap();
        assert!((d - 0.799_253_759_722_249_5).abs() < 1e-12, "{d}");
        let q = ndf_from_gdf_quadrature(SphericalAngles::new(0.0, 0.0), iso(1.0)).unwrap();
        assert!((q - 0.799_253_759_722_249_5).abs() < 1e-9, "{q}");
    }

    #[test]
    fn generalized_rejects_height_field() {
        let hf = RoughnessTriple::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(generalized_ndf(SphericalAngles::new(0.0, 0.0), hf), Err(Error::Domain(_))));
        assert!(ndf_from_gdf_quadrature(SphericalAngles::new(0.0, 0.0), hf).is_err());
    }

    #[test]
    fn beckmann_limit() {
        let a = RoughnessTriple::new(1.0, 1.0, 1e-4).unwrap();
        let d = generalized_ndf(SphericalAngles::new(0.0, 0.0), a).unwrap();
        assert!((d - 1.0 / PI).abs() < 1e-3);
        let a = RoughnessTriple::new(1.0, 1.0, 1e-3).unwrap();
        for t in 0..=60 {
            let w = SphericalAngles::from_degrees(t as f64, 17.0);
            let g = generalized_ndf(w, a).unwrap();
            let b = beckmann_ndf(w.direction(), 1.0, 1.0);
            assert!(((g - b) / b).abs() < 0.01, "θ={t}: {g} vs {b}");
        }
        // no downward normals in the limit
        let down = generalized_ndf(SphericalAngles::new(PI, 0.0), RoughnessTriple::new(1.0, 1.0, 0.01).unwrap()).unwrap();
        assert!(down < 1e-300);
        // the quadrature oracle trends the same way
        let q = ndf_from_gdf_quadrature(SphericalAngles::new(0.0, 0.0), a).unwrap();
        assert!((q - 1.0 / PI).abs() < 1e-3 * 3.0, "{q}");
    }

    #[test]
    fn series_branch_continuous() {
        // choose a direction where s crosses −6
        let a = RoughnessTriple::new(1.0, 1.0, 0.2).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..2000 {
            let t = PI * (0.5 + 0.5 * i as f64 / 2000.0);
            let w = SphericalAngles::new(t, 0.0).direction();
            let az2 = a.az * a.az;
            let s_xy = w.x() * w.x();
            let aa = s_xy + w.z() * w.z() / az2;
            let s = w.z() / (az2 * aa.sqrt());
            let d = generalized_ndf_dir(w, &a);
            if let Some((ps, pd)) = prev {
                if ps >= -6.0 && s < -6.0 {
                    assert!(((d - pd) / d).abs() < 0.01, "{pd} → {d}");
                }
            }
            prev = Some((s, d));
        }
        // series against the closed form where both are accurate
        for s in [-6.0f64, -7.0, -9.0] {
            let direct = (s * s).exp() * j_closed(s);
            assert!(((k_series(s) - direct) / direct).abs() < 1e-6, "s={s}");
        }
    }

    #[test]
    fn oracle_equivalence_grid() {
        for alpha in [0.3, 0.6, 1.0] {
            let a = iso(alpha);
            for ti in 0..=12 {
                for pi in 0..3 {
                    let w = SphericalAngles::from_degrees(15.0 * ti as f64, 45.0 * pi as f64);
                    let d = generalized_ndf(w, a).unwrap();
                    let q = ndf_from_gdf_quadrature(w, a).unwrap();
                    assert!(((d - q) / q).abs() <= 1e-6, "α={alpha} θ={} φ={}: {d} vs {q}", 15 * ti, 45 * pi);
                }
            }
        }
        let a = RoughnessTriple::new(0.3, 0.8, 0.5).unwrap();
        for ti in 0..=12 {
            let w = SphericalAngles::from_degrees(15.0 * ti as f64, 30.0);
            let d = generalized_ndf(w, a).unwrap();
            let q = ndf_from_gdf_quadrature(w, a).unwrap();
            assert!(((d - q) / q).abs() <= 1e-6);
        }
    }

    #[test]
    fn pole_continuity_anisotropic() {
        let a = RoughnessTriple::new(0.3, 0.9, 0.6).unwrap();
        for pole in [0.0, PI] {
            let d0 = generalized_ndf(SphericalAngles::new(pole, 0.0), a).unwrap();
            for k in 0..8 {
                let phi = k as f64 * PI / 4.0;
                let near = generalized_ndf(SphericalAngles::new((pole - 1e-7).abs(), phi), a).unwrap();
                assert!(((near - d0) / d0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn full_sphere_integrals() {
        let q = SphereQuadrature::new(96, 96);
        let omega_g = Direction::UP;
        for a in [iso(1.0), iso(0.3), RoughnessTriple::new(0.4, 0.8, 0.6).unwrap()] {
            let clamped = q.integrate(|m| m.z().max(0.0) * generalized_ndf_dir(m, &a));
            let expect = 1.0 + projected_area_dir(omega_g, &a);
            assert!((clamped - expect).abs() < 1e-3, "{clamped} vs {expect}");
        }
    }

    #[test]
    fn signed_projected_area() {
        let q = SphereQuadrature::new(96, 96);
        let mut rng = RandomStream::new(5, 0);
        for _ in 0..6 {
            let a = RoughnessTriple::new(0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()).unwrap();
            let w = SphericalAngles::new((2.0 * rng.uniform() - 1.0).acos(), 2.0 * PI * rng.uniform()).direction();
            let s = q.integrate(|m| w.dot(m) * generalized_ndf_dir(m, &a));
            assert!((s - w.z()).abs() < 1e-3, "{s} vs {}", w.z());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn clamped_cosine_gives_projected_area(t in 0.0f64..PI, p in 0.0f64..(2.0 * PI),
                                               ax in 0.3f64..1.5, ay in 0.3f64..1.5, az in 0.3f64..1.5) {
            let a = RoughnessTriple::new(ax, ay, az).unwrap();
            let w = SphericalAngles::new(t, p).direction();
            let q = SphereQuadrature::new(48, 64);
            let num = q.integrate(|m| (-w.dot(m)).max(0.0) * generalized_ndf_dir(m, &a));
            let s = projected_area_dir(w, &a);
            prop_assert!((num - s).abs() < 2e-3 * (1.0 + s), "{num} vs {s}");
        }

        #[test]
        fn generalized_nonnegative(t in 0.0f64..PI, p in 0.0f64..(2.0 * PI),
                                   ax in 0.01f64..3.0, ay in 0.01f64..3.0, az in 0.01f64..3.0) {
            let a = RoughnessTriple::new(ax, ay, az).unwrap();
            let d = generalized_ndf(SphericalAngles::new(t, p), a).unwrap();
            prop_assert!(d >= 0.0 && d.is_finite());
        }
    }
}
