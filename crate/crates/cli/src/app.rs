use crate::config::{direction_from_degrees, Config, KernelSpec};
use crate::csv::{format_real, Cell, Table};
use clap::{Args, Parser, Subcommand, ValueEnum};
use macrofacet::gp::{empirical_transmittance, empirical_vndf, ensemble_radiance, EnsembleScene, GridSpec, OracleOptions, SphereBins};
use macrofacet::math::quadrature::SphereQuadrature;
use macrofacet::math::{Direction, Rgb, SphericalAngles, Vec3};
use macrofacet::medium::{planar_transmittance, Fresnel, MacrofacetMedium};
use macrofacet::ndf::{generalized_lambda, projected_area, Microsurface, NdfKind};
use macrofacet::render::{render, write_image, ImageFormat};
use macrofacet::scene::{Camera, Environment};
use macrofacet::validate::{run_suites, Fault, Suite, ValidateOptions};
use macrofacet::{Error, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit status when a validation check fails.
pub const EXIT_VALIDATION_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "macrofacet", version, about = "Macrofacet media: render, tabulate, validate and compare against Gaussian-process surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene file to PFM or PPM.
    Render(RenderArgs),
    /// Tabulate closed-form curves as CSV.
    Curves(CurvesArgs),
    /// Run invariant suites; exits with 4 if any check fails.
    Validate(ValidateArgs),
    /// Brute-force Gaussian-process experiments.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub spp: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// pfm or ppm; defaults to the config, or the extension of --out.
    #[arg(long)]
    pub format: Option<String>,
}

/// Surface statistics shared by `curves` and `oracle`.
#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Isotropic roughness; shorthand for equal --ax/--ay/--az.
    #[arg(long, conflicts_with_all = ["ax", "ay", "az", "lx", "ly", "lz"])]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub ax: Option<f64>,
    #[arg(long)]
    pub ay: Option<f64>,
    #[arg(long)]
    pub az: Option<f64>,
    /// Correlation lengths instead of roughness.
    #[arg(long, conflicts_with_all = ["ax", "ay", "az"])]
    pub lx: Option<f64>,
    #[arg(long)]
    pub ly: Option<f64>,
    #[arg(long)]
    pub lz: Option<f64>,
    #[arg(long, default_value = "generalized")]
    pub ndf: String,
}

impl SurfaceArgs {
    fn spec(&self) -> Result<KernelSpec> {
        let sigma = self.sigma;
        if self.lx.is_some() || self.ly.is_some() || self.lz.is_some() {
            return match (self.lx, self.ly, self.lz) {
                (Some(lx), Some(ly), Some(lz)) => Ok(KernelSpec::Lengths { sigma, lx, ly, lz }),
                _ => Err(Error::Config("--lx, --ly and --lz must be given together".into())),
            };
        }
        let a = self.alpha.unwrap_or(1.0);
        Ok(KernelSpec::Roughness { sigma, ax: self.ax.unwrap_or(a), ay: self.ay.unwrap_or(a), az: self.az.unwrap_or(a) })
    }

    fn kind(&self) -> Result<NdfKind> {
        self.ndf.parse()
    }

    fn echo(&self) -> Result<Vec<(String, String)>> {
        let spec = self.spec()?;
        let a = spec.roughness()?;
        let mut v = vec![("ndf".to_string(), self.kind()?.to_string()), ("sigma".into(), format_real(spec.sigma()))];
        if let KernelSpec::Lengths { lx, ly, lz, .. } = spec {
            v.extend([("lx".into(), format_real(lx)), ("ly".into(), format_real(ly)), ("lz".into(), format_real(lz))]);
        }
        v.extend([("ax".into(), format_real(a.ax)), ("ay".into(), format_real(a.ay)), ("az".into(), format_real(a.az))]);
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Lambda,
    Ndf,
    Vndf,
    Transmittance,
    ProjectedArea,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CurvesArgs {
    #[arg(value_enum)]
    pub kind: CurveKind,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Polar-angle grid in degrees (lambda, ndf, projected-area).
    #[arg(long)]
    pub theta_min: Option<f64>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub theta_step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Angle of the incoming ray from the downward vertical, degrees.
    #[arg(long)]
    pub incidence: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub incidence_phi: f64,
    #[arg(long, default_value_t = 8)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 8)]
    pub n_phi: usize,
    /// Start height of transmittance rays.
    #[arg(long, default_value_t = 0.0)]
    pub z0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// all, or one of the suite names.
    pub suite: String,
    /// Tolerance override `check=value` or `suite/check=value`; repeatable.
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    GpTransmittance,
    GpVndf,
    GpEnsemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FresnelChoice {
    Gold,
    One,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub rays: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV for tables, PFM for gp-ensemble.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid points per axis (default: sized from the kernel).
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub grid_spacing: Option<f64>,
    #[arg(long, default_value_t = 45.0)]
    pub incidence: f64,
    #[arg(long, default_value_t = 0.0)]
    pub incidence_phi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub z0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub t_step: f64,
    #[arg(long, default_value_t = 8)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 8)]
    pub n_phi: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    #[arg(long, default_value_t = 16)]
    pub height: usize,
    #[arg(long, default_value_t = 4)]
    pub spp: usize,
    #[arg(long, default_value_t = 16)]
    pub max_bounces: usize,
    #[arg(long, value_enum, default_value_t = FresnelChoice::Gold)]
    pub fresnel: FresnelChoice,
    /// Constant environment radiance.
    #[arg(long, default_value_t = 1.0)]
    pub environment: f64,
    /// Camera elevation above the mean plane, degrees.
    #[arg(long, default_value_t = 45.0)]
    pub camera_elevation: f64,
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn cmd_render(a: RenderArgs) -> Result<i32> {
    let cfg = Config::load(&a.config)?;
    let scene = cfg.build_scene()?;
    let mut settings = cfg.render_settings();
    if let Some(s) = a.spp {
        settings.spp = s;
    }
    if let Some(s) = a.seed {
        settings.seed = s;
    }
    let out = match &a.out {
        Some(p) => p.clone(),
        None => cfg.base_dir.join(&cfg.render.out),
    };
    let format = match (&a.format, &a.out) {
        (Some(f), _) => f.parse()?,
        (None, Some(p)) => match p.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ppm") => ImageFormat::Ppm,
            Some(e) if e.eq_ignore_ascii_case("pfm") => ImageFormat::Pfm,
            _ => cfg.render.format,
        },
        (None, None) => cfg.render.format,
    };
    let start = Instant::now();
    let img = render(&scene, &settings)?;
    let secs = start.elapsed().as_secs_f64();
    write_image(&img, &out, format)?;
    println!(
        "rendered {}x{} at {} spp in {secs:.3} s -> {}",
        img.width,
        img.height,
        settings.spp,
        out.display()
    );
    Ok(0)
}

fn angle_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::Domain(format!("bad angle grid {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

fn distance_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("bad distance grid 0..{t_max} step {step}")));
    }
    let n = (t_max / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| step * i as f64).collect())
}

fn check_incidence(deg: f64) -> Result<()> {
    if (0.0..90.0).contains(&deg) {
        Ok(())
    } else {
        Err(Error::Domain(format!("incidence must lie in [0, 90) degrees, got {deg}")))
    }
}

/// Propagation direction of a ray arriving from above at `deg` off the nadir.
fn incoming(deg: f64, phi_deg: f64) -> SphericalAngles {
    SphericalAngles::from_degrees(180.0 - deg, phi_deg)
}

fn cmd_curves(a: CurvesArgs) -> Result<i32> {
    let spec = a.surface.spec()?;
    let rough = spec.roughness()?;
    let kind = a.surface.kind()?;
    let ms = Microsurface::new(kind, rough)?;
    let mut params = a.surface.echo()?;
    let name = a.kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let table = match a.kind {
        CurveKind::Lambda | CurveKind::Ndf | CurveKind::ProjectedArea => {
            let max_default = if a.kind == CurveKind::Lambda { 89.0 } else { 180.0 };
            let thetas = angle_grid(a.theta_min.unwrap_or(0.0), a.theta_max.unwrap_or(max_default), a.theta_step)?;
            params.push(("theta_deg".into(), format!("{}..{} step {}", thetas[0], thetas[thetas.len() - 1], a.theta_step)));
            params.push(("phi_deg".into(), format_real(a.phi)));
            match a.kind {
                CurveKind::Lambda => {
                    let mut t = Table::new(&["theta_deg", "phi_deg", "lambda", "projected_area"]);
                    for &th in &thetas {
                        let w = SphericalAngles::from_degrees(th, a.phi);
                        t.push(vec![th.into(), a.phi.into(), generalized_lambda(w, rough)?.into(), projected_area(w, rough).into()]);
                    }
                    t
                }
                CurveKind::Ndf => {
                    let mut t = Table::new(&["theta_m_deg", "phi_m_deg", "ndf_per_sr"]);
                    for &th in &thetas {
                        let m = direction_from_degrees(th, a.phi);
                        t.push(vec![th.into(), a.phi.into(), ms.ndf(m).into()]);
                    }
                    t
                }
                _ => {
                    // σ(ω) beside the vNDF normalizer ∫⟨−ω, m⟩⁺ D(m) dm
                    let q = SphereQuadrature::new(32, 64);
                    let mut t = Table::new(&["theta_deg", "phi_deg", "projected_area", "normalizer_quadrature"]);
                    for &th in &thetas {
                        let w = direction_from_degrees(th, a.phi);
                        let num = q.integrate(|m| (-w.dot(m)).max(0.0) * ms.ndf(m));
                        t.push(vec![th.into(), a.phi.into(), ms.projected_area(w).into(), num.into()]);
                    }
                    t
                }
            }
        }
        CurveKind::Vndf => {
            let inc = a.incidence.unwrap_or(0.0);
            check_incidence(inc)?;
            let wo = incoming(inc, a.incidence_phi).direction();
            let bins = SphereBins { n_theta: a.n_theta, n_phi: a.n_phi };
            if bins.is_empty() {
                return Err(Error::Domain("need at least one histogram bin".into()));
            }
            ms.vndf(Direction::UP, wo)?;
            params.extend([
                ("incidence_deg".into(), format_real(inc)),
                ("incidence_phi_deg".into(), format_real(a.incidence_phi)),
                ("bins".into(), format!("{} x {} equal-area (cos theta, phi)", a.n_theta, a.n_phi)),
            ]);
            let mut t = bin_table(&["vndf_per_sr"]);
            for b in 0..bins.len() {
                let avg = bins.bin_average(b, &|m| ms.vndf(m, wo).unwrap_or(0.0));
                t.push(bin_row(&bins, b, &[avg]));
            }
            t
        }
        CurveKind::Transmittance => {
            let inc = a.incidence.unwrap_or(45.0);
            check_incidence(inc)?;
            let w = incoming(inc, a.incidence_phi);
            let m = MacrofacetMedium::new(kind, rough, spec.sigma())?;
            let ts = distance_grid(a.t_max, a.t_step)?;
            params.extend([
                ("incidence_deg".into(), format_real(inc)),
                ("z0".into(), format_real(a.z0)),
                ("t".into(), format!("0..{} step {}", a.t_max, a.t_step)),
            ]);
            let mut t = Table::new(&["t", "height", "transmittance"]);
            let dz = w.direction().z();
            for &s in &ts {
                let h = a.z0 + s * dz;
                t.push(vec![s.into(), h.into(), planar_transmittance(a.z0, h, w, &m)?.into()]);
            }
            t
        }
    };
    let mut table = table;
    table.header(&format!("curves {name}"), None, &params);
    table.write(a.out.as_deref())?;
    Ok(0)
}

fn bin_table(extra: &[&str]) -> Table {
    let mut cols = vec!["bin", "cos_theta_lo", "cos_theta_hi", "phi_lo_rad", "phi_hi_rad", "solid_angle_sr"];
    cols.extend_from_slice(extra);
    Table::new(&cols)
}

fn bin_row(bins: &SphereBins, b: usize, extra: &[f64]) -> Vec<Cell> {
    let ((u0, u1), (p0, p1)) = bins.bounds(b);
    let mut row: Vec<Cell> = vec![b.into(), u0.into(), u1.into(), p0.into(), p1.into(), bins.solid_angle().into()];
    row.extend(extra.iter().map(|&v| Cell::from(v)));
    row
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let suites = Suite::parse_list(&a.suite)?;
    let mut opts = ValidateOptions { seed: a.seed, ..Default::default() };
    for kv in &a.tol {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--tol expects name=value, got '{kv}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("--tol {k}: '{v}' is not a number")))?;
        opts.tolerances.insert(k.trim().to_string(), v);
    }
    if let Some(f) = &a.inject_fault {
        opts.fault = f.parse::<Fault>()?;
    }
    let checks = run_suites(&suites, &opts)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    for c in &checks {
        println!("{c}");
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { EXIT_VALIDATION_FAILED })
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    let spec = a.surface.spec()?;
    let kernel = spec.kernel()?;
    let rough = spec.roughness()?;
    let kind = a.surface.kind()?;
    let default_m = if a.experiment == Experiment::GpEnsemble { 64 } else { 256 };
    let grid = match (a.grid_n, a.grid_spacing) {
        (None, None) => None,
        (n, s) => {
            let auto = GridSpec::auto(&kernel)?;
            let n = n.unwrap_or(auto.dims[0]);
            Some(GridSpec { dims: [n; 3], spacing: s.unwrap_or(auto.spacing) })
        }
    };
    let opts = OracleOptions {
        realizations: a.realizations.unwrap_or(default_m),
        rays_per_realization: a.rays,
        seed: a.seed,
        grid,
    };
    let mut params = a.surface.echo()?;
    params.extend([
        ("realizations".into(), opts.realizations.to_string()),
        ("rays_per_realization".into(), opts.rays_per_realization.to_string()),
    ]);
    if let Some(g) = grid {
        params.push(("grid".into(), format!("{}^3 spacing {}", g.dims[0], format_real(g.spacing))));
    }
    // summaries go to stderr when the table itself is on stdout
    let to_stdout = a.out.as_deref().is_none_or(|p| p == Path::new("-"));
    let say = |s: String| if to_stdout { eprintln!("{s}") } else { println!("{s}") };
    match a.experiment {
        Experiment::GpTransmittance => {
            check_incidence(a.incidence)?;
            let w = incoming(a.incidence, a.incidence_phi);
            let ts = distance_grid(a.t_max, a.t_step)?;
            let rows = empirical_transmittance(kernel, a.z0, w, &ts, &opts)?;
            let m = MacrofacetMedium::new(kind, rough, spec.sigma())?;
            params.extend([
                ("incidence_deg".into(), format_real(a.incidence)),
                ("z0".into(), format_real(a.z0)),
                ("t".into(), format!("0..{} step {}", a.t_max, a.t_step)),
            ]);
            let mut t = Table::new(&["t", "tr_oracle", "std_error", "tr_closed_form"]);
            t.header("oracle gp-transmittance", Some(a.seed), &params);
            let dz = w.direction().z();
            let mut worst: f64 = 0.0;
            for r in &rows {
                let cf = planar_transmittance(a.z0, a.z0 + r.t * dz, w, &m)?;
                if cf >= 0.3 {
                    worst = worst.max((r.tr - cf).abs());
                }
                t.push(vec![r.t.into(), r.tr.into(), r.std_error.into(), cf.into()]);
            }
            t.write(a.out.as_deref())?;
            say(format!("gp-transmittance: max |oracle - closed form| where closed form >= 0.3: {worst:.6}"));
        }
        Experiment::GpVndf => {
            check_incidence(a.incidence)?;
            let wo = incoming(a.incidence, a.incidence_phi).direction();
            let bins = SphereBins { n_theta: a.n_theta, n_phi: a.n_phi };
            let h = empirical_vndf(kernel, &[wo], bins, &opts)?.remove(0);
            let ms = Microsurface::new(kind, rough)?;
            let analytic = |m| ms.vndf(m, wo).unwrap_or(0.0);
            params.extend([
                ("incidence_deg".into(), format_real(a.incidence)),
                ("incidence_phi_deg".into(), format_real(a.incidence_phi)),
                ("bins".into(), format!("{} x {} equal-area (cos theta, phi)", a.n_theta, a.n_phi)),
            ]);
            let mut t = bin_table(&["density_per_sr", "std_error_per_sr", "analytic_per_sr"]);
            t.header("oracle gp-vndf", Some(a.seed), &params);
            for b in 0..bins.len() {
                t.push(bin_row(&bins, b, &[h.density[b], h.std_error[b], bins.bin_average(b, &analytic)]));
            }
            t.write(a.out.as_deref())?;
            say(format!(
                "gp-vndf: {} hits from {} rays, integral {:.9}, L1 distance to analytic {:.6}",
                h.hits,
                h.rays,
                h.integral(),
                h.l1_distance(analytic)
            ));
        }
        Experiment::GpEnsemble => {
            let e = a.camera_elevation.to_radians();
            if !(e > 0.0 && e <= std::f64::consts::FRAC_PI_2) {
                return Err(Error::Domain(format!("camera elevation must lie in (0, 90], got {}", a.camera_elevation)));
            }
            let dist = 4.0 * kernel.max_length().max(spec.sigma());
            let camera = Camera {
                position: Vec3::new(0.0, -dist * e.cos(), dist * e.sin()),
                look_at: Vec3::ZERO,
                up: if e.cos() < 1e-9 { Vec3::Y } else { Vec3::Z },
                vfov_deg: 30.0,
                width: a.width,
                height: a.height,
            };
            let env = Rgb::splat(a.environment);
            if !env.is_valid() {
                return Err(Error::Domain("environment radiance must be finite and non-negative".into()));
            }
            let scene = EnsembleScene {
                camera,
                environment: Environment::Constant(env),
                fresnel: match a.fresnel {
                    FresnelChoice::Gold => Fresnel::GOLD,
                    FresnelChoice::One => Fresnel::One,
                },
                max_bounces: a.max_bounces,
            };
            let img = ensemble_radiance(kernel, &scene, a.spp, &opts)?;
            if let Some(p) = a.out.as_deref() {
                write_image(&img.image, p, ImageFormat::Pfm)?;
            }
            let mean = img.image.mean().mean();
            let se = img.std_error.iter().map(|s| s.mean()).sum::<f64>() / img.std_error.len() as f64;
            println!(
                "gp-ensemble: {}x{} at {} spp over {} realizations, mean pixel {mean:.6} (mean per-pixel std error {se:.6})",
                a.width, a.height, a.spp, opts.realizations
            );
        }
    }
    Ok(0)
}
