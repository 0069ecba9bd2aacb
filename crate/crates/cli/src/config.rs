//! Scene/run configuration: a flat sectioned `key = value` file.
//!
//! Lexing is done by `rust-ini` (full-line `#`/`;` comments, no inline
//! comments, no quoting). On top of that the schema is strict: unknown
//! sections, unknown keys and repeated keys are errors.

use ini::{Ini, ParseOption};
use macrofacet::math::{Direction, Rgb, Vec3};
use macrofacet::medium::{Fresnel, MacrofacetMedium};
use macrofacet::ndf::{roughness_from_kernel, KernelParams, NdfKind, RoughnessTriple};
use macrofacet::render::{read_pfm, ImageFormat, RenderSettings};
use macrofacet::scene::{Camera, Environment, SdfPrimitive, ShellObject, ShellScene, Sun};
use macrofacet::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// σ and correlation lengths of the process.
    Lengths { sigma: f64, lx: f64, ly: f64, lz: f64 },
    /// σ and roughness per axis; `az = 0` is a height field.
    Roughness { sigma: f64, ax: f64, ay: f64, az: f64 },
}

impl KernelSpec {
    pub fn sigma(&self) -> f64 {
        match *self {
            KernelSpec::Lengths { sigma, .. } | KernelSpec::Roughness { sigma, .. } => sigma,
        }
    }

    pub fn roughness(&self) -> Result<RoughnessTriple> {
        match *self {
            KernelSpec::Lengths { sigma, lx, ly, lz } => Ok(roughness_from_kernel(&KernelParams::new(sigma, lx, ly, lz)?)),
            KernelSpec::Roughness { ax, ay, az, .. } => RoughnessTriple::new(ax, ay, az),
        }
    }

    pub fn kernel(&self) -> Result<KernelParams> {
        match *self {
            KernelSpec::Lengths { sigma, lx, ly, lz } => KernelParams::new(sigma, lx, ly, lz),
            KernelSpec::Roughness { sigma, .. } => KernelParams::from_roughness(sigma, self.roughness()?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FresnelSpec {
    Gold,
    One,
    Conductor { eta: Rgb, k: Rgb },
}

impl FresnelSpec {
    pub fn fresnel(&self) -> Fresnel {
        match *self {
            FresnelSpec::Gold => Fresnel::GOLD,
            FresnelSpec::One => Fresnel::One,
            FresnelSpec::Conductor { eta, k } => Fresnel::Conductor { eta, k },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSection {
    pub ndf: NdfKind,
    pub fresnel: FresnelSpec,
    pub mix_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    Constant(Rgb),
    /// Equirectangular PFM, resolved relative to the config file.
    Map(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSection {
    /// The `[scene]` primitive (absent for `shape = none`) followed by one
    /// per `[object.NAME]` section, in file order.
    pub objects: Vec<(String, SdfPrimitive)>,
    pub camera: Camera,
    pub environment: EnvironmentSpec,
    pub sun: Option<(Vec3, Rgb)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSection {
    pub spp: usize,
    pub seed: u64,
    pub max_bounces: usize,
    pub format: ImageFormat,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSection {
    pub realizations: usize,
    pub rays_per_realization: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelSpec,
    pub medium: MediumSection,
    pub scene: SceneSection,
    pub render: RenderSection,
    pub oracle: OracleSection,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kernel: KernelSpec::Roughness { sigma: 0.05, ax: 0.5, ay: 0.5, az: 0.5 },
            medium: MediumSection { ndf: NdfKind::Generalized, fresnel: FresnelSpec::Gold, mix_ratio: MacrofacetMedium::DEFAULT_MIX_RATIO },
            scene: SceneSection {
                objects: vec![("scene".into(), SdfPrimitive::Plane { z0: 0.0 })],
                camera: Camera {
                    position: Vec3::new(0.0, -4.0, 3.0),
                    look_at: Vec3::ZERO,
                    up: Vec3::Z,
                    vfov_deg: 40.0,
                    width: 64,
                    height: 64,
                },
                environment: EnvironmentSpec::Constant(Rgb::WHITE),
                sun: None,
            },
            render: RenderSection {
                spp: 16,
                seed: 0,
                max_bounces: 64,
                format: ImageFormat::Pfm,
                out: PathBuf::from("out.pfm"),
            },
            oracle: OracleSection { realizations: 256, rays_per_realization: 64, seed: 0 },
            base_dir: PathBuf::from("."),
        }
    }
}

/// Keys of one section, consumed as they are read so leftovers can be
/// reported.
struct Section {
    name: String,
    keys: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.keys.remove(key)
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("[{}] {key}: {msg}", self.name))
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key)
            .map(|v| v.parse::<f64>().map_err(|_| self.err(key, format!("expected a number, got '{v}'"))))
            .transpose()
    }

    fn int<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|v| v.parse::<T>().map_err(|_| self.err(key, format!("expected a non-negative integer, got '{v}'"))))
            .transpose()
    }

    fn triple(&mut self, key: &str) -> Result<Option<[f64; 3]>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let nums: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
        if parts.len() != 3 || nums.len() != 3 {
            return Err(self.err(key, format!("expected three comma-separated numbers, got '{v}'")));
        }
        Ok(Some([nums[0], nums[1], nums[2]]))
    }

    fn vec3(&mut self, key: &str) -> Result<Option<Vec3>> {
        Ok(self.triple(key)?.map(|[x, y, z]| Vec3::new(x, y, z)))
    }

    fn rgb(&mut self, key: &str) -> Result<Option<Rgb>> {
        Ok(self.triple(key)?.map(Rgb))
    }

    fn finish(self) -> Result<()> {
        match self.keys.keys().next() {
            Some(k) => Err(Error::Config(format!("unknown key '{k}' in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn fmt_triple(v: [f64; 3]) -> String {
    format!("{:?}, {:?}, {:?}", v[0], v[1], v[2])
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let mut c = Self::parse(&text)?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let opt = ParseOption { enabled_quote: false, enabled_escape: false, ..Default::default() };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| Error::Config(format!("syntax error: {e}")))?;
        let mut sections: Vec<Section> = Vec::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::Config(format!("key '{k}' appears before any [section]")));
                }
                continue;
            };
            if sections.iter().any(|s| s.name == name) {
                return Err(Error::Config(format!("section [{name}] appears twice")));
            }
            let mut keys = BTreeMap::new();
            for (k, v) in props.iter() {
                if keys.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(Error::Config(format!("key '{k}' repeated in [{name}]")));
                }
            }
            sections.push(Section { name: name.to_string(), keys });
        }
        let mut cfg = Config::default();
        let mut take = |name: &str| {
            let i = sections.iter().position(|s| s.name == name);
            i.map(|i| sections.remove(i)).unwrap_or(Section { name: name.into(), keys: BTreeMap::new() })
        };
        let kernel = take("kernel");
        let medium = take("medium");
        let scene = take("scene");
        let render = take("render");
        let oracle = take("oracle");
        cfg.parse_kernel(kernel)?;
        cfg.parse_medium(medium)?;
        cfg.parse_scene(scene)?;
        cfg.parse_render(render)?;
        cfg.parse_oracle(oracle)?;
        let mut objects = Vec::new();
        for s in sections {
            let Some(obj) = s.name.strip_prefix("object.") else {
                return Err(Error::Config(format!("unknown section [{}]", s.name)));
            };
            if obj.is_empty() || obj == "scene" {
                return Err(Error::Config(format!("invalid object name in [{}]", s.name)));
            }
            let name = obj.to_string();
            let mut s = s;
            match parse_shape(&mut s, false)? {
                Some(p) => objects.push((name, p)),
                None => return Err(s.err("shape", "objects need a shape")),
            }
            s.finish()?;
        }
        cfg.scene.objects.extend(objects);
        Ok(cfg)
    }

    fn parse_kernel(&mut self, mut s: Section) -> Result<()> {
        let sigma = s.real("sigma")?.unwrap_or(self.kernel.sigma());
        let lengths = [s.real("lx")?, s.real("ly")?, s.real("lz")?];
        let rough = [s.real("ax")?, s.real("ay")?, s.real("az")?];
        let any_l = lengths.iter().any(Option::is_some);
        let any_a = rough.iter().any(Option::is_some);
        self.kernel = match (any_l, any_a) {
            (true, true) => {
                return Err(s.err("lx/ax", "give either correlation lengths (lx, ly, lz) or roughness (ax, ay, az), not both"))
            }
            (true, false) => match lengths {
                [Some(lx), Some(ly), Some(lz)] => KernelSpec::Lengths { sigma, lx, ly, lz },
                _ => return Err(s.err("lx", "lx, ly and lz must be given together")),
            },
            (false, true) => match rough {
                [Some(ax), Some(ay), Some(az)] => KernelSpec::Roughness { sigma, ax, ay, az },
                _ => return Err(s.err("ax", "ax, ay and az must be given together")),
            },
            (false, false) => match self.kernel {
                KernelSpec::Roughness { ax, ay, az, .. } => KernelSpec::Roughness { sigma, ax, ay, az },
                KernelSpec::Lengths { lx, ly, lz, .. } => KernelSpec::Lengths { sigma, lx, ly, lz },
            },
        };
        s.finish()
    }

    fn parse_medium(&mut self, mut s: Section) -> Result<()> {
        if let Some(v) = s.take("ndf") {
            self.medium.ndf = v.parse().map_err(|e: Error| s.err("ndf", e))?;
        }
        let eta = s.rgb("eta")?;
        let k = s.rgb("k")?;
        match s.take("fresnel").as_deref() {
            None | Some("gold") if eta.is_none() && k.is_none() => {}
            Some("one") if eta.is_none() && k.is_none() => self.medium.fresnel = FresnelSpec::One,
            Some("conductor") => match (eta, k) {
                (Some(eta), Some(k)) => self.medium.fresnel = FresnelSpec::Conductor { eta, k },
                _ => return Err(s.err("fresnel", "conductor needs both eta and k")),
            },
            Some(f @ ("gold" | "one")) => return Err(s.err("eta/k", format!("only valid with fresnel = conductor, not {f}"))),
            None => return Err(s.err("eta/k", "only valid with fresnel = conductor")),
            Some(other) => return Err(s.err("fresnel", format!("expected gold, one or conductor, got '{other}'"))),
        }
        if let Some(r) = s.real("mix_ratio")? {
            self.medium.mix_ratio = r;
        }
        s.finish()
    }

    fn parse_scene(&mut self, mut s: Section) -> Result<()> {
        self.scene.objects = match parse_shape(&mut s, true)? {
            Some(p) => vec![("scene".into(), p)],
            None => Vec::new(),
        };
        let cam = &mut self.scene.camera;
        if let Some(v) = s.vec3("camera_position")? {
            cam.position = v;
        }
        if let Some(v) = s.vec3("camera_look_at")? {
            cam.look_at = v;
        }
        if let Some(v) = s.vec3("camera_up")? {
            cam.up = v;
        }
        if let Some(v) = s.real("fov_deg")? {
            cam.vfov_deg = v;
        }
        if let Some(v) = s.int("width")? {
            cam.width = v;
        }
        if let Some(v) = s.int("height")? {
            cam.height = v;
        }
        match (s.rgb("environment")?, s.take("environment_map")) {
            (Some(_), Some(_)) => return Err(s.err("environment", "give environment or environment_map, not both")),
            (Some(c), None) => self.scene.environment = EnvironmentSpec::Constant(c),
            (None, Some(p)) => self.scene.environment = EnvironmentSpec::Map(PathBuf::from(p)),
            (None, None) => {}
        }
        self.scene.sun = match (s.vec3("sun_direction")?, s.rgb("sun_irradiance")?) {
            (Some(d), Some(e)) => Some((d, e)),
            (None, None) => None,
            _ => return Err(s.err("sun_direction", "sun_direction and sun_irradiance must be given together")),
        };
        s.finish()
    }

    fn parse_render(&mut self, mut s: Section) -> Result<()> {
        let r = &mut self.render;
        if let Some(v) = s.int("spp")? {
            r.spp = v;
        }
        if let Some(v) = s.int("seed")? {
            r.seed = v;
        }
        if let Some(v) = s.int("max_bounces")? {
            r.max_bounces = v;
        }
        if let Some(v) = s.take("format") {
            r.format = v.parse().map_err(|e: Error| s.err("format", e))?;
        }
        if let Some(v) = s.take("out") {
            r.out = PathBuf::from(v);
        }
        s.finish()
    }

    fn parse_oracle(&mut self, mut s: Section) -> Result<()> {
        let o = &mut self.oracle;
        if let Some(v) = s.int("realizations")? {
            o.realizations = v;
        }
        if let Some(v) = s.int("rays_per_realization")? {
            o.rays_per_realization = v;
        }
        if let Some(v) = s.int("seed")? {
            o.seed = v;
        }
        s.finish()
    }

    /// Canonical text form; parsing it yields an identical configuration.
    pub fn to_ini_string(&self) -> String {
        let mut o = String::new();
        let w = &mut o;
        let _ = writeln!(w, "[kernel]");
        match self.kernel {
            KernelSpec::Lengths { sigma, lx, ly, lz } => {
                let _ = writeln!(w, "sigma = {sigma:?}\nlx = {lx:?}\nly = {ly:?}\nlz = {lz:?}");
            }
            KernelSpec::Roughness { sigma, ax, ay, az } => {
                let _ = writeln!(w, "sigma = {sigma:?}\nax = {ax:?}\nay = {ay:?}\naz = {az:?}");
            }
        }
        let _ = writeln!(w, "\n[medium]\nndf = {}", self.medium.ndf);
        match self.medium.fresnel {
            FresnelSpec::Gold => {
                let _ = writeln!(w, "fresnel = gold");
            }
            FresnelSpec::One => {
                let _ = writeln!(w, "fresnel = one");
            }
            FresnelSpec::Conductor { eta, k } => {
                let _ = writeln!(w, "fresnel = conductor\neta = {}\nk = {}", fmt_triple(eta.0), fmt_triple(k.0));
            }
        }
        let _ = writeln!(w, "mix_ratio = {:?}", self.medium.mix_ratio);

        let _ = writeln!(w, "\n[scene]");
        let mut objs = self.scene.objects.iter().peekable();
        match objs.peek() {
            Some((name, p)) if name == "scene" => {
                write_shape(w, p);
                objs.next();
            }
            _ => {
                let _ = writeln!(w, "shape = none");
            }
        }
        let c = &self.scene.camera;
        let v = |p: Vec3| fmt_triple([p.x, p.y, p.z]);
        let _ = writeln!(w, "camera_position = {}", v(c.position));
        let _ = writeln!(w, "camera_look_at = {}", v(c.look_at));
        let _ = writeln!(w, "camera_up = {}", v(c.up));
        let _ = writeln!(w, "fov_deg = {:?}\nwidth = {}\nheight = {}", c.vfov_deg, c.width, c.height);
        match &self.scene.environment {
            EnvironmentSpec::Constant(e) => {
                let _ = writeln!(w, "environment = {}", fmt_triple(e.0));
            }
            EnvironmentSpec::Map(p) => {
                let _ = writeln!(w, "environment_map = {}", p.display());
            }
        }
        if let Some((d, e)) = self.scene.sun {
            let _ = writeln!(w, "sun_direction = {}\nsun_irradiance = {}", v(d), fmt_triple(e.0));
        }

        let r = &self.render;
        let fmt = match r.format {
            ImageFormat::Pfm => "pfm",
            ImageFormat::Ppm => "ppm",
        };
        let _ = writeln!(
            w,
            "\n[render]\nspp = {}\nseed = {}\nmax_bounces = {}\nformat = {fmt}\nout = {}",
            r.spp,
            r.seed,
            r.max_bounces,
            r.out.display()
        );
        let q = &self.oracle;
        let _ = writeln!(
            w,
            "\n[oracle]\nrealizations = {}\nrays_per_realization = {}\nseed = {}",
            q.realizations, q.rays_per_realization, q.seed
        );
        for (name, p) in objs {
            let _ = writeln!(w, "\n[object.{name}]");
            write_shape(w, p);
        }
        o
    }

    pub fn medium(&self) -> Result<MacrofacetMedium> {
        MacrofacetMedium::new(self.medium.ndf, self.kernel.roughness()?, self.kernel.sigma())?
            .with_fresnel(self.medium.fresnel.fresnel())?
            .with_mix_ratio(self.medium.mix_ratio)
    }

    pub fn environment(&self) -> Result<Environment> {
        match &self.scene.environment {
            EnvironmentSpec::Constant(c) => {
                if !c.is_valid() {
                    return Err(Error::Config(format!("environment radiance must be finite and non-negative: {c:?}")));
                }
                Ok(Environment::Constant(*c))
            }
            EnvironmentSpec::Map(p) => {
                let path = self.base_dir.join(p);
                let (width, height, texels) = read_pfm(&path)?;
                Ok(Environment::LatLong { width, height, texels })
            }
        }
    }

    pub fn build_scene(&self) -> Result<ShellScene> {
        let medium = self.medium()?;
        let objects = self.scene.objects.iter().map(|(_, shape)| ShellObject { shape: *shape, medium }).collect();
        let sun = match self.scene.sun {
            None => None,
            Some((d, e)) => {
                let direction = d
                    .try_normalize()
                    .ok_or_else(|| Error::Config("sun_direction must be a non-zero vector".into()))?;
                if !e.is_valid() {
                    return Err(Error::Config("sun_irradiance must be finite and non-negative".into()));
                }
                Some(Sun { direction, irradiance: e })
            }
        };
        ShellScene::new(objects, self.scene.camera, self.environment()?, sun)
    }

    pub fn render_settings(&self) -> RenderSettings {
        RenderSettings { spp: self.render.spp, seed: self.render.seed, max_bounces: self.render.max_bounces, threads: None }
    }
}

fn parse_shape(s: &mut Section, allow_none: bool) -> Result<Option<SdfPrimitive>> {
    let shape = s.take("shape").unwrap_or_else(|| "plane".into());
    let p = match shape.as_str() {
        "none" if allow_none => return Ok(None),
        "plane" => SdfPrimitive::Plane { z0: s.real("z0")?.unwrap_or(0.0) },
        "sphere" => SdfPrimitive::Sphere {
            center: s.vec3("center")?.unwrap_or(Vec3::ZERO),
            radius: s.real("radius")?.unwrap_or(1.0),
        },
        "box" => SdfPrimitive::Box {
            center: s.vec3("center")?.unwrap_or(Vec3::ZERO),
            half: s.vec3("half")?.unwrap_or(Vec3::splat(1.0)),
        },
        other => return Err(s.err("shape", format!("expected plane, sphere, box{}, got '{other}'", if allow_none { " or none" } else { "" }))),
    };
    p.validate()?;
    Ok(Some(p))
}

fn write_shape(w: &mut String, p: &SdfPrimitive) {
    let v = |p: Vec3| fmt_triple([p.x, p.y, p.z]);
    let _ = match *p {
        SdfPrimitive::Plane { z0 } => writeln!(w, "shape = plane\nz0 = {z0:?}"),
        SdfPrimitive::Sphere { center, radius } => writeln!(w, "shape = sphere\ncenter = {}\nradius = {radius:?}", v(center)),
        SdfPrimitive::Box { center, half } => writeln!(w, "shape = box\ncenter = {}\nhalf = {}", v(center), v(half)),
    };
}

/// Used by the CLI for directions given in degrees.
pub fn direction_from_degrees(theta: f64, phi: f64) -> Direction {
    macrofacet::math::SphericalAngles::from_degrees(theta, phi).direction()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# a sphere over a floor
[kernel]
sigma = 0.02
lx = 0.1
ly = 0.2
lz = 0.3

[medium]
ndf = beckmann
fresnel = conductor
eta = 0.2, 0.9, 1.1
k = 3.9, 2.4, 2.1
mix_ratio = 0.25

[scene]
shape = plane
z0 = -1
camera_position = 0, -5, 2
fov_deg = 35
width = 32
height = 24
environment = 0.5, 0.5, 0.5
sun_direction = 1, 1, 2
sun_irradiance = 3, 3, 3

[render]
spp = 8
seed = 42
format = ppm
out = img.ppm

[oracle]
realizations = 128

[object.ball]
shape = sphere
center = 0, 0, 0.5
radius = 0.75
";

    #[test]
    fn parses_everything() {
        let c = Config::parse(FULL).unwrap();
        assert_eq!(c.kernel, KernelSpec::Lengths { sigma: 0.02, lx: 0.1, ly: 0.2, lz: 0.3 });
        assert_eq!(c.medium.ndf, NdfKind::Beckmann);
        assert_eq!(c.medium.mix_ratio, 0.25);
        assert_eq!(c.scene.objects.len(), 2);
        assert_eq!(c.scene.objects[1].0, "ball");
        assert_eq!(c.scene.camera.width, 32);
        assert_eq!(c.render.format, ImageFormat::Ppm);
        assert_eq!(c.oracle.realizations, 128);
        assert!(c.build_scene().is_ok());
    }

    #[test]
    fn round_trip() {
        for text in [FULL, "", "[scene]\nshape = none\n", "[kernel]\nsigma = 0.1\nax = 0.3\nay = 0.4\naz = 0\n"] {
            let a = Config::parse(text).unwrap();
            let b = Config::parse(&a.to_ini_string()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_ini_string(), b.to_ini_string());
        }
    }

    #[test]
    fn round_trip_preserves_awkward_reals() {
        let mut a = Config::default();
        a.kernel = KernelSpec::Roughness { sigma: 0.1 + 0.2, ax: 1.0 / 3.0, ay: 1e-300, az: 5e-324 };
        let b = Config::parse(&a.to_ini_string()).unwrap();
        assert_eq!(a, b);
    }

    fn err(text: &str) -> String {
        let e = Config::parse(text).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        e.to_string()
    }

    #[test]
    fn strictness() {
        assert!(err("[render]\nsppp = 4\n").contains("sppp"));
        assert!(err("[renderer]\nspp = 4\n").contains("renderer"));
        assert!(err("spp = 4\n").contains("spp"));
        assert!(err("[render]\nspp = 4\nspp = 5\n").contains("repeated"));
        assert!(err("[kernel]\nlx = 1\nly = 1\nlz = 1\nax = 1\nay = 1\naz = 1\n").contains("not both"));
        assert!(err("[kernel]\nlx = 1\n").contains("together"));
        assert!(err("[scene]\nshape = plane\nradius = 2\n").contains("radius"));
        assert!(err("[medium]\nfresnel = one\neta = 1, 1, 1\n").contains("conductor"));
        assert!(err("[render]\nspp = -3\n").contains("spp"));
        assert!(err("[scene]\nwidth = abc\n").contains("width"));
        assert!(err("[object.x]\nshape = sphere\nradius = -1\n").contains("radius"));
    }

    #[test]
    fn scene_level_errors_surface_on_build() {
        let c = Config::parse("[scene]\nshape = sphere\nradius = 0.5\n[object.b]\nshape = sphere\nradius = 0.5\n").unwrap();
        assert_eq!(c.build_scene().unwrap_err().exit_code(), 1);
    }
}
