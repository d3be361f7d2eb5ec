//! Run configuration (TOML).
//!
//! ```toml
//! experiment = "simulate2d"   # simulate2d | front1d | spectrum | distance | sweep
//!
//! [model]
//! alpha = 0.01
//! eps = 0.0001
//! gamma = 7.0
//! cm = 1.0
//! r_int = 0.1
//! radius = 0.8
//!
//! [geometry]
//! kind = "pearls"             # constant | pearls | swelling | tabulated
//! length = 1000.0
//! base = 0.8
//! amp = 0.1
//!
//! [grid]
//! n = 2000
//! m = 32
//!
//! [time]
//! dt = 0.05
//! t_end = 180.0
//! snapshot_times = [60.0, 100.0, 180.0]
//!
//! [output]
//! dir = "out/pearls"
//! ```
//!
//! Optional sections: `[initial]`, `[front]`, `[spectrum]`, `[distance]`, `[sweep]`.
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;
use crate::grid::{Grid1D, Grid2D};
use crate::model::ModelParams;
use crate::operators::AxialScheme;
use crate::timestepper::{ImexConfig, Scheme};

/// Largest accepted `n * m` for a static-frame run.
pub const MAX_GRID_SIZE: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    #[default]
    Simulate2d,
    Front1d,
    Spectrum,
    Distance,
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate2d => "simulate2d",
            ExperimentKind::Front1d => "front1d",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Distance => "distance",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub scheme: AxialScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lobes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn default_kind() -> String {
    "constant".into()
}
fn default_length() -> f64 {
    1000.0
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            kind: default_kind(),
            length: default_length(),
            scheme: AxialScheme::default(),
            radius: None,
            base: None,
            amp: None,
            lobes: None,
            slope: None,
            center: None,
            sigma: None,
            file: None,
        }
    }
}

impl GeometrySpec {
    pub fn constant(length: f64) -> Self {
        GeometrySpec {
            length,
            ..Default::default()
        }
    }

    pub fn pearls(base: f64, amp: f64, length: f64) -> Self {
        GeometrySpec {
            kind: "pearls".into(),
            length,
            base: Some(base),
            amp: Some(amp),
            ..Default::default()
        }
    }

    pub fn swelling(base: f64, slope: f64, amp: f64, center: f64, sigma: f64, length: f64) -> Self {
        GeometrySpec {
            kind: "swelling".into(),
            length,
            base: Some(base),
            slope: Some(slope),
            amp: Some(amp),
            center: Some(center),
            sigma: Some(sigma),
            ..Default::default()
        }
    }

    fn allowed(&self) -> Result<&'static [&'static str]> {
        Ok(match self.kind.as_str() {
            "constant" => &["radius"],
            "pearls" => &["base", "amp", "lobes"],
            "swelling" => &["base", "slope", "amp", "center", "sigma"],
            "tabulated" => &["file"],
            other => {
                return Err(Error::Config {
                    key: "geometry.kind".into(),
                    reason: format!("unknown kind `{other}`"),
                })
            }
        })
    }

    fn check_keys(&self) -> Result<()> {
        let allowed = self.allowed()?;
        let present = [
            ("radius", self.radius.is_some()),
            ("base", self.base.is_some()),
            ("amp", self.amp.is_some()),
            ("lobes", self.lobes.is_some()),
            ("slope", self.slope.is_some()),
            ("center", self.center.is_some()),
            ("sigma", self.sigma.is_some()),
            ("file", self.file.is_some()),
        ];
        for (k, set) in present {
            if set && !allowed.contains(&k) {
                return Err(Error::Config {
                    key: format!("geometry.{k}"),
                    reason: format!("not a parameter of kind `{}`", self.kind),
                });
            }
        }
        Ok(())
    }

    fn need(v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Config {
            key: format!("geometry.{key}"),
            reason: "missing required key".into(),
        })
    }

    /// Builds the profile; relative table paths resolve against `base_dir`.
    pub fn build(&self, model: &ModelParams, base_dir: &Path) -> Result<SurfaceProfile> {
        self.check_keys()?;
        let l = self.length;
        match self.kind.as_str() {
            "constant" => SurfaceProfile::constant(self.radius.unwrap_or(model.radius), l),
            "pearls" => SurfaceProfile::pearls_with_lobes(
                Self::need(self.base, "base")?,
                Self::need(self.amp, "amp")?,
                self.lobes.unwrap_or(3.0),
                l,
            ),
            "swelling" => SurfaceProfile::swelling(
                Self::need(self.base, "base")?,
                Self::need(self.slope, "slope")?,
                Self::need(self.amp, "amp")?,
                Self::need(self.center, "center")?,
                Self::need(self.sigma, "sigma")?,
                l,
            ),
            "tabulated" => {
                let file = self.file.as_ref().ok_or_else(|| Error::Config {
                    key: "geometry.file".into(),
                    reason: "missing required key".into(),
                })?;
                let path = base_dir.join(file);
                let (xs, rho) = crate::io::read_profile_csv(&path)?;
                SurfaceProfile::tabulated(&xs, &rho)
            }
            _ => unreachable!("kind checked above"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
}

fn default_n() -> usize {
    2000
}
fn default_m() -> usize {
    32
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 2000, m: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_snapshots")]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_diag")]
    pub diagnostic_interval: f64,
}

fn default_dt() -> f64 {
    0.05
}
fn default_t_end() -> f64 {
    180.0
}
fn default_snapshots() -> Vec<f64> {
    vec![60.0, 100.0, 180.0]
}
fn default_diag() -> f64 {
    1.0
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            dt: default_dt(),
            t_end: default_t_end(),
            snapshot_times: default_snapshots(),
            scheme: Scheme::default(),
            diagnostic_interval: default_diag(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

/// Initial data for static-frame runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// `step` (tanh step, `u2 = 0`) or `front` (computed front, optionally perturbed).
    #[serde(default = "default_initial_kind")]
    pub kind: String,
    #[serde(default = "default_x_f")]
    pub x_f: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Relative `||v0||_{2,1} / ||Phi||_{2,1}` of an angularly non-uniform bump added to the front.
    #[serde(default)]
    pub bump: f64,
}

fn default_initial_kind() -> String {
    "step".into()
}
fn default_x_f() -> f64 {
    100.0
}
fn default_width() -> f64 {
    5.0
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            kind: default_initial_kind(),
            x_f: default_x_f(),
            width: default_width(),
            bump: 0.0,
        }
    }
}

/// Co-moving grid for the front solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontSpec {
    #[serde(default = "default_z_min")]
    pub z_min: f64,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_front_n")]
    pub n: usize,
    /// Radius of the reference cylinder; defaults to `model.radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn default_z_min() -> f64 {
    -600.0
}
fn default_z_max() -> f64 {
    200.0
}
fn default_front_n() -> usize {
    1600
}

impl Default for FrontSpec {
    fn default() -> Self {
        FrontSpec {
            z_min: default_z_min(),
            z_max: default_z_max(),
            n: default_front_n(),
            radius: None,
        }
    }
}

impl FrontSpec {
    pub fn grid(&self) -> Result<Grid1D> {
        if !(self.z_max > self.z_min) {
            return Err(Error::Config {
                key: "front.z_max".into(),
                reason: "must exceed front.z_min".into(),
            });
        }
        Grid1D::with_origin(self.n, self.z_max - self.z_min, self.z_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    #[serde(default = "default_modes")]
    pub modes: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub label_modes: bool,
}

fn default_modes() -> Vec<usize> {
    vec![0, 1, 4]
}
fn default_samples() -> usize {
    200
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec {
            modes: default_modes(),
            samples: default_samples(),
            seed: 0,
            label_modes: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_scan")]
    pub scan_half_width: f64,
}

fn default_margin() -> f64 {
    20.0
}
fn default_scan() -> f64 {
    25.0
}

impl Default for DistanceSpec {
    fn default() -> Self {
        DistanceSpec {
            margin: default_margin(),
            scan_half_width: default_scan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Member config files, relative to this file.
    pub configs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    pub model: ModelParams,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub front: FrontSpec,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub distance: DistanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

const MODEL_KEYS: [&str; 6] = ["alpha", "eps", "gamma", "cm", "r_int", "radius"];

impl RunConfig {
    /// Defaults everywhere except `[model]`.
    pub fn with_model(model: ModelParams) -> Self {
        RunConfig {
            experiment: ExperimentKind::default(),
            model,
            geometry: GeometrySpec::constant(1000.0),
            grid: GridSpec::default(),
            time: TimeSpec::default(),
            output: OutputSpec::default(),
            initial: InitialSpec::default(),
            front: FrontSpec::default(),
            spectrum: SpectrumSpec::default(),
            distance: DistanceSpec::default(),
            sweep: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config {
            key: "<file>".into(),
            reason: e.message().to_string(),
        })?;
        let model = table
            .get("model")
            .and_then(|v| v.as_table())
            .ok_or_else(|| Error::Config {
                key: "model".into(),
                reason: "missing required section".into(),
            })?;
        for k in MODEL_KEYS {
            if !model.contains_key(k) {
                return Err(Error::Config {
                    key: format!("model.{k}"),
                    reason: "missing required key".into(),
                });
            }
        }
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            key: "<file>".into(),
            reason: e.message().to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Error::Config {
            key: key.into(),
            reason,
        };
        self.model.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => bad(&format!("model.{name}"), reason),
            other => other,
        })?;
        self.geometry.check_keys()?;
        if let Some(file) = &self.geometry.file {
            if !self.base_dir.join(file).exists() {
                return Err(bad("geometry.file", format!("{} does not exist", file.display())));
            }
        }
        if !(self.geometry.length > 0.0) {
            return Err(bad("geometry.length", "must be positive".into()));
        }
        if self.grid.n < 8 {
            return Err(bad("grid.n", format!("need at least 8 nodes, got {}", self.grid.n)));
        }
        if self.grid.m != 1 && (self.grid.m < 4 || self.grid.m % 2 != 0) {
            return Err(bad("grid.m", format!("must be 1 or even and >= 4, got {}", self.grid.m)));
        }
        if self.grid.n * self.grid.m > MAX_GRID_SIZE {
            return Err(bad("grid", format!("n * m exceeds {MAX_GRID_SIZE}")));
        }
        self.imex().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => bad(&format!("time.{name}"), reason),
            other => other,
        })?;
        if !(self.time.diagnostic_interval > 0.0) {
            return Err(bad("time.diagnostic_interval", "must be positive".into()));
        }
        if !matches!(self.initial.kind.as_str(), "step" | "front") {
            return Err(bad("initial.kind", format!("unknown kind `{}`", self.initial.kind)));
        }
        if !(self.initial.width > 0.0) {
            return Err(bad("initial.width", "must be positive".into()));
        }
        if !(self.initial.bump >= 0.0) {
            return Err(bad("initial.bump", "must be non-negative".into()));
        }
        self.front.grid().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => bad(&format!("front.{name}"), reason),
            other => other,
        })?;
        if 2 * self.front.n > crate::spectral::DENSE_CAP && self.experiment == ExperimentKind::Spectrum {
            return Err(bad("front.n", format!("2 n exceeds the dense cap {}", crate::spectral::DENSE_CAP)));
        }
        if self.experiment == ExperimentKind::Sweep {
            let sweep = self.sweep.as_ref().ok_or_else(|| bad("sweep", "missing section".into()))?;
            for c in &sweep.configs {
                if !self.base_dir.join(c).exists() {
                    return Err(bad("sweep.configs", format!("{} does not exist", c.display())));
                }
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<SurfaceProfile> {
        self.geometry.build(&self.model, &self.base_dir)
    }

    pub fn grid2d(&self) -> Result<Grid2D> {
        let axial = Grid1D::new(self.grid.n, self.geometry.length)?;
        if self.grid.m == 1 {
            Ok(Grid2D::axisymmetric(axial))
        } else {
            Grid2D::new(axial, self.grid.m)
        }
    }

    pub fn imex(&self) -> Result<ImexConfig> {
        Ok(ImexConfig::new(self.time.dt, self.time.t_end)?
            .with_scheme(self.time.scheme)
            .with_snapshots(self.time.snapshot_times.clone())?
            .with_diagnostic_interval(self.time.diagnostic_interval))
    }

    /// Model parameters of the reference cylinder carrying the front.
    pub fn front_params(&self) -> Result<ModelParams> {
        match self.front.radius {
            Some(r) => self.model.with_radius(r),
            None => Ok(self.model),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.output.dir)
    }

    /// The resolved configuration, defaults included.
    pub fn echo(&self) -> Result<String> {
        crate::io::toml_string(self)
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        key: "<file>".into(),
        reason: format!("{}: {e}", path.display()),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    RunConfig::from_toml_str(&text, &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"
[model]
alpha = 0.01
eps = 0.0001
gamma = 7.0
cm = 1.0
r_int = 0.1
radius = 0.8

[geometry]
kind = "constant"
length = 1000.0
"#;

    #[test]
    fn parses_fig1() {
        let c = RunConfig::from_toml_str(FIG1, Path::new(".")).unwrap();
        assert_eq!(c.model, ModelParams::fig1());
        assert_eq!(c.geometry.length, 1000.0);
        assert_eq!((c.grid.n, c.grid.m), (2000, 32));
        assert_eq!(c.time.snapshot_times, vec![60.0, 100.0, 180.0]);
        let echo = c.echo().unwrap();
        let again = RunConfig::from_toml_str(&echo, Path::new(".")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn missing_alpha_is_named() {
        let text = FIG1.replace("alpha = 0.01\n", "");
        match RunConfig::from_toml_str(&text, Path::new(".")) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "model.alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values_and_unknown_keys() {
        let text = format!("{FIG1}\n[time]\ndt = -0.1\n");
        match RunConfig::from_toml_str(&text, Path::new(".")) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "time.dt"),
            other => panic!("{other:?}"),
        }
        let text = FIG1.replace("gamma = 7.0", "gamma = 7.0\ncolour = 1.0");
        let err = RunConfig::from_toml_str(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let text = FIG1.replace("length = 1000.0", "length = 1000.0\namp = 0.1");
        assert!(RunConfig::from_toml_str(&text, Path::new(".")).is_err());
        let text = format!("{FIG1}\n[grid]\nm = 5\n");
        assert!(RunConfig::from_toml_str(&text, Path::new(".")).is_err());
    }
}
