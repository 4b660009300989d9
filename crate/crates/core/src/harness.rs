//! Phantoms, noise, error metrics and end-to-end experiments.
//!
//! An experiment rasterizes a phantom on a fine grid, projects it, adds
//! Gaussian noise, optionally applies a smooth sinogram cutoff, reconstructs
//! on a coarser grid and reports the relative error `δ` against the phantom
//! averaged onto the reconstruction grid.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{weak_stability_audit, Axis, GeometryReport, HalfSide, RadiusModel, Region};
use crate::grid::{full_turn, l2_norm, linspace, GeometryId, Image, ImageSpec, Sinogram};
use crate::harmonic::{invert_constant_r, EquidistantMap, HarmonicSolution, InversionOptions};
use crate::io::{encode, export_png, export_sinogram_png, read_raster, write_raster, Raster};
use crate::projector::{
    apply_cutoff, assemble_forward, circle_disk_arc_length, CutoffCoordinate, CutoffProfile, Projector, SinogramLayout,
};
use crate::recon::{
    best_scale, fbp_constant_r, fbp_filter_constant_r, fbp_filter_linear, fbp_linear_cst, reconstruct, write_log_csv, Method, ReconConfig,
};
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    HalfAnnulus,
    Annulus,
    Disk,
    /// Values read from a raster file and area-resampled.
    Raster,
}

/// Piecewise-constant test object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default)]
    pub inner: f64,
    #[serde(default = "one")]
    pub outer: f64,
    /// Polar angle range about `center`, used by the half annulus.
    #[serde(default = "half_turn")]
    pub angles: [f64; 2],
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub raster: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn half_turn() -> [f64; 2] {
    [0.0, std::f64::consts::PI]
}

const SUPERSAMPLE: usize = 4;

impl PhantomSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Self {
            kind: PhantomKind::Disk,
            center,
            inner: 0.0,
            outer: radius,
            angles: [0.0, TAU],
            amplitude: 1.0,
            raster: None,
        }
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64) -> Self {
        Self {
            kind: PhantomKind::Annulus,
            inner,
            ..Self::disk(center, outer)
        }
    }

    pub fn half_annulus(center: [f64; 2], inner: f64, outer: f64, angles: [f64; 2]) -> Self {
        Self {
            kind: PhantomKind::HalfAnnulus,
            angles,
            ..Self::annulus(center, inner, outer)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == PhantomKind::Raster {
            return match self.raster {
                Some(_) => Ok(()),
                None => Err(Error::Config("raster phantom needs a file".into())),
            };
        }
        if !(self.inner >= 0.0 && self.outer > self.inner) {
            return Err(Error::Config(format!(
                "phantom needs 0 <= inner < outer, got {} and {}",
                self.inner, self.outer
            )));
        }
        let [a0, a1] = self.angles;
        if !(0.0 <= a0 && a0 < a1 && a1 <= TAU + 1e-12) {
            return Err(Error::Config("phantom angles must satisfy 0 <= start < end <= 2π".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Config("phantom amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let rel = p - Vec2::new(self.center[0], self.center[1]);
        let rho = rel.norm();
        match self.kind {
            PhantomKind::Disk => rho < self.outer,
            PhantomKind::Annulus => rho > self.inner && rho < self.outer,
            PhantomKind::HalfAnnulus => {
                let a = rel.y.atan2(rel.x).rem_euclid(TAU);
                rho > self.inner && rho < self.outer && a >= self.angles[0] && a <= self.angles[1]
            }
            PhantomKind::Raster => false,
        }
    }
}

/// Rasterizes a phantom; each pixel holds the amplitude times the fraction
/// of its `4 × 4` subsamples inside the shape.
pub fn make_phantom(spec: &PhantomSpec, image: ImageSpec) -> Result<Image> {
    spec.validate()?;
    image.validate()?;
    if spec.kind == PhantomKind::Raster {
        let path = spec.raster.as_ref().expect("validated");
        let src = read_raster(path)?.into_image()?;
        return Ok(src.resample_area(image).scaled(spec.amplitude));
    }
    let (dx, dy) = (image.dx(), image.dy());
    let n = SUPERSAMPLE;
    let weight = spec.amplitude / (n * n) as f64;
    Ok(Image::from_fn(image, |c| {
        let mut inside = 0usize;
        for a in 0..n {
            for b in 0..n {
                let off = Vec2::new(((a as f64 + 0.5) / n as f64 - 0.5) * dx, ((b as f64 + 0.5) / n as f64 - 0.5) * dy);
                inside += spec.contains(c + off) as usize;
            }
        }
        inside as f64 * weight
    }))
}

/// `b + γ (‖b‖/√k) η` with `η` standard normal from a seeded ChaCha20 stream.
pub fn add_noise(b: &Sinogram, gamma: f64, seed: u64) -> Result<Sinogram> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("noise level must be nonnegative, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(b.clone());
    }
    let sigma = gamma * b.norm() / (b.len() as f64).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = b
        .values
        .iter()
        .map(|v| {
            let eta: f64 = StandardNormal.sample(&mut rng);
            v + sigma * eta
        })
        .collect();
    b.with_values(values)
}

/// `δ = ‖x_rec - x_true‖ / ‖x_true‖` on a shared grid.
pub fn lsq_error(x_rec: &Image, x_true: &Image) -> Result<f64> {
    if x_rec.spec != x_true.spec {
        return Err(Error::InvalidInput("δ needs both images on the same grid".into()));
    }
    let norm = x_true.norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("δ is undefined for a zero ground truth".into()));
    }
    let diff: Vec<f64> = x_rec.values.iter().zip(&x_true.values).map(|(a, b)| a - b).collect();
    Ok(l2_norm(&diff) / norm)
}

/// `δ` after the best scalar fit of the reconstruction, for unnormalized filters.
pub fn scaled_lsq_error(x_rec: &Image, x_true: &Image) -> Result<f64> {
    let c = best_scale(&x_rec.values, &x_true.values);
    lsq_error(&x_rec.scaled(c), x_true)
}

/// Transform family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryConfig {
    LinearCst { alpha: f64 },
    RotationalCst { alpha: f64 },
    ConstantR { r: f64, d: f64 },
}

impl GeometryConfig {
    pub fn model(&self) -> RadiusModel {
        match *self {
            GeometryConfig::LinearCst { alpha } => RadiusModel::LinearCst { alpha },
            GeometryConfig::RotationalCst { alpha } => RadiusModel::RotationalCst { alpha },
            GeometryConfig::ConstantR { r, .. } => RadiusModel::ConstantR { r },
        }
    }

    pub fn id(&self) -> GeometryId {
        self.model().geometry_id()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GeometryConfig::LinearCst { alpha } | GeometryConfig::RotationalCst { alpha } => alpha > 0.0 && alpha.is_finite(),
            GeometryConfig::ConstantR { r, d } => d > 0.0 && r > d && r.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid geometry parameters {self:?}")))
        }
    }
}

/// A uniform sinogram axis: `n` points from `start` to `end`, or `n` angles
/// over a full turn starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub n: usize,
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub end: f64,
    #[serde(default)]
    pub full_turn: bool,
}

impl AxisSpec {
    pub fn range(start: f64, end: f64, n: usize) -> Self {
        Self {
            n,
            start,
            end,
            full_turn: false,
        }
    }

    pub fn turn(n: usize) -> Self {
        Self {
            n,
            start: 0.0,
            end: 0.0,
            full_turn: true,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.n == 0 {
            return Err(Error::Config("sinogram axes need at least one sample".into()));
        }
        if self.full_turn {
            return Ok(full_turn(self.n));
        }
        if !(self.end > self.start) && self.n > 1 {
            return Err(Error::Config(format!("axis end {} must exceed start {}", self.end, self.start)));
        }
        Ok(linspace(self.start, self.end, self.n))
    }
}

/// Pixel grid in config form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl GridConfig {
    pub fn square(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            nx: n,
            ny: n,
            x: [lo, hi],
            y: [lo, hi],
        }
    }

    pub fn with_size(&self, n: usize) -> Self {
        Self { nx: n, ny: n, ..*self }
    }

    pub fn spec(&self) -> Result<ImageSpec> {
        ImageSpec::new(self.nx, self.ny, (self.x[0], self.x[1]), (self.y[0], self.y[1])).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Smooth sinogram cutoff and the coordinate it reads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub profile: CutoffProfile,
    pub coordinate: CutoffCoordinate,
}

/// Optional geometry audit embedded in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub omega: Region,
    pub centers: Region,
    #[serde(default = "default_audit_n")]
    pub n_x: usize,
    #[serde(default = "default_audit_n")]
    pub n_omega: usize,
}

fn default_audit_n() -> usize {
    64
}

/// A full experiment: phantom, grids, sinogram, noise and reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub geometry: GeometryConfig,
    pub phantom: PhantomSpec,
    pub data_grid: GridConfig,
    pub recon_grid: GridConfig,
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    #[serde(default = "default_quad_data")]
    pub quad_data: usize,
    #[serde(default = "default_quad_recon")]
    pub quad_recon: usize,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
    pub recon: ReconConfig,
    #[serde(default)]
    pub cutoff: Option<CutoffConfig>,
    /// Quadrature count for continuous FBP backprojection; the assembled
    /// transpose is used when absent.
    #[serde(default)]
    pub fbp_angles: Option<usize>,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Permits generating data on the reconstruction grid.
    #[serde(default)]
    pub allow_inverse_crime: bool,
}

fn default_quad_data() -> usize {
    1024
}

fn default_quad_recon() -> usize {
    512
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.phantom.validate()?;
        self.recon.validate()?;
        let (data, recon) = (self.data_grid.spec()?, self.recon_grid.spec()?);
        self.axis1.values()?;
        self.axis2.values()?;
        if !(self.gamma >= 0.0) {
            return Err(Error::Config("gamma must be nonnegative".into()));
        }
        if self.quad_data < 16 || self.quad_recon < 16 {
            return Err(Error::Config("quadrature counts must be at least 16".into()));
        }
        let finer = data.nx > recon.nx && data.ny > recon.ny;
        if !finer && !self.allow_inverse_crime {
            return Err(Error::Config(format!(
                "data grid {}x{} must be strictly finer than the reconstruction grid {}x{} (set allow_inverse_crime to override)",
                data.nx, data.ny, recon.nx, recon.ny
            )));
        }
        if self.recon.method == Method::Fbp && matches!(self.geometry, GeometryConfig::RotationalCst { .. }) {
            return Err(Error::Config(
                "filtered backprojection is defined for the linear and constant-radius geometries".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form in hex, ignoring the output directory.
    pub fn hash(&self) -> String {
        let identity = Self {
            out_dir: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&identity).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn layout(&self) -> Result<SinogramLayout> {
        SinogramLayout::new(self.geometry.id(), self.axis1.values()?, self.axis2.values()?)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a raster's encoded payload and header.
pub fn raster_hash(raster: &Raster) -> String {
    let (header, payload) = encode(raster);
    let mut h = Sha256::new();
    h.update(serde_json::to_string(&header).expect("header serializes").as_bytes());
    for v in payload {
        h.update(v.to_le_bytes());
    }
    hex(&h.finalize())
}

/// Named starting points reproducing the three published experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    LinearCst,
    RotationalCst,
    ConstantR,
    /// Radial phantom for the constant-radius analytic inversion.
    ConstantRRadial,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::LinearCst, Preset::RotationalCst, Preset::ConstantR, Preset::ConstantRRadial];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LinearCst => "linear-cst",
            Preset::RotationalCst => "rotational-cst",
            Preset::ConstantR => "constant-r",
            Preset::ConstantRRadial => "constant-r-radial",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
    }

    /// Landweber configuration of the preset at noise level 0.05.
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::LinearCst => {
                let grid = GridConfig {
                    nx: 100,
                    ny: 100,
                    x: [-1.0, 1.0],
                    y: [0.25, 2.25],
                };
                ExperimentConfig {
                    name: self.name().into(),
                    geometry: GeometryConfig::LinearCst { alpha: 1.0 },
                    phantom: PhantomSpec::half_annulus([0.0, 1.1], 0.35, 0.7, [0.0, std::f64::consts::PI]),
                    data_grid: grid.with_size(105),
                    recon_grid: grid,
                    axis1: AxisSpec::range(-4.5, 4.5, 200),
                    axis2: AxisSpec::range(-1.9, 3.0, 150),
                    quad_data: 1024,
                    quad_recon: 512,
                    gamma: 0.05,
                    seed: 1,
                    recon: ReconConfig::landweber(LANDWEBER_ITERATIONS),
                    cutoff: None,
                    fbp_angles: None,
                    audit: None,
                    out_dir: None,
                    allow_inverse_crime: false,
                }
            }
            Preset::RotationalCst => ExperimentConfig {
                name: self.name().into(),
                geometry: GeometryConfig::RotationalCst { alpha: 1.0 },
                phantom: PhantomSpec::half_annulus([0.06, -0.04], 0.25, 0.55, [0.0, std::f64::consts::PI]),
                data_grid: GridConfig::square(105, -1.0, 1.0),
                recon_grid: GridConfig::square(100, -1.0, 1.0),
                axis1: AxisSpec::range(0.26, 2.6, 100),
                axis2: AxisSpec::turn(100),
                ..Preset::LinearCst.config()
            },
            Preset::ConstantR => {
                let grid = GridConfig {
                    nx: 100,
                    ny: 100,
                    x: [0.25, 1.25],
                    y: [-0.5, 0.5],
                };
                ExperimentConfig {
                    name: self.name().into(),
                    geometry: GeometryConfig::ConstantR { r: 1.25, d: 0.25 },
                    phantom: PhantomSpec::half_annulus([0.75, -0.1], 0.15, 0.35, [0.0, std::f64::consts::PI]),
                    data_grid: grid.with_size(105),
                    recon_grid: grid,
                    axis1: AxisSpec::range(1.25, 2.5, 150),
                    axis2: AxisSpec::turn(160),
                    ..Preset::LinearCst.config()
                }
            }
            Preset::ConstantRRadial => ExperimentConfig {
                name: self.name().into(),
                phantom: PhantomSpec::annulus([0.0, 0.0], 0.5, 0.95),
                data_grid: GridConfig::square(210, -1.25, 1.25),
                recon_grid: GridConfig::square(100, -1.25, 1.25),
                axis1: AxisSpec::range(1.5, 2.5, 201),
                axis2: AxisSpec::turn(256),
                quad_data: 2048,
                gamma: 0.0,
                ..Preset::ConstantR.config()
            },
        }
    }

    /// Smooth cutoff matching the preset's sinogram edge, where one is needed.
    pub fn cutoff(self) -> Option<CutoffConfig> {
        match self {
            // Ω₀ = {0.25 < x₂ < 2.25}; the data stop at y₂ = 3 = b + ε/2
            Preset::LinearCst => Some(CutoffConfig {
                profile: CutoffProfile::falling(2.25, 1.5).expect("valid"),
                coordinate: CutoffCoordinate::Y2,
            }),
            Preset::RotationalCst => None,
            // zero below |y| = r, one from |y| = sqrt(r² + d²)
            Preset::ConstantR | Preset::ConstantRRadial => Some(CutoffConfig {
                profile: CutoffProfile::rising_between(1.25, 1.25f64.hypot(0.25)).expect("valid"),
                coordinate: CutoffCoordinate::Radial,
            }),
        }
    }

    /// Samples next to the sharp crop of the preset's sinogram.
    pub fn edge(self) -> Option<SinogramEdge> {
        match self {
            Preset::LinearCst => Some(SinogramEdge {
                axis: 2,
                side: EdgeSide::High,
                width: 3,
            }),
            Preset::RotationalCst => None,
            Preset::ConstantR | Preset::ConstantRRadial => Some(SinogramEdge {
                axis: 1,
                side: EdgeSide::Low,
                width: 3,
            }),
        }
    }

    /// Target set and center set for the preset's stability audit.
    pub fn audit(self) -> AuditConfig {
        let (omega, centers) = match self {
            Preset::LinearCst => (
                Region::Rect {
                    x: (-1.0, 1.0),
                    y: (0.25, 2.25),
                },
                Region::HalfPlane {
                    axis: Axis::Y,
                    threshold: 3.0,
                    side: HalfSide::Below,
                },
            ),
            Preset::RotationalCst => (Region::ball(Vec2::zeros(), 0.65), Region::annulus(Vec2::zeros(), 0.26, 2.6)),
            Preset::ConstantR | Preset::ConstantRRadial => (
                Region::annulus(Vec2::zeros(), 0.25, 1.25),
                Region::annulus(Vec2::zeros(), 1.25, 2.5),
            ),
        };
        AuditConfig {
            omega,
            centers,
            n_x: default_audit_n(),
            n_omega: default_audit_n(),
        }
    }

    /// TV settings tuned on the preset.
    pub fn tv(self) -> ReconConfig {
        let (lambda, beta) = match self {
            Preset::LinearCst => (TV_LAMBDA_LINEAR, 1e-3),
            Preset::RotationalCst => (TV_LAMBDA_ROTATIONAL, 1e-3),
            Preset::ConstantR | Preset::ConstantRRadial => (TV_LAMBDA_CONSTANT_R, 1e-3),
        };
        ReconConfig::tv(TV_ITERATIONS, lambda, beta)
    }
}

pub const LANDWEBER_ITERATIONS: usize = 200;
pub const TV_ITERATIONS: usize = 300;
const TV_LAMBDA_LINEAR: f64 = 0.06;
const TV_LAMBDA_ROTATIONAL: f64 = 0.08;
const TV_LAMBDA_CONSTANT_R: f64 = 0.02;

/// Reusable pieces of an experiment that do not depend on noise or method.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub phantom_fine: Image,
    pub truth: Image,
    pub clean: Sinogram,
    pub recon_projector: Projector,
    pub advisories: Vec<String>,
}

/// Builds the phantom, both projectors and the noiseless data.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let model = cfg.geometry.model();
    let layout = cfg.layout()?;
    let data_spec = cfg.data_grid.spec()?;
    let recon_spec = cfg.recon_grid.spec()?;
    let phantom_fine = make_phantom(&cfg.phantom, data_spec).map_err(|e| e.at_stage("phantom"))?;
    let truth = phantom_fine.resample_area(recon_spec);
    let data_proj = assemble_forward(&model, data_spec, &layout, cfg.quad_data).map_err(|e| e.at_stage("data projector"))?;
    let clean = data_proj.apply(&phantom_fine)?;
    drop(data_proj);
    let recon_projector =
        assemble_forward(&model, recon_spec, &layout, cfg.quad_recon).map_err(|e| e.at_stage("reconstruction projector"))?;
    Ok(Prepared {
        advisories: coverage_advisories(cfg, &layout),
        config: cfg.clone(),
        phantom_fine,
        truth,
        clean,
        recon_projector,
    })
}

fn coverage_advisories(cfg: &ExperimentConfig, layout: &SinogramLayout) -> Vec<String> {
    let mut out = Vec::new();
    if let GeometryConfig::LinearCst { alpha } = cfg.geometry {
        // injectivity band for targets in a < x₂ < b
        let (a, b) = (cfg.recon_grid.y[0], cfg.recon_grid.y[1]);
        if a > 0.0 {
            let lo = (a * a - alpha * alpha) / (2.0 * a);
            let hi = (b * b - alpha * alpha) / (2.0 * b);
            let (y_lo, y_hi) = (layout.axis2[0], *layout.axis2.last().unwrap());
            if y_lo > lo || y_hi < hi {
                out.push(format!(
                    "y2 samples [{y_lo}, {y_hi}] miss part of the injectivity band [{lo:.4}, {hi:.4}]"
                ));
            }
        } else {
            out.push("reconstruction window reaches x2 <= 0, outside the linear geometry's domain".into());
        }
    }
    out
}

/// Outcome of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub geometry: GeometryId,
    pub method: Method,
    pub seed: u64,
    pub gamma: f64,
    pub config_hash: String,
    pub delta: f64,
    /// `δ` after a best scalar fit; reported for filtered backprojection.
    pub delta_scaled: Option<f64>,
    pub iterations: usize,
    pub final_log_value: Option<f64>,
    pub step: Option<f64>,
    pub sigma_max_sq: Option<f64>,
    pub warnings: Vec<String>,
    pub advisories: Vec<String>,
    /// SHA-256 of each produced raster.
    pub raster_hashes: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub geometry_report: Option<GeometryReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Products of [`execute`] besides the report.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub data: Sinogram,
    pub reconstruction: Image,
    pub log: Vec<(usize, f64)>,
}

/// Runs noise, cutoff and reconstruction on prepared inputs, overriding the
/// prepared config's seed and reconstruction settings.
pub fn execute(prep: &Prepared, seed: u64, recon: &ReconConfig, cutoff: Option<&CutoffConfig>) -> Result<RunOutput> {
    recon.validate()?;
    let cfg = ExperimentConfig {
        seed,
        recon: recon.clone(),
        cutoff: cutoff.copied(),
        ..prep.config.clone()
    };
    let noisy = add_noise(&prep.clean, cfg.gamma, seed).map_err(|e| e.at_stage("noise"))?;
    let (data, proj) = match cutoff {
        Some(c) => (
            apply_cutoff(&noisy, &c.profile, c.coordinate).map_err(|e| e.at_stage("cutoff"))?,
            prep.recon_projector.with_cutoff(&c.profile, c.coordinate)?,
        ),
        None => (noisy, prep.recon_projector.clone()),
    };
    let mut warnings = Vec::new();
    let (x, log, step, sigma) = match recon.method {
        Method::Fbp => {
            let x = run_fbp(&cfg, &data, &proj).map_err(|e| e.at_stage("fbp"))?;
            (x, Vec::new(), None, None)
        }
        _ => {
            let (x, out) = reconstruct(&proj, &data, recon).map_err(|e| e.at_stage("reconstruction"))?;
            warnings.extend(out.warnings);
            (x, out.log, Some(out.step), Some(out.sigma_max_sq))
        }
    };
    if x.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(recon.iterations).at_stage("reconstruction"));
    }
    let delta = lsq_error(&x, &prep.truth)?;
    let delta_scaled = (recon.method == Method::Fbp)
        .then(|| scaled_lsq_error(&x, &prep.truth))
        .transpose()?;
    let geometry_report = match &cfg.audit {
        Some(a) => {
            Some(weak_stability_audit(&cfg.geometry.model(), &a.omega, &a.centers, a.n_x, a.n_omega).map_err(|e| e.at_stage("audit"))?)
        }
        None => None,
    };
    let mut raster_hashes = BTreeMap::new();
    raster_hashes.insert("sinogram".to_string(), raster_hash(&Raster::Sinogram(data.clone())));
    raster_hashes.insert("reconstruction".to_string(), raster_hash(&Raster::Image(x.clone())));
    let report = ExperimentReport {
        name: cfg.name.clone(),
        geometry: cfg.geometry.id(),
        method: recon.method,
        seed,
        gamma: cfg.gamma,
        config_hash: cfg.hash(),
        delta,
        delta_scaled,
        iterations: log.len(),
        final_log_value: log.last().map(|e| e.1),
        step,
        sigma_max_sq: sigma,
        warnings,
        advisories: prep.advisories.clone(),
        raster_hashes,
        files: Vec::new(),
        geometry_report,
    };
    Ok(RunOutput {
        report,
        data,
        reconstruction: x,
        log,
    })
}

fn run_fbp(cfg: &ExperimentConfig, data: &Sinogram, proj: &Projector) -> Result<Image> {
    let spec = cfg.recon_grid.spec()?;
    let assembled = if cfg.fbp_angles.is_some() { None } else { Some(proj) };
    let n = cfg.fbp_angles.unwrap_or(0);
    // the cutoff is already folded into data and operator
    match cfg.geometry {
        GeometryConfig::LinearCst { alpha } => fbp_linear_cst(data, alpha, spec, None, assembled, n),
        GeometryConfig::ConstantR { r, .. } => fbp_constant_r(data, r, spec, None, assembled, n),
        GeometryConfig::RotationalCst { .. } => Err(Error::Config("no filtered backprojection for the rotational geometry".into())),
    }
}

/// Prepares and executes `cfg`, writing outputs when `out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mut out = execute(&prep, cfg.seed, &cfg.recon, cfg.cutoff.as_ref())?;
    if let Some(dir) = &cfg.out_dir {
        out.report.files = write_outputs(dir, cfg, &prep, &out)?;
        write_report(dir, &out.report)?;
    }
    Ok(out)
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, prep: &Prepared, out: &RunOutput) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut put = |name: String| files.push(name);
    write_raster(&Raster::Image(prep.truth.clone()), dir.join("truth.srk"))?;
    put("truth.srk".into());
    write_raster(&Raster::Sinogram(out.data.clone()), dir.join("sinogram.srk"))?;
    put("sinogram.srk".into());
    write_raster(&Raster::Image(out.reconstruction.clone()), dir.join("reconstruction.srk"))?;
    put("reconstruction.srk".into());
    export_png(&prep.truth, dir.join("truth.png"), None)?;
    put("truth.png".into());
    export_sinogram_png(&out.data, dir.join("sinogram.png"), None)?;
    put("sinogram.png".into());
    export_png(&out.reconstruction, dir.join("reconstruction.png"), None)?;
    put("reconstruction.png".into());
    if !out.log.is_empty() {
        let value = if cfg.recon.method == Method::Tv { "objective" } else { "residual" };
        write_log_csv(dir.join("log.csv"), value, &out.log)?;
        put("log.csv".into());
    }
    let toml = cfg.to_toml()?;
    std::fs::write(dir.join("config.toml"), toml).map_err(|e| Error::io(dir.join("config.toml"), e))?;
    put("config.toml".into());
    put("report.json".into());
    Ok(files)
}

pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<()> {
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()?).map_err(|e| Error::io(path, e))
}

/// Mean of `δ` over seeds `0..n`.
pub fn mean_delta(prep: &Prepared, recon: &ReconConfig, cutoff: Option<&CutoffConfig>, seeds: u64) -> Result<f64> {
    let mut acc = 0.0;
    for seed in 0..seeds {
        acc += execute(prep, seed, recon, cutoff)?.report.delta;
    }
    Ok(acc / seeds as f64)
}

/// Analytic inversion settings for the radial constant-radius preset.
pub const RADIAL_INVERSION: InversionOptions = InversionOptions {
    l_max: 16,
    ridge: 1e-6,
    m: 200,
    supersample: 4,
};

/// Harmonic inversion of a prepared constant-radius experiment.
#[derive(Clone, Debug)]
pub struct InversionRun {
    pub image: Image,
    pub solution: HarmonicSolution,
    /// Relative error on the annulus `d < |x| < r` where the inverse applies.
    pub error: f64,
}

/// Inverts the noiseless data of `prep` on its reconstruction grid.
pub fn invert_prepared(prep: &Prepared, opts: InversionOptions) -> Result<InversionRun> {
    let GeometryConfig::ConstantR { r, d } = prep.config.geometry else {
        return Err(Error::Config("harmonic inversion needs the constant-r geometry".into()));
    };
    let (image, solution) = invert_constant_r(&prep.clean, r, d, opts, prep.truth.spec)?;
    let error = masked_lsq_error(&image, &prep.truth, |x| {
        let rho = x.norm();
        rho > d && rho < r
    })?;
    Ok(InversionRun { image, solution, error })
}

/// Agreement between rotational Compton data `p·Rf` and equidistant-circle
/// integrals of the scaled density `f̃(y) = f(y/p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PalamodovCheck {
    pub alpha: f64,
    pub samples: usize,
    /// `‖I − p·Rf‖₂ / ‖p·Rf‖₂` over all samples.
    pub relative_l2: f64,
    /// Largest per-sample relative difference.
    pub max_relative: f64,
}

/// Compares the two sides at `samples` random `(λ, Θ)` whose Compton circle
/// crosses the disk along an arc of length at least `min_arc`. The Compton
/// side uses the assembled projector on the disk raster, the equidistant side
/// bilinear quadrature on the rescaled raster.
pub fn palamodov_check(alpha: f64, disk: &PhantomSpec, grid: ImageSpec, samples: usize, quad: usize, seed: u64) -> Result<PalamodovCheck> {
    if disk.kind != PhantomKind::Disk {
        return Err(Error::InvalidInput("the equivalence check uses a disk phantom".into()));
    }
    let model = RadiusModel::RotationalCst { alpha };
    let map = EquidistantMap::new(alpha)?;
    let f = make_phantom(disk, grid)?;
    let f_tilde = map.scaled_raster(&f);
    let center = Vec2::new(disk.center[0], disk.center[1]);
    let min_arc = 0.25 * disk.outer;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut num, mut den, mut max_rel) = (0.0, 0.0, 0.0f64);
    let mut taken = 0;
    let mut tries = 0;
    while taken < samples {
        tries += 1;
        if tries > 1000 * samples.max(1) {
            return Err(Error::InvalidInput("disk is not crossed by rotational circles".into()));
        }
        let t = 0.26 + 2.34 * rng.gen::<f64>();
        let theta = TAU * rng.gen::<f64>();
        let y = t * Vec2::new(theta.cos(), theta.sin());
        if circle_disk_arc_length(y, model.eval(y), center, disk.outer) < min_arc {
            continue;
        }
        let layout = SinogramLayout::new(GeometryId::RotationalCst, vec![t], vec![theta])?;
        let compton = map.scale() * assemble_forward(&model, grid, &layout, quad)?.apply(&f)?.values[0];
        let equidistant = map.equidistant_integral(&f_tilde, map.lambda_of_t(t)?, theta, quad);
        num += (equidistant - compton).powi(2);
        den += compton * compton;
        max_rel = max_rel.max((equidistant - compton).abs() / compton.abs());
        taken += 1;
    }
    Ok(PalamodovCheck {
        alpha,
        samples,
        relative_l2: (num / den).sqrt(),
        max_relative: max_rel,
    })
}

/// Energy of `img` outside the phantom dilated by `margin` pixels, after
/// the best scalar fit to `truth`, relative to the fitted image's energy.
pub fn background_energy(img: &Image, truth: &Image, margin: usize) -> Result<f64> {
    if img.spec != truth.spec {
        return Err(Error::InvalidInput("streak energy needs a shared grid".into()));
    }
    let c = best_scale(&img.values, &truth.values);
    let fitted = img.scaled(c);
    let mask = dilate(truth, margin);
    let outside: f64 = fitted.values.iter().zip(&mask).filter(|(_, &m)| !m).map(|(v, _)| v * v).sum();
    let total: f64 = fitted.values.iter().map(|v| v * v).sum();
    Ok(if total == 0.0 { 0.0 } else { outside / total })
}

fn dilate(img: &Image, margin: usize) -> Vec<bool> {
    let (nx, ny) = (img.spec.nx, img.spec.ny);
    let m = margin as isize;
    let mut out = vec![false; img.values.len()];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let hit = (-m..=m).any(|dj| {
                (-m..=m).any(|di| {
                    let (a, b) = (i + di, j + dj);
                    a >= 0 && b >= 0 && a < nx as isize && b < ny as isize && img.get(a as usize, b as usize) != 0.0
                })
            });
            out[img.spec.index(i as usize, j as usize)] = hit;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSide {
    Low,
    High,
}

/// The last `width` samples before a sinogram crop, along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinogramEdge {
    /// 1 or 2.
    pub axis: u8,
    pub side: EdgeSide,
    pub width: usize,
}

impl SinogramEdge {
    pub fn contains(&self, sino: &Sinogram, i1: usize, i2: usize) -> bool {
        let (n1, n2) = sino.shape();
        let (i, n) = if self.axis == 1 { (i1, n1) } else { (i2, n2) };
        match self.side {
            EdgeSide::Low => i < self.width,
            EdgeSide::High => i + self.width >= n,
        }
    }
}

/// Fraction of the backprojected energy `‖Aᵀ F‖²` contributed by the edge
/// band of the filtered sinogram `F`: the streaks along spheres whose
/// centers sit at the crop.
pub fn edge_band_fraction(filtered: &Sinogram, proj: &Projector, edge: &SinogramEdge) -> Result<f64> {
    if edge.axis != 1 && edge.axis != 2 {
        return Err(Error::InvalidInput("edge axis must be 1 or 2".into()));
    }
    let (n1, n2) = filtered.shape();
    let mut band = filtered.values.clone();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            if !edge.contains(filtered, i1, i2) {
                band[filtered.index(i1, i2)] = 0.0;
            }
        }
    }
    let total = proj.apply_transpose(filtered)?.norm();
    let part = proj.apply_transpose(&filtered.with_values(band)?)?.norm();
    Ok(if total == 0.0 { 0.0 } else { (part / total).powi(2) })
}

/// Edge-band fractions of filtered backprojection with a sharp crop and
/// with a smooth cutoff, on noiseless data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreakComparison {
    pub sharp: f64,
    pub smooth: f64,
}

impl StreakComparison {
    pub fn ratio(&self) -> f64 {
        self.smooth / self.sharp
    }
}

pub fn compare_streaks(prep: &Prepared, cutoff: &CutoffConfig, edge: &SinogramEdge) -> Result<StreakComparison> {
    let filter = |cut: Option<&CutoffProfile>| match prep.config.geometry {
        GeometryConfig::LinearCst { .. } => fbp_filter_linear(&prep.clean, cut),
        GeometryConfig::ConstantR { .. } => fbp_filter_constant_r(&prep.clean, cut),
        GeometryConfig::RotationalCst { .. } => Err(Error::Config("no filtered backprojection for the rotational geometry".into())),
    };
    let proj = &prep.recon_projector;
    Ok(StreakComparison {
        sharp: edge_band_fraction(&filter(None)?, proj, edge)?,
        smooth: edge_band_fraction(&filter(Some(&cutoff.profile))?, proj, edge)?,
    })
}

/// Relative error of `img` against `truth` restricted to pixels whose
/// centers satisfy `keep`.
pub fn masked_lsq_error(img: &Image, truth: &Image, keep: impl Fn(Vec2) -> bool) -> Result<f64> {
    if img.spec != truth.spec {
        return Err(Error::InvalidInput("δ needs both images on the same grid".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (k, c) in truth.spec.centers() {
        if keep(c) {
            num += (img.values[k] - truth.values[k]).powi(2);
            den += truth.values[k].powi(2);
        }
    }
    if den == 0.0 {
        return Err(Error::InvalidInput("truth vanishes on the mask".into()));
    }
    Ok((num / den).sqrt())
}
