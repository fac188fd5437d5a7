//! The `isoflect` command-line front end.
//!
//! One JSON config document describes a job: a surface source (Weierstrass
//! data, a harmonic pair, or a named preset), chart bounds and resolution,
//! an optional reflection directive, tiling depth, output paths, and
//! tolerances. Subcommands `generate`, `reflect`, `tile`, `conjugate`,
//! `verify`, and `sc-map` run the corresponding pipeline and emit a mesh
//! plus a JSON report embedding the config hash and the tolerances used, so
//! identical configs reproduce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 verification/runtime failure, 2 config error.
//! `ISOFLECT_THREADS` caps the worker pool.

use crate::expr::ComplexExpr;
use crate::harmonic::{self, BlowUpChart, BoundaryData};
use crate::mesh::{self, GridBounds, Mesh, MeshFormat};
use crate::reflect::{
    self, ArcChart, BoundaryInterval, ExtensionTolerances, MotionI3, PlanarMap,
};
use crate::scpoly;
use crate::verify::{self, SuiteResult};
use crate::weierstrass::{
    presets, Chart, Provenance, Rect, SurfaceError, SurfaceMap, WeierstrassData,
};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<mesh::MeshError> for CliError {
    fn from(e: mesh::MeshError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<reflect::ReflectError> for CliError {
    fn from(e: reflect::ReflectError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<scpoly::ScError> for CliError {
    fn from(e: scpoly::ScError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceSource {
    /// Named preset: "helicoid", "isotropic-catenoid", or "schwarz-d".
    Preset(String),
    /// Full Weierstrass data.
    Weierstrass(WeierstrassData),
    /// Harmonic pair: a holomorphic planar expression plus piecewise
    /// constant boundary heights solved by the Poisson closed form.
    HarmonicPair { h: ComplexExpr, boundary: BoundaryData },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "arc")]
pub enum ArcConfig {
    Line { point: [f64; 2], direction: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
    Analytic { gamma: ComplexExpr, interval: [f64; 2] },
}

impl ArcConfig {
    fn build(&self) -> Result<ArcChart, CliError> {
        match self {
            ArcConfig::Line { point, direction } => ArcChart::line(
                Complex64::new(point[0], point[1]),
                Complex64::new(direction[0], direction[1]),
            )
            .map_err(|e| CliError::Config(format!("reflection.arc: {e}"))),
            ArcConfig::Circle { center, radius } => {
                ArcChart::circle(Complex64::new(center[0], center[1]), *radius)
                    .map_err(|e| CliError::Config(format!("reflection.arc: {e}")))
            }
            ArcConfig::Analytic { gamma, interval } => {
                ArcChart::analytic(gamma.clone(), (interval[0], interval[1]))
                    .map_err(|e| CliError::Config(format!("reflection.arc: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ReflectionDirective {
    /// Extension across a horizontal boundary curve at constant height.
    Horizontal { arc: ArcConfig, plane_height: f64, boundary: BoundaryInterval },
    /// Blow-up extension across the isotropic segment over a boundary jump.
    Isotropic { jump: BlowUpChart, arc: ArcConfig },
    /// Isotropic extension specialized to a straight projected boundary.
    ParallelLines { jump: BlowUpChart, direction: [f64; 2] },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute quadrature tolerance.
    pub quad: f64,
    /// Allowed |t - plane height| on a horizontal boundary arc.
    pub boundary_height: f64,
    /// Allowed deviation of a projected boundary from a straight line.
    pub straightness: f64,
    /// Seam weld tolerance in world units.
    pub weld: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: crate::quad::DEFAULT_TOL,
            boundary_height: 1e-6,
            straightness: 1e-8,
            weld: mesh::WELD_TOLERANCE,
        }
    }
}

impl Tolerances {
    fn extension(&self) -> ExtensionTolerances {
        ExtensionTolerances {
            boundary_height: self.boundary_height,
            straightness: self.straightness,
        }
    }
}

fn default_resolution() -> usize {
    48
}

fn default_depth() -> usize {
    1
}

fn default_format() -> MeshFormat {
    MeshFormat::Obj
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobConfig {
    pub surface: SurfaceSource,
    /// Family parameter override (onto Weierstrass sources).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Polygon order for the schwarz-d preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<GridBounds>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflection: Option<ReflectionDirective>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: MeshFormat,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl JobConfig {
    pub fn from_preset(name: &str) -> Result<Self, CliError> {
        match name {
            "helicoid" | "isotropic-catenoid" | "schwarz-d" => Ok(JobConfig {
                surface: SurfaceSource::Preset(name.to_string()),
                c: None,
                n: None,
                bounds: None,
                resolution: default_resolution(),
                reflection: None,
                depth: default_depth(),
                output: None,
                format: default_format(),
                tolerances: Tolerances::default(),
            }),
            other => Err(CliError::Config(format!(
                "preset: unknown preset `{other}` (expected helicoid, isotropic-catenoid, schwarz-d)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.resolution < 2 {
            return Err(CliError::Config(format!(
                "resolution: must be at least 2, got {}",
                self.resolution
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.quad", t.quad),
            ("tolerances.boundary-height", t.boundary_height),
            ("tolerances.straightness", t.straightness),
            ("tolerances.weld", t.weld),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(CliError::Config(format!("{name}: must be positive, got {v}")));
            }
        }
        if let Some(b) = &self.bounds {
            let increasing = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
            if !increasing(b.u.0, b.u.1) || !increasing(b.v.0, b.v.1) {
                return Err(CliError::Config("bounds: ranges must be increasing".into()));
            }
        }
        if let SurfaceSource::Preset(name) = &self.surface {
            if !matches!(name.as_str(), "helicoid" | "isotropic-catenoid" | "schwarz-d") {
                return Err(CliError::Config(format!("surface.preset: unknown `{name}`")));
            }
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(CliError::Config(format!("n: must be at least 2, got {n}")));
            }
        }
        Ok(())
    }

    /// Canonical serialization hash embedded in every report.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// A resolved surface: the map plus the data behind it when there is one.
#[derive(Debug)]
struct ResolvedSurface {
    surface: SurfaceMap,
    data: Option<WeierstrassData>,
    label: String,
}

fn resolve_surface(config: &JobConfig) -> Result<ResolvedSurface, CliError> {
    let n = config.n.unwrap_or(2);
    match &config.surface {
        SurfaceSource::Preset(name) => match name.as_str() {
            "helicoid" => {
                let mut data = presets::helicoid_data();
                if let Some(c) = config.c {
                    data.c = c;
                }
                Ok(ResolvedSurface {
                    surface: SurfaceMap::from_weierstrass(data.clone()),
                    data: Some(data),
                    label: "helicoid".into(),
                })
            }
            "isotropic-catenoid" => {
                let mut data = presets::catenoid_data();
                if let Some(c) = config.c {
                    data.c = c;
                }
                Ok(ResolvedSurface {
                    surface: SurfaceMap::from_weierstrass(data.clone()),
                    data: Some(data),
                    label: "isotropic-catenoid".into(),
                })
            }
            "schwarz-d" => {
                let surface = scpoly::schwarz_patch_with_tol(n, config.tolerances.quad)?;
                Ok(ResolvedSurface { surface, data: None, label: format!("schwarz-d-n{n}") })
            }
            other => Err(CliError::Config(format!("surface.preset: unknown `{other}`"))),
        },
        SurfaceSource::Weierstrass(data) => {
            let mut data = data.clone();
            if let Some(c) = config.c {
                data.c = c;
            }
            Ok(ResolvedSurface {
                surface: SurfaceMap::from_weierstrass(data.clone()),
                data: Some(data),
                label: "weierstrass".into(),
            })
        }
        SurfaceSource::HarmonicPair { h, boundary } => {
            if !h.is_analytic() {
                return Err(CliError::Config(
                    "surface.harmonic-pair.h: expression must be analytic".into(),
                ));
            }
            let chart = match boundary {
                BoundaryData::HalfPlane { .. } => Chart::HalfPlane,
                BoundaryData::Disk { .. } => Chart::Disk,
            };
            let h = h.clone();
            let bd = boundary.clone();
            let surface = SurfaceMap::from_harmonic_pair(
                move |w| h.eval(w).map_err(SurfaceError::from),
                move |w| harmonic::poisson(&bd, w).map_err(SurfaceError::from),
                chart,
            );
            Ok(ResolvedSurface { surface, data: None, label: "harmonic-pair".into() })
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct PlanarDescription {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct MotionDescription {
    pub planar: PlanarDescription,
    pub eps: f64,
    pub gx: f64,
    pub gy: f64,
    pub delta: f64,
}

impl MotionDescription {
    pub fn from_motion(m: &MotionI3) -> Self {
        let planar = match &m.planar {
            PlanarMap::Conformal { scale, offset } => PlanarDescription {
                kind: "conformal",
                scale: Some([scale.re, scale.im]),
                offset: Some([offset.re, offset.im]),
                center: None,
                radius: None,
            },
            PlanarMap::AntiConformal { scale, offset } => PlanarDescription {
                kind: "anti-conformal",
                scale: Some([scale.re, scale.im]),
                offset: Some([offset.re, offset.im]),
                center: None,
                radius: None,
            },
            PlanarMap::CircleInversion { center, radius } => PlanarDescription {
                kind: "circle-inversion",
                scale: None,
                offset: None,
                center: Some([center.re, center.im]),
                radius: Some(*radius),
            },
            PlanarMap::ArcReflection(_) => PlanarDescription {
                kind: "analytic-arc",
                scale: None,
                offset: None,
                center: None,
                radius: None,
            },
        };
        MotionDescription {
            planar,
            eps: m.vertical.eps,
            gx: m.vertical.gx,
            gy: m.vertical.gy,
            delta: m.vertical.delta,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
}

impl MeshSummary {
    fn from_mesh(m: &Mesh) -> Self {
        let (lo, hi) = m
            .bounding_box()
            .unwrap_or((crate::weierstrass::Point3::new(0.0, 0.0, 0.0), crate::weierstrass::Point3::new(0.0, 0.0, 0.0)));
        MeshSummary {
            vertices: m.vertices.len(),
            triangles: m.triangles.len(),
            bbox_min: lo.to_array(),
            bbox_max: hi.to_array(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GenerateReport {
    pub command: &'static str,
    pub surface: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
    pub chart: Chart,
    pub provenance: Provenance,
    pub mesh: MeshSummary,
    pub harmonicity_residual_max: f64,
    pub singular_points: Vec<[f64; 2]>,
    pub output: String,
}

#[derive(Debug, Serialize)]
pub struct ReflectReport {
    pub command: &'static str,
    pub surface: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
    pub motion: MotionDescription,
    pub seam_residual_max: f64,
    pub mesh: MeshSummary,
    pub output: String,
}

#[derive(Debug, Serialize)]
pub struct TileReport {
    pub command: &'static str,
    pub surface: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
    pub depth: usize,
    pub patches: usize,
    pub periods: Vec<[f64; 3]>,
    pub period_determinant: f64,
    pub motions: Vec<MotionDescription>,
    pub mesh: MeshSummary,
    pub output: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub surface: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ScMapReport {
    pub command: &'static str,
    pub n: usize,
    pub tolerance: f64,
    pub vertices: Vec<[f64; 2]>,
    pub edge_length_spread: f64,
    pub half_diagonal: f64,
    pub midpoint_params: Vec<[f64; 2]>,
}

fn write_report<T: Serialize>(report: &T, mesh_path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Runtime(format!("report serialization: {e}")))?;
    println!("{text}");
    if let Some(path) = mesh_path {
        let report_path = path.with_extension("report.json");
        std::fs::write(report_path, text.as_bytes())?;
    }
    Ok(())
}

fn output_path(config: &JobConfig, default_stem: &str) -> PathBuf {
    let ext = match config.format {
        MeshFormat::Obj => "obj",
        MeshFormat::Ply => "ply",
    };
    config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{default_stem}.{ext}")))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn mesh_surface(
    surface: &SurfaceMap,
    config: &JobConfig,
) -> Result<(Mesh, GridBounds), CliError> {
    let bounds = config.bounds.unwrap_or_else(|| GridBounds::default_for(surface.chart()));
    let grid = mesh::sample_grid(surface.chart(), config.resolution, &bounds)?;
    let mut built = mesh::build_mesh(surface, &grid)?;
    if surface.chart() == Chart::Disk {
        // Full-circle grids duplicate the phi = 0 column; weld it shut.
        built = built.welded(config.tolerances.weld);
    }
    Ok((built, bounds))
}

fn scan_region(chart: Chart, bounds: &GridBounds) -> Rect {
    match chart {
        Chart::HalfPlane => Rect::new(-bounds.u.1, bounds.u.1, 0.0, bounds.u.1),
        Chart::Disk => Rect::new(-bounds.u.1, bounds.u.1, -bounds.u.1, bounds.u.1),
        Chart::Strip | Chart::Plane => {
            Rect::new(-bounds.u.1.abs(), bounds.u.1.abs(), -bounds.u.1.abs(), bounds.u.1.abs())
        }
    }
}

pub fn cmd_generate(config: &JobConfig) -> Result<i32, CliError> {
    config.validate()?;
    let resolved = resolve_surface(config)?;
    let (built, bounds) = mesh_surface(&resolved.surface, config)?;
    let path = output_path(config, &resolved.label);
    mesh::export(&built, config.format, &path)?;
    let samples = verify::interior_samples(resolved.surface.chart(), 200, 0xBEE5);
    let harmonic = verify::harmonicity_residual(&resolved.surface, &samples)?;
    let singular = match &resolved.data {
        Some(data) => {
            crate::weierstrass::singular_points(data, scan_region(resolved.surface.chart(), &bounds), 40)?
                .into_iter()
                .map(|z| [z.re, z.im])
                .collect()
        }
        None => Vec::new(),
    };
    let report = GenerateReport {
        command: "generate",
        surface: resolved.label,
        config_hash: config.hash(),
        tolerances: config.tolerances,
        chart: resolved.surface.chart(),
        provenance: resolved.surface.provenance(),
        mesh: MeshSummary::from_mesh(&built),
        harmonicity_residual_max: harmonic.max_residual,
        singular_points: singular,
        output: path.display().to_string(),
    };
    write_report(&report, Some(&path))?;
    Ok(EXIT_OK)
}

pub fn cmd_conjugate(config: &JobConfig) -> Result<i32, CliError> {
    config.validate()?;
    let resolved = resolve_surface(config)?;
    let data = resolved.data.ok_or_else(|| {
        CliError::Config("surface: conjugate needs a Weierstrass-data source".into())
    })?;
    let conj = data.conjugate();
    let mut conj_config = config.clone();
    conj_config.surface = SurfaceSource::Weierstrass(conj);
    conj_config.c = None;
    let resolved = resolve_surface(&conj_config)?;
    let (built, bounds) = mesh_surface(&resolved.surface, config)?;
    let path = output_path(config, "conjugate");
    mesh::export(&built, config.format, &path)?;
    let samples = verify::interior_samples(resolved.surface.chart(), 200, 0xBEE5);
    let harmonic = verify::harmonicity_residual(&resolved.surface, &samples)?;
    let singular = match &resolved.data {
        Some(data) => {
            crate::weierstrass::singular_points(data, scan_region(resolved.surface.chart(), &bounds), 40)?
                .into_iter()
                .map(|z| [z.re, z.im])
                .collect()
        }
        None => Vec::new(),
    };
    let report = GenerateReport {
        command: "conjugate",
        surface: "conjugate".into(),
        config_hash: config.hash(),
        tolerances: config.tolerances,
        chart: resolved.surface.chart(),
        provenance: resolved.surface.provenance(),
        mesh: MeshSummary::from_mesh(&built),
        harmonicity_residual_max: harmonic.max_residual,
        singular_points: singular,
        output: path.display().to_string(),
    };
    write_report(&report, Some(&path))?;
    Ok(EXIT_OK)
}

pub fn cmd_reflect(config: &JobConfig) -> Result<i32, CliError> {
    config.validate()?;
    let directive = config.reflection.as_ref().ok_or_else(|| {
        CliError::Config("reflection: the reflect command needs a reflection directive".into())
    })?;
    let resolved = resolve_surface(config)?;
    let tols = config.tolerances.extension();
    let (extended, motion, seam_residual) = match directive {
        ReflectionDirective::Horizontal { arc, plane_height, boundary } => {
            let arc_chart = arc.build()?;
            let extended = reflect::reflect_horizontal(
                &resolved.surface,
                arc_chart.clone(),
                *plane_height,
                *boundary,
                tols,
            )
            .map_err(|e| CliError::Runtime(format!("horizontal reflection: {e}")))?;
            let motion = MotionI3::horizontal_reflection(&arc_chart, *plane_height);
            let residual =
                horizontal_seam_residual(&resolved.surface, &extended, &motion)?;
            (extended, motion, residual)
        }
        ReflectionDirective::Isotropic { jump, arc } => {
            let arc_chart = arc.build()?;
            let extended = reflect::extend_isotropic(&resolved.surface, *jump, arc_chart.clone(), tols)
                .map_err(|e| CliError::Runtime(format!("isotropic extension: {e}")))?;
            // R_Gamma in the plane, heights mirrored about the midpoint of
            // the isotropic segment.
            let motion = MotionI3::horizontal_reflection(
                &arc_chart,
                0.5 * (jump.left_value + jump.right_value),
            );
            let residual = isotropic_seam_residual(&extended, &motion)?;
            (extended, motion, residual)
        }
        ReflectionDirective::ParallelLines { jump, direction } => {
            let (extended, motion) = reflect::reflect_parallel_lines(
                &resolved.surface,
                *jump,
                Complex64::new(direction[0], direction[1]),
                tols,
            )
            .map_err(|e| CliError::Runtime(format!("parallel-line extension: {e}")))?;
            let residual = isotropic_seam_residual(&extended, &motion)?;
            (extended, motion, residual)
        }
    };
    let (built, _) = mesh_surface(&extended, config)?;
    let path = output_path(config, "reflected");
    mesh::export(&built, config.format, &path)?;
    let report = ReflectReport {
        command: "reflect",
        surface: resolved.label,
        config_hash: config.hash(),
        tolerances: config.tolerances,
        motion: MotionDescription::from_motion(&motion),
        seam_residual_max: seam_residual,
        mesh: MeshSummary::from_mesh(&built),
        output: path.display().to_string(),
    };
    write_report(&report, Some(&path))?;
    Ok(EXIT_OK)
}

/// Residual of the reflection relation on the extension: the image of each
/// sample must equal the extension evaluated at the mirrored parameter.
fn isotropic_seam_residual(extended: &SurfaceMap, motion: &MotionI3) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for k in 1..8 {
        let theta = k as f64 * std::f64::consts::PI / 8.0;
        for r in [0.2, 0.7, 1.3] {
            let p = extended.eval(Complex64::new(r, theta))?;
            let q = extended.eval(Complex64::new(-r, std::f64::consts::PI - theta))?;
            let mapped = motion.apply(&p)?;
            worst = worst.max(q.sub(&mapped).norm());
        }
    }
    Ok(worst)
}

fn horizontal_seam_residual(
    base: &SurfaceMap,
    extended: &SurfaceMap,
    motion: &MotionI3,
) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    let mirror = |w: Complex64| match base.chart() {
        Chart::Disk => 1.0 / w.conj(),
        _ => w.conj(),
    };
    let samples = verify::interior_samples(base.chart(), 40, 0x5EA1);
    for w in samples {
        let p = extended.eval(w)?;
        let q = extended.eval(mirror(w))?;
        let mapped = motion.apply(&p)?;
        worst = worst.max(q.sub(&mapped).norm());
    }
    Ok(worst)
}

pub fn cmd_tile(config: &JobConfig) -> Result<i32, CliError> {
    config.validate()?;
    let n = config.n.unwrap_or(2);
    match &config.surface {
        SurfaceSource::Preset(name) if name == "schwarz-d" => {
            if n != 2 {
                return Err(CliError::Config(
                    "n: the triply periodic tiling is the n = 2 construction".into(),
                ));
            }
            let tiling = scpoly::schwarz_d_tiling(config.depth, config.resolution)?;
            let welded = Mesh::weld_all(&tiling.orbit.meshes, config.tolerances.weld);
            let path = output_path(config, "schwarz-d-tiling");
            mesh::export(&welded, config.format, &path)?;
            let det = if tiling.orbit.periods.len() == 3 {
                reflect::det3(
                    &tiling.orbit.periods[0],
                    &tiling.orbit.periods[1],
                    &tiling.orbit.periods[2],
                )
            } else {
                0.0
            };
            let report = TileReport {
                command: "tile",
                surface: format!("schwarz-d-n{n}"),
                config_hash: config.hash(),
                tolerances: config.tolerances,
                depth: config.depth,
                patches: tiling.orbit.meshes.len(),
                periods: tiling.orbit.periods.clone(),
                period_determinant: det,
                motions: tiling
                    .orbit
                    .motions
                    .iter()
                    .map(MotionDescription::from_motion)
                    .collect(),
                mesh: MeshSummary::from_mesh(&welded),
                output: path.display().to_string(),
            };
            write_report(&report, Some(&path))?;
            Ok(EXIT_OK)
        }
        _ => Err(CliError::Config(
            "surface: tile currently requires the schwarz-d preset".into(),
        )),
    }
}

pub fn cmd_verify(config: &JobConfig) -> Result<i32, CliError> {
    config.validate()?;
    let resolved = resolve_surface(config)?;
    let scale = match resolved.surface.chart() {
        Chart::Disk => 3.0,
        _ => 6.0,
    };
    let suites = verify::run_standard_suites(&resolved.surface, resolved.data.as_ref(), scale)?;
    let passed = suites.iter().all(|s| s.passed);
    let report = VerifyReport {
        command: "verify",
        surface: resolved.label,
        config_hash: config.hash(),
        tolerances: config.tolerances,
        suites,
        passed,
    };
    write_report(&report, None)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_sc_map(n: usize, tol: f64, out: Option<&Path>) -> Result<i32, CliError> {
    if n < 2 {
        return Err(CliError::Config(format!("n: must be at least 2, got {n}")));
    }
    let chart = scpoly::PolygonChart::new(n, tol)?;
    let half_diagonal = scpoly::sc_map(n, Complex64::new(1.0, 0.0), tol)?;
    let report = ScMapReport {
        command: "sc-map",
        n,
        tolerance: tol,
        vertices: chart.vertices.iter().map(|v| [v.re, v.im]).collect(),
        edge_length_spread: chart.edge_length_spread(),
        half_diagonal: half_diagonal.re,
        midpoint_params: chart.midpoint_params.iter().map(|v| [v.re, v.im]).collect(),
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Runtime(format!("report serialization: {e}")))?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "isoflect",
    version,
    about = "Zero mean curvature surfaces in the simply isotropic 3-space: \
             generation, reflection extensions, and triply periodic tilings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a surface mesh from a config or preset
    Generate(JobArgs),
    /// Extend a surface across a horizontal curve or isotropic line
    Reflect(JobArgs),
    /// Tile space by iterated boundary reflections
    Tile(JobArgs),
    /// Mesh the conjugate surface of Weierstrass data
    Conjugate(JobArgs),
    /// Run the verification suites against a surface
    Verify(JobArgs),
    /// Report the Schwarz-Christoffel polygon data for a given order
    ScMap(ScMapArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// JSON job configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset name: helicoid, isotropic-catenoid, schwarz-d
    #[arg(long)]
    pub preset: Option<String>,
    /// Polygon order for schwarz-d
    #[arg(long)]
    pub n: Option<usize>,
    /// Tiling word depth
    #[arg(long)]
    pub depth: Option<usize>,
    /// Output mesh path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Mesh format: obj or ply
    #[arg(long)]
    pub format: Option<String>,
    /// Quadrature tolerance override
    #[arg(long)]
    pub tol: Option<f64>,
    /// Grid resolution override
    #[arg(long)]
    pub resolution: Option<usize>,
}

impl JobArgs {
    pub fn into_config(self) -> Result<JobConfig, CliError> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("config: cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<JobConfig>(&text)
                    .map_err(|e| CliError::Config(format!("config: {e}")))?
            }
            (None, Some(preset)) => JobConfig::from_preset(preset)?,
            (None, None) => {
                return Err(CliError::Config(
                    "config: provide --config PATH or --preset NAME".into(),
                ))
            }
        };
        if let (Some(_), Some(preset)) = (&self.config, &self.preset) {
            config.surface = SurfaceSource::Preset(preset.clone());
        }
        if let Some(n) = self.n {
            config.n = Some(n);
        }
        if let Some(depth) = self.depth {
            config.depth = depth;
        }
        if let Some(out) = self.out {
            config.output = Some(out);
        }
        if let Some(format) = self.format {
            config.format = format
                .parse()
                .map_err(|e: String| CliError::Config(format!("format: {e}")))?;
        }
        if let Some(tol) = self.tol {
            config.tolerances.quad = tol;
        }
        if let Some(resolution) = self.resolution {
            config.resolution = resolution;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ScMapArgs {
    /// Polygon order (2n-gon)
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output JSON path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Caps the worker pool from ISOFLECT_THREADS before any parallel work runs.
pub fn init_thread_pool() {
    if let Ok(value) = std::env::var("ISOFLECT_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    init_thread_pool();
    let outcome = match cli.command {
        Command::Generate(args) => args.into_config().and_then(|c| cmd_generate(&c)),
        Command::Reflect(args) => args.into_config().and_then(|c| cmd_reflect(&c)),
        Command::Tile(args) => args.into_config().and_then(|c| cmd_tile(&c)),
        Command::Conjugate(args) => args.into_config().and_then(|c| cmd_conjugate(&c)),
        Command::Verify(args) => args.into_config().and_then(|c| cmd_verify(&c)),
        Command::ScMap(args) => cmd_sc_map(args.n, args.tol, args.out.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
