//! Reflection and extension machinery.
//!
//! Three reflection principles drive everything here:
//!
//! 1. Across a horizontal boundary curve: a surface continuous up to a
//!    regular analytic arc at constant height extends by the arc reflection
//!    `R_Gamma = gamma . conj . gamma^{-1}` in the plane paired with the
//!    planar symmetry in the height.
//! 2. Across an isotropic (vertical) boundary segment: in blow-up strip
//!    coordinates the extension satisfies
//!    `X(Pi(-r, pi - theta)) = (R_Gamma(h(Pi(r, theta))), a + b - t(Pi(r, theta)))`,
//!    and the seam `r = 0` traces the isotropic segment itself.
//! 3. When the projected boundary is a straight segment, the isotropic
//!    reflection specializes to the 180-degree rotation about the parallel
//!    horizontal line through the midpoint of the segment.
//!
//! `MotionI3` models the congruences these reflections generate (conformal or
//! anti-conformal planar part, affine height map); `orbit_tiling` iterates
//! generators to tile space and detect translation periods.

use crate::expr::{ComplexExpr, EvalError};
use crate::harmonic::BlowUpChart;
use crate::mesh::Mesh;
use crate::weierstrass::{Chart, Point3, Provenance, SurfaceError, SurfaceEval, SurfaceMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReflectError {
    #[error("point {at} outside the reflection neighborhood of the arc")]
    OutsideNeighborhood { at: Complex64 },
    #[error("circle inversion undefined at the center {at}")]
    AtCenter { at: Complex64 },
    #[error("arc is not regular: {0}")]
    IrregularArc(String),
    #[error("motion is not planar-affine and cannot be composed")]
    NonAffine,
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Expr(#[from] EvalError),
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// A regular simple analytic arc with a computable reflection.
#[derive(Debug, Clone)]
pub enum ArcChart {
    /// Straight line through `point` with unit `direction`.
    Line { point: Complex64, direction: Complex64 },
    Circle { center: Complex64, radius: f64 },
    Analytic(AnalyticArc),
}

/// Analytic arc given by a parametrization `gamma(s)` over a real interval,
/// extended holomorphically to complex parameters for the reflection.
#[derive(Debug, Clone)]
pub struct AnalyticArc {
    gamma: ComplexExpr,
    derivative: ComplexExpr,
    interval: (f64, f64),
    /// Precomputed samples seeding the Newton inversion.
    seeds: Vec<(f64, Complex64)>,
}

const ARC_SEED_COUNT: usize = 256;
const NEWTON_MAX_STEPS: usize = 20;

impl AnalyticArc {
    pub fn new(gamma: ComplexExpr, interval: (f64, f64)) -> Result<Self, ReflectError> {
        if !gamma.is_analytic() {
            return Err(ReflectError::IrregularArc(
                "parametrization contains non-analytic nodes".into(),
            ));
        }
        if interval.0.is_nan() || interval.1.is_nan() || interval.0 >= interval.1 {
            return Err(ReflectError::IrregularArc("empty parameter interval".into()));
        }
        let derivative = gamma
            .differentiate()
            .map_err(|e| ReflectError::IrregularArc(e.to_string()))?;
        let mut seeds = Vec::with_capacity(ARC_SEED_COUNT);
        for k in 0..ARC_SEED_COUNT {
            let s = interval.0
                + (interval.1 - interval.0) * (k as f64 + 0.5) / ARC_SEED_COUNT as f64;
            let z = gamma.eval(Complex64::new(s, 0.0))?;
            let d = derivative.eval(Complex64::new(s, 0.0))?;
            if d.norm() < 1e-12 {
                return Err(ReflectError::IrregularArc(format!(
                    "gamma' vanishes near s = {s}"
                )));
            }
            seeds.push((s, z));
        }
        Ok(AnalyticArc { gamma, derivative, interval, seeds })
    }

    pub fn point_at(&self, s: f64) -> Result<Complex64, ReflectError> {
        Ok(self.gamma.eval(Complex64::new(s, 0.0))?)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Local inverse of the analytic continuation of gamma, by Newton from
    /// the nearest precomputed arc sample.
    fn invert(&self, z: Complex64) -> Result<Complex64, ReflectError> {
        let (mut s, _) = self
            .seeds
            .iter()
            .map(|&(s, g)| (s, (g - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(s, d)| (Complex64::new(s, 0.0), d))
            .ok_or(ReflectError::OutsideNeighborhood { at: z })?;
        let scale = z.norm().max(1.0);
        for _ in 0..NEWTON_MAX_STEPS {
            let g = self.gamma.eval(s)?;
            if (g - z).norm() <= 1e-13 * scale {
                return Ok(s);
            }
            let d = self.derivative.eval(s)?;
            if d.norm() < 1e-14 {
                return Err(ReflectError::OutsideNeighborhood { at: z });
            }
            s -= (g - z) / d;
            if !s.re.is_finite() || !s.im.is_finite() {
                return Err(ReflectError::OutsideNeighborhood { at: z });
            }
        }
        let g = self.gamma.eval(s)?;
        if (g - z).norm() <= 1e-10 * scale {
            Ok(s)
        } else {
            Err(ReflectError::OutsideNeighborhood { at: z })
        }
    }
}

impl ArcChart {
    pub fn line(point: Complex64, direction: Complex64) -> Result<Self, ReflectError> {
        let n = direction.norm();
        if n == 0.0 {
            return Err(ReflectError::IrregularArc("zero direction".into()));
        }
        Ok(ArcChart::Line { point, direction: direction / n })
    }

    pub fn real_axis() -> Self {
        ArcChart::Line { point: Complex64::new(0.0, 0.0), direction: Complex64::new(1.0, 0.0) }
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self, ReflectError> {
        if radius <= 0.0 {
            return Err(ReflectError::IrregularArc("non-positive radius".into()));
        }
        Ok(ArcChart::Circle { center, radius })
    }

    pub fn analytic(gamma: ComplexExpr, interval: (f64, f64)) -> Result<Self, ReflectError> {
        Ok(ArcChart::Analytic(AnalyticArc::new(gamma, interval)?))
    }

    /// A point on the arc for parameter `s` (arc-specific parametrization:
    /// offset along a line, angle on a circle, gamma parameter otherwise).
    pub fn point_at(&self, s: f64) -> Result<Complex64, ReflectError> {
        match self {
            ArcChart::Line { point, direction } => Ok(point + direction * s),
            ArcChart::Circle { center, radius } => {
                Ok(center + radius * Complex64::new(s.cos(), s.sin()))
            }
            ArcChart::Analytic(arc) => arc.point_at(s),
        }
    }

    /// The reflection R_Gamma across the arc: closed form for lines and
    /// circles, Newton-based `gamma(conj(gamma^{-1}(z)))` for analytic arcs.
    pub fn reflect(&self, z: Complex64) -> Result<Complex64, ReflectError> {
        match self {
            ArcChart::Line { point, direction } => {
                Ok(point + direction * direction * (z - point).conj())
            }
            ArcChart::Circle { center, radius } => {
                let rel = z - center;
                if rel.norm() == 0.0 {
                    return Err(ReflectError::AtCenter { at: z });
                }
                Ok(center + radius * radius / rel.conj())
            }
            ArcChart::Analytic(arc) => {
                let s = arc.invert(z)?;
                Ok(arc.gamma.eval(s.conj())?)
            }
        }
    }

    /// Planar-map form of the reflection when it is affine (lines only).
    fn as_planar_map(&self) -> PlanarMap {
        match self {
            ArcChart::Line { point, direction } => {
                let scale = direction * direction;
                PlanarMap::AntiConformal { scale, offset: point - scale * point.conj() }
            }
            ArcChart::Circle { center, radius } => {
                PlanarMap::CircleInversion { center: *center, radius: *radius }
            }
            ArcChart::Analytic(arc) => PlanarMap::ArcReflection(arc.clone()),
        }
    }
}

pub fn reflect_arc(arc: &ArcChart, z: Complex64) -> Result<Complex64, ReflectError> {
    arc.reflect(z)
}

/// Planar part of a congruence of the isotropic 3-space.
#[derive(Debug, Clone)]
pub enum PlanarMap {
    /// z -> scale * z + offset
    Conformal { scale: Complex64, offset: Complex64 },
    /// z -> scale * conj(z) + offset
    AntiConformal { scale: Complex64, offset: Complex64 },
    CircleInversion { center: Complex64, radius: f64 },
    ArcReflection(AnalyticArc),
}

impl PlanarMap {
    pub fn identity() -> Self {
        PlanarMap::Conformal { scale: Complex64::new(1.0, 0.0), offset: Complex64::new(0.0, 0.0) }
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64, ReflectError> {
        match self {
            PlanarMap::Conformal { scale, offset } => Ok(scale * z + offset),
            PlanarMap::AntiConformal { scale, offset } => Ok(scale * z.conj() + offset),
            PlanarMap::CircleInversion { center, radius } => {
                let rel = z - center;
                if rel.norm() == 0.0 {
                    return Err(ReflectError::AtCenter { at: z });
                }
                Ok(center + radius * radius / rel.conj())
            }
            PlanarMap::ArcReflection(arc) => {
                let s = arc.invert(z)?;
                Ok(arc.gamma.eval(s.conj())?)
            }
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self, PlanarMap::Conformal { .. } | PlanarMap::AntiConformal { .. })
    }

    /// Orientation of the map as a diffeomorphism of the plane.
    fn orientation(&self) -> f64 {
        match self {
            PlanarMap::Conformal { .. } => 1.0,
            _ => -1.0,
        }
    }
}

/// Height part: t -> eps * t + gx * x + gy * y + delta (the gx, gy terms
/// arise from isotropic shears and their compositions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalMap {
    pub eps: f64,
    pub gx: f64,
    pub gy: f64,
    pub delta: f64,
}

impl VerticalMap {
    pub fn identity() -> Self {
        VerticalMap { eps: 1.0, gx: 0.0, gy: 0.0, delta: 0.0 }
    }

    pub fn flip(height: f64) -> Self {
        VerticalMap { eps: -1.0, gx: 0.0, gy: 0.0, delta: 2.0 * height }
    }

    fn apply(&self, p: &Point3) -> f64 {
        self.eps * p.t + self.gx * p.x + self.gy * p.y + self.delta
    }
}

/// An affine symmetry of the isotropic 3-space: a conformal or anti-conformal
/// planar part over an affine height map. Reflections across horizontal
/// curves and isotropic lines, isotropic shears, rotations, and translations
/// all take this shape.
#[derive(Debug, Clone)]
pub struct MotionI3 {
    pub planar: PlanarMap,
    pub vertical: VerticalMap,
}

impl MotionI3 {
    pub fn identity() -> Self {
        MotionI3 { planar: PlanarMap::identity(), vertical: VerticalMap::identity() }
    }

    pub fn translation(v: [f64; 3]) -> Self {
        MotionI3 {
            planar: PlanarMap::Conformal {
                scale: Complex64::new(1.0, 0.0),
                offset: Complex64::new(v[0], v[1]),
            },
            vertical: VerticalMap { eps: 1.0, gx: 0.0, gy: 0.0, delta: v[2] },
        }
    }

    /// The shear (x, y, t) -> (x, y, t - a x - b y - c) that levels the
    /// non-vertical plane t = a x + b y + c; it preserves the isotropic
    /// metric.
    pub fn shear(a: f64, b: f64, c: f64) -> Self {
        MotionI3 {
            planar: PlanarMap::identity(),
            vertical: VerticalMap { eps: 1.0, gx: -a, gy: -b, delta: -c },
        }
    }

    /// 180-degree rotation about the horizontal line through `point` at
    /// height `height` with planar unit `direction`: planar reflection
    /// across the line paired with t -> 2 height - t.
    pub fn rotation_about_horizontal_line(
        point: Complex64,
        direction: Complex64,
        height: f64,
    ) -> Result<Self, ReflectError> {
        let arc = ArcChart::line(point, direction)?;
        Ok(MotionI3 { planar: arc.as_planar_map(), vertical: VerticalMap::flip(height) })
    }

    /// Reflection used by the horizontal-curve principle: R_Gamma in the
    /// plane, t -> 2 height - t.
    pub fn horizontal_reflection(arc: &ArcChart, height: f64) -> Self {
        MotionI3 { planar: arc.as_planar_map(), vertical: VerticalMap::flip(height) }
    }

    pub fn apply(&self, p: &Point3) -> Result<Point3, ReflectError> {
        let h = self.planar.apply(p.planar())?;
        let t = self.vertical.apply(p);
        Ok(Point3::from_planar(h, t))
    }

    /// Composition self . other (apply `other` first). Defined for
    /// planar-affine motions.
    pub fn compose(&self, other: &MotionI3) -> Result<MotionI3, ReflectError> {
        if !self.planar.is_affine() || !other.planar.is_affine() {
            return Err(ReflectError::NonAffine);
        }
        let planar = match (&self.planar, &other.planar) {
            (
                PlanarMap::Conformal { scale: a1, offset: b1 },
                PlanarMap::Conformal { scale: a2, offset: b2 },
            ) => PlanarMap::Conformal { scale: a1 * a2, offset: a1 * b2 + b1 },
            (
                PlanarMap::Conformal { scale: a1, offset: b1 },
                PlanarMap::AntiConformal { scale: a2, offset: b2 },
            ) => PlanarMap::AntiConformal { scale: a1 * a2, offset: a1 * b2 + b1 },
            (
                PlanarMap::AntiConformal { scale: a1, offset: b1 },
                PlanarMap::Conformal { scale: a2, offset: b2 },
            ) => PlanarMap::AntiConformal {
                scale: a1 * a2.conj(),
                offset: a1 * b2.conj() + b1,
            },
            (
                PlanarMap::AntiConformal { scale: a1, offset: b1 },
                PlanarMap::AntiConformal { scale: a2, offset: b2 },
            ) => PlanarMap::Conformal {
                scale: a1 * a2.conj(),
                offset: a1 * b2.conj() + b1,
            },
            _ => unreachable!("affinity checked above"),
        };
        // Height: t'' = e1 (e2 t + g2.(x,y) + d2) + g1.planar2(x,y) + d1.
        let (e1, g1x, g1y, d1) =
            (self.vertical.eps, self.vertical.gx, self.vertical.gy, self.vertical.delta);
        let (e2, g2x, g2y, d2) =
            (other.vertical.eps, other.vertical.gx, other.vertical.gy, other.vertical.delta);
        // planar2(x, y) written as an R-linear map: z -> A z + B conj(z) + C.
        let (pa, pb, pc) = match &other.planar {
            PlanarMap::Conformal { scale, offset } => {
                (*scale, Complex64::new(0.0, 0.0), *offset)
            }
            PlanarMap::AntiConformal { scale, offset } => {
                (Complex64::new(0.0, 0.0), *scale, *offset)
            }
            _ => unreachable!(),
        };
        // g1 . planar2(x, y) in terms of (x, y): expand z = x + i y.
        // Re planar2 = Re(A + B) x - Im(A - B) y + Re C
        // Im planar2 = Im(A + B) x + Re(A - B) y + Im C
        let re_x = (pa + pb).re;
        let re_y = -(pa - pb).im;
        let im_x = (pa + pb).im;
        let im_y = (pa - pb).re;
        let vertical = VerticalMap {
            eps: e1 * e2,
            gx: e1 * g2x + g1x * re_x + g1y * im_x,
            gy: e1 * g2y + g1x * re_y + g1y * im_y,
            delta: e1 * d2 + g1x * pc.re + g1y * pc.im + d1,
        };
        Ok(MotionI3 { planar, vertical })
    }

    pub fn inverse(&self) -> Result<MotionI3, ReflectError> {
        let planar = match &self.planar {
            PlanarMap::Conformal { scale, offset } => {
                PlanarMap::Conformal { scale: 1.0 / scale, offset: -offset / scale }
            }
            PlanarMap::AntiConformal { scale, offset } => {
                // inverse of z -> a conj(z) + b is z -> conj((z - b)/a)
                let inv_scale = (1.0 / scale).conj();
                PlanarMap::AntiConformal { scale: inv_scale, offset: -(offset / scale).conj() }
            }
            _ => return Err(ReflectError::NonAffine),
        };
        // t = (t' - g.(x, y) - d)/e with (x, y) = planar^{-1}(x', y');
        // realized as (height removal) . (planar inverse) so the g-term sees
        // the preimage coordinates.
        let planar_inverse = MotionI3 { planar, vertical: VerticalMap::identity() };
        let e = 1.0 / self.vertical.eps;
        let height_removal = MotionI3 {
            planar: PlanarMap::identity(),
            vertical: VerticalMap {
                eps: e,
                gx: -e * self.vertical.gx,
                gy: -e * self.vertical.gy,
                delta: -e * self.vertical.delta,
            },
        };
        height_removal.compose(&planar_inverse)
    }

    /// True orientation of the motion as a map of R^3 (planar orientation
    /// times the sign of eps); negative motions flip triangle winding.
    pub fn orientation(&self) -> f64 {
        self.planar.orientation() * self.vertical.eps.signum()
    }

    /// Pure translation detection with tolerance.
    pub fn as_translation(&self, tol: f64) -> Option<[f64; 3]> {
        match &self.planar {
            PlanarMap::Conformal { scale, offset } => {
                if (scale - Complex64::new(1.0, 0.0)).norm() <= tol
                    && (self.vertical.eps - 1.0).abs() <= tol
                    && self.vertical.gx.abs() <= tol
                    && self.vertical.gy.abs() <= tol
                {
                    Some([offset.re, offset.im, self.vertical.delta])
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Fingerprint for orbit deduplication: planar images of three
    /// non-collinear probes plus the height coefficients, quantized to 1e-9.
    pub fn fingerprint(&self) -> Result<[i64; 10], ReflectError> {
        let probes = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let mut out = [0i64; 10];
        let mut k = 0;
        for p in probes {
            let q = self.planar.apply(p)?;
            out[k] = quantize(q.re);
            out[k + 1] = quantize(q.im);
            k += 2;
        }
        out[6] = quantize(self.vertical.eps);
        out[7] = quantize(self.vertical.gx);
        out[8] = quantize(self.vertical.gy);
        out[9] = quantize(self.vertical.delta);
        Ok(out)
    }
}

fn quantize(x: f64) -> i64 {
    (x / 1e-9).round() as i64
}

/// Exact image of a point under the metric-preserving shear of the plane
/// t = a x + b y + c to height zero.
pub fn isotropic_shear(a: f64, b: f64, c: f64, p: Point3) -> Point3 {
    Point3::new(p.x, p.y, p.t - a * p.x - b * p.y - c)
}

/// Tolerances for the validation steps of the extension constructors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExtensionTolerances {
    /// Allowed |t - plane height| on a horizontal boundary arc.
    pub boundary_height: f64,
    /// Allowed deviation of a projected boundary from a straight line.
    pub straightness: f64,
}

impl Default for ExtensionTolerances {
    fn default() -> Self {
        ExtensionTolerances { boundary_height: 1e-6, straightness: 1e-8 }
    }
}

/// Boundary piece of a half-plane or disk chart used for validation
/// sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BoundaryInterval {
    /// [lo, hi] on the real axis.
    RealAxis { lo: f64, hi: f64 },
    /// Angles [lo, hi] on the unit circle.
    DiskArc { lo: f64, hi: f64 },
}

impl BoundaryInterval {
    fn sample(&self, n: usize) -> Vec<Complex64> {
        let (lo, hi) = match self {
            BoundaryInterval::RealAxis { lo, hi } => (*lo, *hi),
            BoundaryInterval::DiskArc { lo, hi } => (*lo, *hi),
        };
        (0..n)
            .map(|k| {
                let s = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
                match self {
                    BoundaryInterval::RealAxis { .. } => Complex64::new(s, 0.0),
                    BoundaryInterval::DiskArc { .. } => Complex64::new(s.cos(), s.sin()),
                }
            })
            .collect()
    }
}

/// Extension of a half-plane or disk surface across a horizontal boundary
/// arc: mirrored parameters evaluate the base surface and apply the motion
/// (R_Gamma, t -> 2 h0 - t).
pub struct HorizontalExtension {
    base: SurfaceMap,
    base_chart: Chart,
    arc: ArcChart,
    plane_height: f64,
}

impl HorizontalExtension {
    fn mirror_param(&self, w: Complex64) -> Complex64 {
        match self.base_chart {
            Chart::Disk => 1.0 / w.conj(),
            _ => w.conj(),
        }
    }

    fn in_base(&self, w: Complex64) -> bool {
        match self.base_chart {
            Chart::HalfPlane => w.im >= 0.0,
            Chart::Disk => w.norm() <= 1.0,
            _ => true,
        }
    }

    pub fn motion(&self) -> MotionI3 {
        MotionI3::horizontal_reflection(&self.arc, self.plane_height)
    }
}

impl SurfaceEval for HorizontalExtension {
    fn eval(&self, w: Complex64) -> Result<Point3, SurfaceError> {
        if self.in_base(w) {
            self.base.eval(w)
        } else {
            let p = self.base.eval(self.mirror_param(w))?;
            let h = self.arc.reflect(p.planar())?;
            Ok(Point3::from_planar(h, 2.0 * self.plane_height - p.t))
        }
    }
}

/// Extends a surface across a horizontal boundary curve at constant height.
/// Validates that the surface boundary over `boundary` really sits at
/// `plane_height` (within tolerance) and on the arc (fixed by R_Gamma), then
/// returns the doubled-chart surface.
pub fn reflect_horizontal(
    surface: &SurfaceMap,
    arc: ArcChart,
    plane_height: f64,
    boundary: BoundaryInterval,
    tols: ExtensionTolerances,
) -> Result<SurfaceMap, SurfaceError> {
    let base_chart = surface.chart();
    if !matches!(base_chart, Chart::HalfPlane | Chart::Disk) {
        return Err(SurfaceError::InvalidData(format!(
            "horizontal reflection needs a half-plane or disk chart, got {base_chart:?}"
        )));
    }
    for w in boundary.sample(24) {
        let p = surface.eval(w)?;
        if (p.t - plane_height).abs() > tols.boundary_height {
            return Err(ReflectError::Validation(format!(
                "boundary height {} differs from plane height {} at {w}",
                p.t, plane_height
            ))
            .into());
        }
        let fixed = arc.reflect(p.planar())?;
        let scale = p.planar().norm().max(1.0);
        if (fixed - p.planar()).norm() > 1e-5 * scale {
            return Err(ReflectError::Validation(format!(
                "projected boundary point {} is not on the reflection arc",
                p.planar()
            ))
            .into());
        }
    }
    let ext = HorizontalExtension {
        base: surface.clone(),
        base_chart,
        arc,
        plane_height,
    };
    Ok(SurfaceMap::from_custom(Chart::Plane, Arc::new(ext)).with_provenance(Provenance::Reflected))
}

/// Extension of a half-plane surface across an isotropic boundary segment,
/// in blow-up strip coordinates `r + i theta`.
pub struct IsotropicExtension {
    base: SurfaceMap,
    chart: BlowUpChart,
    arc: ArcChart,
    z0: Complex64,
}

impl IsotropicExtension {
    pub fn motion(&self) -> MotionI3 {
        MotionI3 {
            planar: self.arc.as_planar_map(),
            vertical: VerticalMap::flip(0.5 * (self.chart.left_value + self.chart.right_value)),
        }
    }

    pub fn blow_up(&self) -> BlowUpChart {
        self.chart
    }

    pub fn seam_point(&self, theta: f64) -> Point3 {
        Point3::from_planar(self.z0, self.chart.line_height(theta))
    }
}

impl SurfaceEval for IsotropicExtension {
    fn eval(&self, p: Complex64) -> Result<Point3, SurfaceError> {
        let (r, theta) = (p.re, p.im);
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(SurfaceError::OutsideChart { at: p, chart: Chart::Strip });
        }
        if r > 0.0 {
            self.base.eval(self.chart.project(r, theta))
        } else if r == 0.0 {
            Ok(self.seam_point(theta))
        } else {
            // The mirrored angle is the plain subtraction pi - theta so that
            // mirrored pairs evaluate the base at bit-identical points.
            let mirrored = std::f64::consts::PI - theta;
            let q = self.base.eval(self.chart.project(-r, mirrored))?;
            let h = self.arc.reflect(q.planar())?;
            let t = (self.chart.left_value + self.chart.right_value) - q.t;
            Ok(Point3::from_planar(h, t))
        }
    }
}

/// Builds the blow-up extension of a half-plane surface across the isotropic
/// segment over the jump point. Validates constant boundary heights on both
/// sides of the jump and that the projected boundary near the jump lies on
/// the given arc.
pub fn extend_isotropic(
    surface: &SurfaceMap,
    jump: BlowUpChart,
    arc: ArcChart,
    tols: ExtensionTolerances,
) -> Result<SurfaceMap, SurfaceError> {
    if surface.chart() != Chart::HalfPlane {
        return Err(SurfaceError::InvalidData(format!(
            "isotropic extension needs a half-plane chart, got {:?}",
            surface.chart()
        )));
    }
    let z0 = surface.eval_planar(Complex64::new(jump.jump, 0.0))?;
    // Constant heights a (left) and b (right) near the jump.
    for k in 1..=8 {
        let delta = 0.02 * k as f64;
        let left = surface.eval(Complex64::new(jump.jump - delta, 0.0))?;
        if (left.t - jump.left_value).abs() > tols.boundary_height {
            return Err(ReflectError::Validation(format!(
                "left boundary height {} != {} near the jump",
                left.t, jump.left_value
            ))
            .into());
        }
        let right = surface.eval(Complex64::new(jump.jump + delta, 0.0))?;
        if (right.t - jump.right_value).abs() > tols.boundary_height {
            return Err(ReflectError::Validation(format!(
                "right boundary height {} != {} near the jump",
                right.t, jump.right_value
            ))
            .into());
        }
        // Projected boundary on the arc: fixed points of R_Gamma.
        for p in [left, right] {
            let fixed = arc.reflect(p.planar())?;
            if (fixed - p.planar()).norm() > 1e-5 * p.planar().norm().max(1.0) {
                return Err(ReflectError::Validation(format!(
                    "projected boundary {} is not on the reflection arc",
                    p.planar()
                ))
                .into());
            }
        }
    }
    let ext = IsotropicExtension { base: surface.clone(), chart: jump, arc, z0 };
    Ok(SurfaceMap::from_custom(Chart::Strip, Arc::new(ext)).with_provenance(Provenance::Reflected))
}

/// The isotropic segment a bounded surface clusters to over the jump point:
/// `{z0} x [min(a, b), max(a, b)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSegment {
    pub z0: Complex64,
    pub t_min: f64,
    pub t_max: f64,
}

pub fn cluster_set(
    surface: &SurfaceMap,
    jump: &BlowUpChart,
) -> Result<ClusterSegment, SurfaceError> {
    let z0 = surface.eval_planar(Complex64::new(jump.jump, 0.0))?;
    Ok(ClusterSegment {
        z0,
        t_min: jump.left_value.min(jump.right_value),
        t_max: jump.left_value.max(jump.right_value),
    })
}

/// Specialization of the isotropic extension when the projected boundary is
/// a straight segment: the reflection is the 180-degree rotation about the
/// parallel horizontal line through the midpoint of the isotropic segment.
/// Returns the extension together with that motion.
pub fn reflect_parallel_lines(
    surface: &SurfaceMap,
    jump: BlowUpChart,
    line_direction: Complex64,
    tols: ExtensionTolerances,
) -> Result<(SurfaceMap, MotionI3), SurfaceError> {
    let n = line_direction.norm();
    if n == 0.0 {
        return Err(ReflectError::IrregularArc("zero line direction".into()).into());
    }
    let dir = line_direction / n;
    let z0 = surface.eval_planar(Complex64::new(jump.jump, 0.0))?;
    // Straightness of the projected boundary near the jump.
    for k in 1..=8 {
        let delta = 0.02 * k as f64;
        for sign in [-1.0, 1.0] {
            let p = surface.eval(Complex64::new(jump.jump + sign * delta, 0.0))?;
            let offset = p.planar() - z0;
            if cross(dir, offset).abs() > tols.straightness {
                return Err(ReflectError::Validation(format!(
                    "projected boundary is not straight within {:e} near {}",
                    tols.straightness,
                    p.planar()
                ))
                .into());
            }
        }
    }
    let arc = ArcChart::line(z0, dir).map_err(SurfaceError::from)?;
    let motion = MotionI3::rotation_about_horizontal_line(
        z0,
        dir,
        0.5 * (jump.left_value + jump.right_value),
    )
    .map_err(SurfaceError::from)?;
    let extended = extend_isotropic(surface, jump, arc, tols)?;
    Ok((extended, motion))
}

/// Orbit of a seed mesh under the group generated by `generators`, to the
/// given word depth, with translation periods detected along the way.
pub struct OrbitTiling {
    /// One mesh per distinct motion, breadth-first from the identity.
    pub meshes: Vec<Mesh>,
    pub motions: Vec<MotionI3>,
    /// Up to three independent translation periods of the generated group.
    pub periods: Vec<[f64; 3]>,
}

pub fn orbit_tiling(
    seed: &Mesh,
    generators: &[MotionI3],
    depth: usize,
) -> Result<OrbitTiling, ReflectError> {
    // The orbit walks the generated group, so inverses count as words too
    // (a lone translation reaches 7 copies at depth 3, not 4).
    //
    // Winding parity: an application of a boundary-reflection generator
    // corresponds to one parameter reflection of the underlying surface
    // (the extension evaluates at the mirrored parameter), so such copies
    // flip their parameter orientation regardless of the ambient
    // determinant. Boundary reflections are exactly the involutions among
    // the generators; proper motions such as translations leave the
    // parameter orientation alone.
    let identity_fp = MotionI3::identity().fingerprint()?;
    let mut steps: Vec<(MotionI3, bool)> = Vec::new();
    for g in generators {
        let reflective = g.compose(g)?.fingerprint()? == identity_fp;
        steps.push((g.clone(), reflective));
        if !reflective {
            steps.push((g.inverse()?, false));
        }
    }
    let mut motions: Vec<(MotionI3, bool)> = vec![(MotionI3::identity(), false)];
    let mut seen: HashMap<[i64; 10], usize> = HashMap::new();
    seen.insert(identity_fp, 0);
    let mut frontier: Vec<usize> = vec![0];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &idx in &frontier {
            let (base, parity) = motions[idx].clone();
            for (g, reflective) in &steps {
                let m = g.compose(&base)?;
                let fp = m.fingerprint()?;
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(fp) {
                    e.insert(motions.len());
                    next.push(motions.len());
                    motions.push((m, parity ^ reflective));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    // Translations in the generated set (and differences of equal planar
    // parts would also be translations, but word growth already surfaces
    // them at modest depth).
    let mut translations: Vec<[f64; 3]> = Vec::new();
    for (m, _) in &motions {
        if let Some(v) = m.as_translation(1e-9) {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-9 {
                translations.push(v);
            }
        }
    }
    let periods = independent_basis(&translations);
    let meshes = motions
        .iter()
        .map(|(m, odd_parity)| {
            let mut mesh = seed.transformed(m)?;
            // transformed() already flips for ambient-improper motions;
            // apply the parameter parity on top.
            if *odd_parity {
                mesh.flip_winding();
            }
            Ok(mesh)
        })
        .collect::<Result<Vec<_>, ReflectError>>()?;
    let motions = motions.into_iter().map(|(m, _)| m).collect();
    Ok(OrbitTiling { meshes, motions, periods })
}

/// Greedy shortest-vector basis of the lattice spanned by the translations:
/// up to three vectors with nondegenerate span.
fn independent_basis(translations: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut sorted: Vec<[f64; 3]> = translations.to_vec();
    sorted.sort_by(|a, b| norm3(a).total_cmp(&norm3(b)));
    let mut basis: Vec<[f64; 3]> = Vec::new();
    for v in sorted {
        match basis.len() {
            0 => basis.push(v),
            1 => {
                let c = cross3(&basis[0], &v);
                if norm3(&c) > 1e-9 * norm3(&basis[0]) * norm3(&v) {
                    basis.push(v);
                }
            }
            2 => {
                let d = det3(&basis[0], &basis[1], &v);
                if d.abs() > 1e-9 * norm3(&basis[0]) * norm3(&basis[1]) * norm3(&v) {
                    basis.push(v);
                    break;
                }
            }
            _ => break,
        }
    }
    basis
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Determinant of three row vectors (nondegeneracy check for period bases).
pub fn det3(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}
