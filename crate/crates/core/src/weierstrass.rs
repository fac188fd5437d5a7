//! Surfaces from Weierstrass data.
//!
//! A pair (F, G) of a holomorphic F and meromorphic G with FG holomorphic on
//! a simply connected chart generates the one-parameter family
//!
//! ```text
//! X_c(w) = Re [ anchor + integral_{w0}^{w} ((1 - c G^2), -i (1 + c G^2), 2 G) F dzeta ]
//! ```
//!
//! c = 0 is the zero mean curvature surface in the isotropic 3-space, c = 1 a
//! Euclidean minimal surface, c = -1 a Lorentzian maximal surface. The
//! representation leaves the lower integration limit free; `anchor` pins the
//! additive constant as the (complex) value of the natural primitives at the
//! basepoint, which is how the presets reproduce textbook closed forms
//! exactly rather than up to translation.
//!
//! The induced metric is |F|^2 |dw|^2, so surface singularities are exactly
//! the isolated zeros of F.

use crate::expr::{ComplexExpr, EvalError};
use crate::harmonic::HarmonicError;
use crate::quad::{self, IntegrandValue, QuadError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// A point of the simply isotropic 3-space: planar part (x, y) carrying the
/// metric, and the isotropic height t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Point3 { x, y, t }
    }

    pub fn from_planar(h: Complex64, t: f64) -> Self {
        Point3 { x: h.re, y: h.im, t }
    }

    pub fn planar(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }

    /// Euclidean norm in R^3 (used for residual scales, not the degenerate
    /// isotropic metric).
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.t * self.t).sqrt()
    }

    pub fn sub(&self, o: &Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.t - o.t)
    }
}

/// Parameter chart a surface lives on. Strip charts are blow-up coordinates
/// (r, theta) in R x (0, pi), packed into the parameter as `r + i theta`.
/// `Plane` is the doubled chart produced by reflecting a half-plane or disk
/// surface across its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    HalfPlane,
    Disk,
    Strip,
    Plane,
}

impl Chart {
    /// Interior membership (boundary points excluded).
    pub fn contains(&self, p: Complex64) -> bool {
        match self {
            Chart::HalfPlane => p.im > 0.0,
            Chart::Disk => p.norm() < 1.0,
            Chart::Strip => p.im > 0.0 && p.im < std::f64::consts::PI,
            Chart::Plane => true,
        }
    }

    /// Membership including the boundary curve where evaluation still makes
    /// sense (real axis, unit circle, full strip in r).
    pub fn contains_closure(&self, p: Complex64) -> bool {
        match self {
            Chart::HalfPlane => p.im >= 0.0,
            Chart::Disk => p.norm() <= 1.0 + 1e-12,
            Chart::Strip => p.im >= 0.0 && p.im <= std::f64::consts::PI,
            Chart::Plane => true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("parameter {at} outside {chart:?} chart")]
    OutsideChart { at: Complex64, chart: Chart },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Expr(#[from] EvalError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Reflect(#[from] crate::reflect::ReflectError),
    #[error("invalid data: {0}")]
    InvalidData(String),
}

/// Weierstrass data (F, G) plus everything the numerical pipeline needs:
/// basepoint, family parameter, chart, declared poles of G for path routing,
/// and the anchor fixing the free integration constant.
#[derive(Debug, Clone, Serialize)]
pub struct WeierstrassData {
    pub f: ComplexExpr,
    pub g: ComplexExpr,
    /// Family parameter: 0 isotropic, 1 Euclidean minimal, -1 Lorentzian maximal.
    pub c: f64,
    pub basepoint: Complex64,
    pub chart: Chart,
    /// Declared poles of G; straight integration segments are detoured
    /// around these.
    pub singularities: Vec<Complex64>,
    /// Complex values of the natural primitives of the three integrands at
    /// the basepoint. Zero for raw data (then X(basepoint) = 0).
    pub anchor: [Complex64; 3],
}

fn zero_anchor() -> [Complex64; 3] {
    [Complex64::new(0.0, 0.0); 3]
}

/// Default basepoint per chart: 1 on half-plane charts keeps clear of the
/// usual branch point at the origin, 0 is the disk center.
pub fn default_basepoint(chart: Chart) -> Complex64 {
    match chart {
        Chart::Disk => Complex64::new(0.0, 0.0),
        Chart::Strip => Complex64::new(0.0, std::f64::consts::FRAC_PI_2),
        _ => Complex64::new(1.0, 0.0),
    }
}

impl<'de> Deserialize<'de> for WeierstrassData {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Shadow {
            f: ComplexExpr,
            g: ComplexExpr,
            #[serde(default)]
            c: f64,
            #[serde(default)]
            basepoint: Option<Complex64>,
            chart: Chart,
            #[serde(default)]
            singularities: Vec<Complex64>,
            #[serde(default = "zero_anchor")]
            anchor: [Complex64; 3],
        }
        let shadow = Shadow::deserialize(deserializer)?;
        Ok(WeierstrassData {
            f: shadow.f,
            g: shadow.g,
            c: shadow.c,
            basepoint: shadow.basepoint.unwrap_or_else(|| default_basepoint(shadow.chart)),
            chart: shadow.chart,
            singularities: shadow.singularities,
            anchor: shadow.anchor,
        })
    }
}

impl WeierstrassData {
    pub fn new(f: ComplexExpr, g: ComplexExpr, basepoint: Complex64, chart: Chart) -> Self {
        WeierstrassData {
            f,
            g,
            c: 0.0,
            basepoint,
            chart,
            singularities: Vec::new(),
            anchor: zero_anchor(),
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_singularities(mut self, s: Vec<Complex64>) -> Self {
        self.singularities = s;
        self
    }

    pub fn with_anchor(mut self, anchor: [Complex64; 3]) -> Self {
        self.anchor = anchor;
        self
    }

    /// Conjugate data: (F, G) -> (-iF, -G). Evaluating the conjugate through
    /// the same representation formula yields the surface built from the
    /// conjugate harmonic coordinate functions; applying it twice maps
    /// F -> -F, i.e. the point reflection of the original through its base
    /// value. The anchor follows the same algebra, so preset closed forms
    /// stay pinned.
    pub fn conjugate(&self) -> Self {
        let minus_i = Complex64::new(0.0, -1.0);
        let i = Complex64::new(0.0, 1.0);
        let f = ComplexExpr::Mul(
            Box::new(ComplexExpr::Const(minus_i)),
            Box::new(self.f.clone()),
        )
        .canonicalize();
        let g = ComplexExpr::Neg(Box::new(self.g.clone())).canonicalize();
        WeierstrassData {
            f,
            g,
            c: self.c,
            basepoint: self.basepoint,
            chart: self.chart,
            singularities: self.singularities.clone(),
            anchor: [
                minus_i * self.anchor[0],
                minus_i * self.anchor[1],
                i * self.anchor[2],
            ],
        }
    }

    /// |F(w)|^2, the conformal factor of the induced metric.
    pub fn metric_factor(&self, w: Complex64) -> Result<f64, EvalError> {
        Ok(self.f.eval(w)?.norm_sqr())
    }

    /// Data-level validity: F, G analytic as trees, basepoint inside the
    /// chart closure, and FG bounded near every declared pole of G (sampled
    /// limit).
    pub fn validate(&self) -> Result<(), SurfaceError> {
        if !self.f.is_analytic() {
            return Err(SurfaceError::InvalidData(
                "F contains non-analytic nodes".into(),
            ));
        }
        if !self.g.is_analytic() {
            return Err(SurfaceError::InvalidData(
                "G contains non-analytic nodes".into(),
            ));
        }
        if !self.chart.contains_closure(self.basepoint) {
            return Err(SurfaceError::InvalidData(format!(
                "basepoint {} outside chart {:?}",
                self.basepoint, self.chart
            )));
        }
        for &pole in &self.singularities {
            let mut prev: Option<f64> = None;
            for k in 1..=4 {
                let delta = 10f64.powi(-2 * k);
                let probe = pole + Complex64::new(delta, 0.5 * delta);
                let fg = self.f.eval(probe).and_then(|f| Ok(f * self.g.eval(probe)?));
                match fg {
                    Ok(v) => {
                        let n = v.norm();
                        if let Some(p) = prev {
                            if n > 100.0 * p.max(1.0) {
                                return Err(SurfaceError::InvalidData(format!(
                                    "F*G appears unbounded near declared pole {pole}"
                                )));
                            }
                        }
                        prev = Some(n);
                    }
                    Err(_) => {
                        return Err(SurfaceError::InvalidData(format!(
                            "F*G not evaluable near declared pole {pole}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// Quadrature-backed evaluator for one Weierstrass datum.
#[derive(Debug, Clone)]
pub struct WeierstrassSurface {
    pub data: WeierstrassData,
    pub tol: f64,
}

impl WeierstrassSurface {
    pub fn new(data: WeierstrassData) -> Self {
        WeierstrassSurface { data, tol: quad::DEFAULT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// The three integrands ((1 - cG^2) F, -i (1 + cG^2) F, 2 G F) at zeta.
    /// For c = 0 the planar components reduce to F and never touch G.
    fn integrand(&self, z: Complex64) -> Result<[Complex64; 3], QuadError> {
        let f = self.data.f.eval(z)?;
        let g = self.data.g.eval(z)?;
        let minus_i = Complex64::new(0.0, -1.0);
        if self.data.c == 0.0 {
            Ok([f, minus_i * f, 2.0 * g * f])
        } else {
            let cg2 = self.data.c * g * g;
            let one = Complex64::new(1.0, 0.0);
            Ok([(one - cg2) * f, minus_i * (one + cg2) * f, 2.0 * g * f])
        }
    }

    fn raw_integral(
        &self,
        from: Complex64,
        to: Complex64,
    ) -> Result<[Complex64; 3], QuadError> {
        let path = quad::route_segment(
            from,
            to,
            &self.data.singularities,
            quad::DEFAULT_EXCLUSION_RADIUS,
        );
        quad::integrate_path(
            |z| self.integrand(z),
            &path,
            self.tol,
            quad::DEFAULT_PANEL_BUDGET,
        )
    }

    fn finish(&self, integral: [Complex64; 3]) -> Point3 {
        Point3::new(
            (self.data.anchor[0] + integral[0]).re,
            (self.data.anchor[1] + integral[1]).re,
            (self.data.anchor[2] + integral[2]).re,
        )
    }

    pub fn eval(&self, w: Complex64) -> Result<Point3, SurfaceError> {
        if !self.data.chart.contains_closure(w) {
            return Err(SurfaceError::OutsideChart { at: w, chart: self.data.chart });
        }
        Ok(self.finish(self.raw_integral(self.data.basepoint, w)?))
    }

    /// Planar coordinates only; skips the height integrand whose G factor
    /// may blow up at boundary jump points.
    pub fn eval_planar(&self, w: Complex64) -> Result<Complex64, SurfaceError> {
        let c = self.data.c;
        if c != 0.0 {
            return Ok(self.eval(w)?.planar());
        }
        let path = quad::route_segment(
            self.data.basepoint,
            w,
            &self.data.singularities,
            quad::DEFAULT_EXCLUSION_RADIUS,
        );
        let f = &self.data.f;
        let v: Complex64 = quad::integrate_path(
            |z| f.eval(z).map_err(QuadError::from),
            &path,
            self.tol,
            quad::DEFAULT_PANEL_BUDGET,
        )?;
        // For c = 0 the y-integrand is -i times the x-integrand.
        let a = self.data.anchor[0] + v;
        let b = self.data.anchor[1] + Complex64::new(0.0, -1.0) * v;
        Ok(Complex64::new(a.re, b.re))
    }

    /// Chained grid evaluation: consecutive parameters integrate from the
    /// previous endpoint instead of the basepoint, so a row of n nodes costs
    /// O(n) short integrals. Deterministic for a fixed slice.
    pub fn eval_batch(&self, ws: &[Complex64]) -> Vec<Result<Point3, SurfaceError>> {
        let mut out = Vec::with_capacity(ws.len());
        let mut prev: Option<(Complex64, [Complex64; 3])> = None;
        for &w in ws {
            if !self.data.chart.contains_closure(w) {
                out.push(Err(SurfaceError::OutsideChart { at: w, chart: self.data.chart }));
                prev = None;
                continue;
            }
            let from_prev = matches!(
                prev,
                Some((pw, _)) if (w - pw).norm() <= (w - self.data.basepoint).norm()
            );
            let result = if from_prev {
                let (pw, pv) = prev.unwrap();
                self.raw_integral(pw, w).map(|inc| pv.add(inc))
            } else {
                self.raw_integral(self.data.basepoint, w)
            };
            match result {
                Ok(integral) => {
                    prev = Some((w, integral));
                    out.push(Ok(self.finish(integral)));
                }
                Err(e) => {
                    prev = None;
                    out.push(Err(e.into()));
                }
            }
        }
        out
    }
}

/// How a surface map came to be; carried through to reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Weierstrass,
    HarmonicPair,
    ClosedForm,
    Reflected,
}

/// Pointwise surface evaluator implemented by reflection extensions.
pub trait SurfaceEval: Send + Sync {
    fn eval(&self, p: Complex64) -> Result<Point3, SurfaceError>;
}

type ClosedFormFn = dyn Fn(Complex64) -> Result<Point3, SurfaceError> + Send + Sync;
type PlanarFn = dyn Fn(Complex64) -> Result<Complex64, SurfaceError> + Send + Sync;
type HeightFn = dyn Fn(Complex64) -> Result<f64, SurfaceError> + Send + Sync;

#[derive(Clone)]
enum SurfaceKind {
    ClosedForm(Arc<ClosedFormFn>),
    Weierstrass(Arc<WeierstrassSurface>),
    HarmonicPair { h: Arc<PlanarFn>, t: Arc<HeightFn> },
    Custom(Arc<dyn SurfaceEval>),
}

/// An evaluatable chart w -> (x, y, t), with enough structure for meshing
/// and verification: chart kind, provenance, and an optional metric factor
/// for flagging singular vertices.
#[derive(Clone)]
pub struct SurfaceMap {
    kind: SurfaceKind,
    chart: Chart,
    provenance: Provenance,
    metric: Option<Arc<dyn Fn(Complex64) -> Option<f64> + Send + Sync>>,
}

impl std::fmt::Debug for SurfaceMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceMap")
            .field("chart", &self.chart)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SurfaceMap {
    pub fn from_closed_form<F>(chart: Chart, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Point3, SurfaceError> + Send + Sync + 'static,
    {
        SurfaceMap {
            kind: SurfaceKind::ClosedForm(Arc::new(f)),
            chart,
            provenance: Provenance::ClosedForm,
            metric: None,
        }
    }

    pub fn from_weierstrass(data: WeierstrassData) -> Self {
        let chart = data.chart;
        let surface = Arc::new(WeierstrassSurface::new(data));
        let metric_surface = surface.clone();
        SurfaceMap {
            kind: SurfaceKind::Weierstrass(surface),
            chart,
            provenance: Provenance::Weierstrass,
            metric: Some(Arc::new(move |w| metric_surface.data.metric_factor(w).ok())),
        }
    }

    /// Surface (Re h, Im h, t) from a holomorphic planar map and a harmonic
    /// height.
    pub fn from_harmonic_pair<H, T>(h: H, t: T, chart: Chart) -> Self
    where
        H: Fn(Complex64) -> Result<Complex64, SurfaceError> + Send + Sync + 'static,
        T: Fn(Complex64) -> Result<f64, SurfaceError> + Send + Sync + 'static,
    {
        SurfaceMap {
            kind: SurfaceKind::HarmonicPair { h: Arc::new(h), t: Arc::new(t) },
            chart,
            provenance: Provenance::HarmonicPair,
            metric: None,
        }
    }

    pub fn from_custom(chart: Chart, eval: Arc<dyn SurfaceEval>) -> Self {
        SurfaceMap {
            kind: SurfaceKind::Custom(eval),
            chart,
            provenance: Provenance::Reflected,
            metric: None,
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&self, p: Complex64) -> Result<Point3, SurfaceError> {
        match &self.kind {
            SurfaceKind::ClosedForm(f) => f(p),
            SurfaceKind::Weierstrass(s) => s.eval(p),
            SurfaceKind::HarmonicPair { h, t } => Ok(Point3::from_planar(h(p)?, t(p)?)),
            SurfaceKind::Custom(s) => s.eval(p),
        }
    }

    /// Batch evaluation; quadrature-backed surfaces chain along the slice.
    pub fn eval_batch(&self, ps: &[Complex64]) -> Vec<Result<Point3, SurfaceError>> {
        match &self.kind {
            SurfaceKind::Weierstrass(s) => s.eval_batch(ps),
            _ => ps.iter().map(|&p| self.eval(p)).collect(),
        }
    }

    /// Planar coordinates only (skips height quadrature for Weierstrass
    /// surfaces, where the height integrand may be singular on the boundary).
    pub fn eval_planar(&self, p: Complex64) -> Result<Complex64, SurfaceError> {
        match &self.kind {
            SurfaceKind::Weierstrass(s) => s.eval_planar(p),
            SurfaceKind::HarmonicPair { h, .. } => h(p),
            _ => Ok(self.eval(p)?.planar()),
        }
    }

    /// Metric conformal factor |F|^2 when the surface knows it.
    pub fn metric_factor(&self, p: Complex64) -> Option<f64> {
        self.metric.as_ref().and_then(|m| m(p))
    }
}

/// Evaluate the deformation family member X_c at w.
pub fn evaluate_family(data: &WeierstrassData, w: Complex64) -> Result<Point3, SurfaceError> {
    WeierstrassSurface::new(data.clone()).eval(w)
}

/// Rectangle in the chart plane for zero scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Rect { re_min, re_max, im_min, im_max }
    }

    fn contains(&self, p: Complex64, margin: f64) -> bool {
        p.re >= self.re_min - margin
            && p.re <= self.re_max + margin
            && p.im >= self.im_min - margin
            && p.im <= self.im_max + margin
    }
}

/// Numerically locate the zeros of F in a rectangle: coarse |F| scan on a
/// resolution^2 grid followed by Newton polish with the symbolic derivative.
/// Every returned point satisfies |F| <= 1e-10.
pub fn singular_points(
    data: &WeierstrassData,
    region: Rect,
    resolution: usize,
) -> Result<Vec<Complex64>, SurfaceError> {
    let f = &data.f;
    let df = f
        .differentiate()
        .map_err(|e| SurfaceError::InvalidData(e.to_string()))?;
    let n = resolution.max(2);
    let dx = (region.re_max - region.re_min) / (n - 1) as f64;
    let dy = (region.im_max - region.im_min) / (n - 1) as f64;
    let cell = dx.hypot(dy);
    let mut found: Vec<Complex64> = Vec::new();
    for jy in 0..n {
        for jx in 0..n {
            let z0 = Complex64::new(
                region.re_min + jx as f64 * dx,
                region.im_min + jy as f64 * dy,
            );
            let v0 = match f.eval(z0) {
                Ok(v) => v,
                Err(_) => continue,
            };
            // Only polish from grid nodes where a zero is plausibly within a
            // couple of cells: |F| below the local derivative scale.
            let slope = df.eval(z0).map(|d| d.norm()).unwrap_or(1.0);
            if v0.norm() > 2.0 * cell * slope.max(1e-6) {
                continue;
            }
            let mut z = z0;
            let mut converged = false;
            for _ in 0..50 {
                let fv = match f.eval(z) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                if fv.norm() <= 1e-12 {
                    converged = true;
                    break;
                }
                let dv = match df.eval(z) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                if dv.norm() == 0.0 {
                    break;
                }
                z -= fv / dv;
                if !z.re.is_finite() || !z.im.is_finite() {
                    break;
                }
            }
            if !converged || !region.contains(z, 1e-8) {
                continue;
            }
            if f.eval(z).map(|v| v.norm()).unwrap_or(f64::INFINITY) > 1e-10 {
                continue;
            }
            if found.iter().all(|q| (q - z).norm() > 1e-6) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(found)
}

/// Closed-form presets from the worked examples.
pub mod presets {
    use super::*;

    /// Helicoid data: (F, G) = (1, 1/(2 pi i w)) on the half-plane, anchored
    /// so X(r e^{i theta}) = (r cos theta, r sin theta, theta/pi).
    pub fn helicoid_data() -> WeierstrassData {
        let f = ComplexExpr::parse("1").expect("static expression");
        let g = ComplexExpr::parse("1/(2*pi*i*w)").expect("static expression");
        WeierstrassData::new(f, g, Complex64::new(1.0, 0.0), Chart::HalfPlane)
            .with_singularities(vec![Complex64::new(0.0, 0.0)])
            .with_anchor([
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 0.0),
            ])
    }

    /// Isotropic catenoid data: the conjugate of the helicoid.
    pub fn catenoid_data() -> WeierstrassData {
        helicoid_data().conjugate()
    }

    /// Closed-form helicoid (r cos theta, r sin theta, theta/pi) on the
    /// half-plane.
    pub fn helicoid_closed() -> SurfaceMap {
        SurfaceMap::from_closed_form(Chart::HalfPlane, |w| {
            Ok(Point3::new(w.re, w.im, w.arg() / std::f64::consts::PI))
        })
    }

    /// Closed-form isotropic catenoid (r sin theta, -r cos theta,
    /// log(r)/pi) on the half-plane.
    pub fn catenoid_closed() -> SurfaceMap {
        SurfaceMap::from_closed_form(Chart::HalfPlane, |w| {
            let r = w.norm();
            if r == 0.0 {
                return Err(SurfaceError::OutsideChart { at: w, chart: Chart::HalfPlane });
            }
            Ok(Point3::new(w.im, -w.re, r.ln() / std::f64::consts::PI))
        })
    }
}
