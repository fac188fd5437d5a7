//! Adaptive contour integration along paths in the complex plane.
//!
//! The integrator is a globally adaptive Gauss–Kronrod (G7/K15) scheme: the
//! panel with the largest error estimate is bisected until the summed
//! estimate drops below the requested absolute tolerance or the panel budget
//! runs out. Integrands may be scalar or small vectors (the three Weierstrass
//! components share one pass over the path).
//!
//! [`integrate_from_basepoint`] fixes the free lower endpoint of the
//! representation-formula integrals: it integrates along the straight segment
//! between two chart points, inserting semicircular detours around declared
//! singularities that the segment passes too closely. On a simply connected
//! chart the detour never changes the value, only the conditioning.

use crate::expr::{ComplexExpr, EvalError};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Default absolute tolerance for contour integrals.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default panel budget for the global adaptive loop.
pub const DEFAULT_PANEL_BUDGET: usize = 1 << 14;
/// Default exclusion radius around declared singularities.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-3;

// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights; the classical QUADPACK qk15 constants.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Error)]
pub enum QuadError {
    #[error(
        "quadrature tolerance {tol:e} not reached within {budget} panels (estimate {achieved:e})"
    )]
    BudgetExhausted { tol: f64, budget: usize, achieved: f64 },
    #[error("path passes within exclusion radius {radius:e} of singularity at {at}")]
    SingularityTooClose { at: Complex64, radius: f64 },
    #[error("path segments {index} and {next} do not share an endpoint", next = index + 1)]
    Discontinuous { index: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One piece of a contour: a straight segment or a circular arc.
/// Arcs run counterclockwise when `end_angle > start_angle`.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

impl Segment {
    pub fn start(&self) -> Complex64 {
        match self {
            Segment::Line { from, .. } => *from,
            Segment::Arc { center, radius, start_angle, .. } => {
                center + radius * Complex64::new(start_angle.cos(), start_angle.sin())
            }
        }
    }

    pub fn end(&self) -> Complex64 {
        match self {
            Segment::Line { to, .. } => *to,
            Segment::Arc { center, radius, end_angle, .. } => {
                center + radius * Complex64::new(end_angle.cos(), end_angle.sin())
            }
        }
    }

    /// Point and velocity of the parametrization over s in [0, 1].
    fn point_and_velocity(&self, s: f64) -> (Complex64, Complex64) {
        match self {
            Segment::Line { from, to } => (*from + (*to - *from) * s, *to - *from),
            Segment::Arc { center, radius, start_angle, end_angle } => {
                let span = end_angle - start_angle;
                let ang = start_angle + span * s;
                let dir = Complex64::new(ang.cos(), ang.sin());
                (
                    *center + *radius * dir,
                    Complex64::new(0.0, 1.0) * *radius * span * dir,
                )
            }
        }
    }

    /// Minimum distance from `p` to the segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match self {
            Segment::Line { from, to } => {
                let d = *to - *from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - *from).norm();
                }
                let s = ((p - *from).re * d.re + (p - *from).im * d.im) / len2;
                let s = s.clamp(0.0, 1.0);
                (p - (*from + d * s)).norm()
            }
            Segment::Arc { center, radius, start_angle, end_angle } => {
                let rel = p - *center;
                let ang = rel.im.atan2(rel.re);
                let (lo, hi) = if start_angle <= end_angle {
                    (*start_angle, *end_angle)
                } else {
                    (*end_angle, *start_angle)
                };
                // Bring ang into [lo, lo + 2 pi) and test membership.
                let tau = std::f64::consts::TAU;
                let mut a = ang;
                while a < lo {
                    a += tau;
                }
                if a <= hi {
                    (rel.norm() - radius).abs()
                } else {
                    (p - self.start()).norm().min((p - self.end()).norm())
                }
            }
        }
    }
}

/// Piecewise path with continuity between consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PathInC {
    pub segments: Vec<Segment>,
}

impl PathInC {
    pub fn line(from: Complex64, to: Complex64) -> Self {
        PathInC { segments: vec![Segment::Line { from, to }] }
    }

    /// Full counterclockwise circle.
    pub fn circle(center: Complex64, radius: f64) -> Self {
        PathInC {
            segments: vec![Segment::Arc {
                center,
                radius,
                start_angle: 0.0,
                end_angle: std::f64::consts::TAU,
            }],
        }
    }

    pub fn check_continuity(&self) -> Result<(), QuadError> {
        for (i, pair) in self.segments.windows(2).enumerate() {
            let gap = (pair[0].end() - pair[1].start()).norm();
            let scale = pair[0].end().norm().max(1.0);
            if gap > 1e-9 * scale {
                return Err(QuadError::Discontinuous { index: i });
            }
        }
        Ok(())
    }

    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| match seg {
                Segment::Line { from, to } => Segment::Line { from: *to, to: *from },
                Segment::Arc { center, radius, start_angle, end_angle } => Segment::Arc {
                    center: *center,
                    radius: *radius,
                    start_angle: *end_angle,
                    end_angle: *start_angle,
                },
            })
            .collect();
        PathInC { segments }
    }

    /// Distance from the path to the closest of the given points.
    pub fn clearance(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .flat_map(|p| self.segments.iter().map(move |s| s.distance_to(*p)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Values the quadrature kernel can integrate: complex scalars or fixed-size
/// stacks of them.
pub trait IntegrandValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    /// Componentwise multiplication by the path velocity.
    fn mul_c(self, z: Complex64) -> Self;
    /// Max-norm across components, used for error estimates.
    fn norm(self) -> f64;
}

impl IntegrandValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn mul_c(self, z: Complex64) -> Self {
        self * z
    }
    fn norm(self) -> f64 {
        num_complex::Complex::norm(self)
    }
}

impl IntegrandValue for [Complex64; 3] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); 3]
    }
    fn add(self, other: Self) -> Self {
        [self[0] + other[0], self[1] + other[1], self[2] + other[2]]
    }
    fn scale(self, k: f64) -> Self {
        [self[0] * k, self[1] * k, self[2] * k]
    }
    fn mul_c(self, z: Complex64) -> Self {
        [self[0] * z, self[1] * z, self[2] * z]
    }
    fn norm(self) -> f64 {
        self[0].norm().max(self[1].norm()).max(self[2].norm())
    }
}

struct Panel<V> {
    seg: usize,
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// G7/K15 rule on the parameter interval [a, b] of one segment.
fn gk15<V, F>(f: &mut F, seg: &Segment, seg_idx: usize, a: f64, b: f64) -> Result<Panel<V>, QuadError>
where
    V: IntegrandValue,
    F: FnMut(Complex64) -> Result<V, QuadError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = V::zero();
    let mut gauss = V::zero();
    for (j, &x) in XGK.iter().enumerate() {
        let eval_at = |f: &mut F, s: f64| -> Result<V, QuadError> {
            let (z, vel) = seg.point_and_velocity(s);
            Ok(f(z)?.mul_c(vel))
        };
        if x == 0.0 {
            let v = eval_at(f, center)?;
            kronrod = kronrod.add(v.scale(WGK[j]));
            gauss = gauss.add(v.scale(WG[3]));
        } else {
            let v1 = eval_at(f, center - half * x)?;
            let v2 = eval_at(f, center + half * x)?;
            let sum = v1.add(v2);
            kronrod = kronrod.add(sum.scale(WGK[j]));
            if j % 2 == 1 {
                gauss = gauss.add(sum.scale(WG[j / 2]));
            }
        }
    }
    let value = kronrod.scale(half);
    let err = kronrod.add(gauss.scale(-1.0)).norm() * half.abs();
    Ok(Panel { seg: seg_idx, a, b, value, err })
}

/// Globally adaptive integration of `f` along `path` to absolute tolerance
/// `tol` within `budget` panels.
pub fn integrate_path<V, F>(
    mut f: F,
    path: &PathInC,
    tol: f64,
    budget: usize,
) -> Result<V, QuadError>
where
    V: IntegrandValue,
    F: FnMut(Complex64) -> Result<V, QuadError>,
{
    path.check_continuity()?;
    let mut heap: BinaryHeap<Panel<V>> = BinaryHeap::new();
    for (i, seg) in path.segments.iter().enumerate() {
        heap.push(gk15(&mut f, seg, i, 0.0, 1.0)?);
    }
    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();
    while total_err > tol {
        if heap.len() + 1 > budget {
            return Err(QuadError::BudgetExhausted { tol, budget, achieved: total_err });
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        // Roundoff floor: bisecting panels at the width limit cannot help.
        if worst.b - worst.a < 1e-15 {
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        let seg = &path.segments[worst.seg];
        let left = gk15(&mut f, seg, worst.seg, worst.a, mid)?;
        let right = gk15(&mut f, seg, worst.seg, mid, worst.b)?;
        total_err += left.err + right.err;
        heap.push(left);
        heap.push(right);
    }
    // Deterministic summation order: sort panels by (segment, parameter).
    let mut panels: Vec<Panel<V>> = heap.into_vec();
    panels.sort_by(|x, y| x.seg.cmp(&y.seg).then(x.a.total_cmp(&y.a)));
    let mut acc = V::zero();
    for p in &panels {
        acc = acc.add(p.value);
    }
    Ok(acc)
}

/// Integrates an expression along a path, refusing paths that pass within
/// `exclusion` of a declared singularity.
pub fn integrate_along(
    f: &ComplexExpr,
    path: &PathInC,
    tol: f64,
    singularities: &[Complex64],
    exclusion: f64,
) -> Result<Complex64, QuadError> {
    for s in singularities {
        let d = path.clearance(&[*s]);
        if d < exclusion {
            return Err(QuadError::SingularityTooClose { at: *s, radius: exclusion });
        }
    }
    integrate_path(|z| f.eval(z).map_err(QuadError::from), path, tol, DEFAULT_PANEL_BUDGET)
}

/// Straight segment from `from` to `to` with semicircular detours around any
/// declared singularity the segment passes within `exclusion` of.
///
/// A detour is inserted only when the near pass is strictly interior to the
/// segment and both endpoints are outside the exclusion disk; an endpoint
/// inside the disk is a legitimate near-singular target and is integrated
/// directly. The arc goes around the side of the singularity the segment
/// already passes on, so the deformation never crosses the singularity.
pub fn route_segment(
    from: Complex64,
    to: Complex64,
    singularities: &[Complex64],
    exclusion: f64,
) -> PathInC {
    let dir = to - from;
    let len2 = dir.norm_sqr();
    if len2 == 0.0 {
        return PathInC::line(from, to);
    }
    // Collect detour intervals (entry/exit parameters plus singularity).
    let mut detours: Vec<(f64, f64, Complex64)> = Vec::new();
    for &q in singularities {
        if (from - q).norm() <= exclusion || (to - q).norm() <= exclusion {
            continue;
        }
        // Line-circle intersection in the segment parameter s.
        let rel = from - q;
        let b = (rel.re * dir.re + rel.im * dir.im) / len2;
        let c = (rel.norm_sqr() - exclusion * exclusion) / len2;
        let disc = b * b - c;
        if disc <= 0.0 {
            continue;
        }
        let sqrt_disc = disc.sqrt();
        let s1 = -b - sqrt_disc;
        let s2 = -b + sqrt_disc;
        if s2 <= 0.0 || s1 >= 1.0 {
            continue;
        }
        // Both endpoints are outside the disk, so the crossing is interior.
        detours.push((s1.max(0.0), s2.min(1.0), q));
    }
    if detours.is_empty() {
        return PathInC::line(from, to);
    }
    detours.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut segments = Vec::new();
    let mut cursor = from;
    let mut cursor_s = 0.0;
    for (s1, s2, q) in detours {
        if s1 < cursor_s {
            // Overlapping exclusion disks: fall back to the straight piece.
            continue;
        }
        let entry = from + dir * s1;
        let exit = from + dir * s2;
        if (entry - cursor).norm() > 0.0 {
            segments.push(Segment::Line { from: cursor, to: entry });
        }
        let a1 = (entry - q).im.atan2((entry - q).re);
        let a2 = (exit - q).im.atan2((exit - q).re);
        // Choose the arc on the side the segment passes the singularity on:
        // its midpoint must lie on the opposite side of the chord from q
        // (same side as the original near pass).
        let cross_q = dir.re * (q - from).im - dir.im * (q - from).re;
        let ccw_span = {
            let mut d = a2 - a1;
            while d < 0.0 {
                d += std::f64::consts::TAU;
            }
            d
        };
        let mid_ccw = a1 + 0.5 * ccw_span;
        let mid_point = q + exclusion * Complex64::new(mid_ccw.cos(), mid_ccw.sin());
        let cross_mid = dir.re * (mid_point - from).im - dir.im * (mid_point - from).re;
        let (start_angle, end_angle) = if cross_q == 0.0 {
            // Singularity exactly on the line: deterministic left detour.
            (a1, a1 + ccw_span)
        } else if cross_mid * cross_q < 0.0 {
            (a1, a1 + ccw_span)
        } else {
            (a1, a1 + ccw_span - std::f64::consts::TAU)
        };
        segments.push(Segment::Arc { center: q, radius: exclusion, start_angle, end_angle });
        cursor = exit;
        cursor_s = s2;
    }
    if (to - cursor).norm() > 0.0 || segments.is_empty() {
        segments.push(Segment::Line { from: cursor, to });
    }
    PathInC { segments }
}

/// Integral of `f` from `w0` to `w` along the auto-routed straight segment.
/// Path independence on simply connected charts makes the detour invisible
/// in the value.
pub fn integrate_from_basepoint(
    f: &ComplexExpr,
    w0: Complex64,
    w: Complex64,
    singularities: &[Complex64],
    tol: f64,
) -> Result<Complex64, QuadError> {
    let path = route_segment(w0, w, singularities, DEFAULT_EXCLUSION_RADIUS);
    integrate_path(|z| f.eval(z).map_err(QuadError::from), &path, tol, DEFAULT_PANEL_BUDGET)
}
