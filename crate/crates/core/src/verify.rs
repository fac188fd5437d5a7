//! Residual suites: harmonicity, conformality, boundary recovery, reflection
//! involutions, Schwarz-Christoffel symmetries, and the graph PDE residuals
//! of the deformation-family endpoints.
//!
//! Harmonicity is a statement about conformal coordinates, so the operator
//! depends on the chart. On half-plane, disk, and doubled-plane charts it is
//! the plain five-point Laplacian in `w`. Blow-up strips are not conformal
//! coordinates: there the pullback satisfies the polar-form equation
//! `r^2 X_rr + r X_r + X_thth = 0`, whose coefficients are even in `r`, so
//! one finite-difference operator is valid across the seam (at `r = 0` it
//! degenerates to pure theta-convexity, matching the linear seam heights).
//!
//! Finite-difference stencils go through `SurfaceMap::eval_batch` with the
//! center first: quadrature-backed surfaces then chain the stencil off one
//! long integral and the shared error cancels in the residual.

use crate::weierstrass::{Chart, Point3, SurfaceError, SurfaceMap, WeierstrassData, WeierstrassSurface};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Deterministic sample generator (xorshift), independent of any RNG crate.
#[derive(Debug, Clone)]
pub struct SampleStream {
    state: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream { state: seed.max(1) }
    }

    pub fn next_f64(&mut self) -> f64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Interior samples appropriate to a chart, away from boundaries and
/// derivative blow-ups so finite-difference stencils stay well conditioned.
pub fn interior_samples(chart: Chart, count: usize, seed: u64) -> Vec<Complex64> {
    let mut s = SampleStream::new(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let p = match chart {
            Chart::HalfPlane => {
                let r = s.in_range(0.3, 2.5);
                let theta = s.in_range(0.25, std::f64::consts::PI - 0.25);
                Complex64::from_polar(r, theta)
            }
            Chart::Disk => {
                // Stay off the rim: conformal-map derivatives blow up toward
                // the polygon corners and finite differences degrade there.
                let r = s.in_range(0.05, 0.85);
                let phi = s.in_range(0.0, std::f64::consts::TAU);
                Complex64::from_polar(r, phi)
            }
            Chart::Strip => Complex64::new(
                s.in_range(-1.5, 1.5),
                s.in_range(0.3, std::f64::consts::PI - 0.3),
            ),
            Chart::Plane => {
                let r = s.in_range(0.3, 2.5);
                let phi = s.in_range(-std::f64::consts::PI + 0.25, std::f64::consts::PI - 0.25);
                Complex64::from_polar(r, phi)
            }
        };
        out.push(p);
    }
    out
}

/// Local stencil half-width at a sample: a fixed fraction of the distance to
/// the nearest chart degeneracy.
fn local_step(chart: Chart, p: Complex64) -> f64 {
    let frac = 1e-3;
    let scale = match chart {
        Chart::HalfPlane => p.im.min(p.norm()).max(1e-6),
        Chart::Disk => (1.0 - p.norm()).min(p.norm()).max(1e-6),
        Chart::Strip => p.im.min(std::f64::consts::PI - p.im).clamp(1e-6, 1.0),
        Chart::Plane => p.norm().max(1e-6),
    };
    frac * scale
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub samples: usize,
}

/// Max finite-difference harmonicity residual over the samples, using the
/// chart-appropriate operator (see module docs). Strip residuals are
/// normalized by max(1, r^2) so the polar-form coefficients do not inflate
/// the scale.
pub fn harmonicity_residual(
    surface: &SurfaceMap,
    samples: &[Complex64],
) -> Result<ResidualReport, SurfaceError> {
    let chart = surface.chart();
    let mut max_residual: f64 = 0.0;
    for &p in samples {
        let h = local_step(chart, p);
        let residual = match chart {
            Chart::Strip => {
                let (r, theta) = (p.re, p.im);
                let stencil = [
                    p,
                    Complex64::new(r + h, theta),
                    Complex64::new(r - h, theta),
                    Complex64::new(r, theta + h),
                    Complex64::new(r, theta - h),
                ];
                let v = eval_stencil(surface, &stencil)?;
                let c = v[0];
                let rr = combine(&[(1.0, v[1]), (-2.0, c), (1.0, v[2])], h * h);
                let dr = combine(&[(1.0, v[1]), (-1.0, v[2])], 2.0 * h);
                let tt = combine(&[(1.0, v[3]), (-2.0, c), (1.0, v[4])], h * h);
                let res = [
                    r * r * rr[0] + r * dr[0] + tt[0],
                    r * r * rr[1] + r * dr[1] + tt[1],
                    r * r * rr[2] + r * dr[2] + tt[2],
                ];
                max_abs(&res) / (r * r).max(1.0)
            }
            _ => {
                let stencil = [
                    p,
                    p + Complex64::new(h, 0.0),
                    p - Complex64::new(h, 0.0),
                    p + Complex64::new(0.0, h),
                    p - Complex64::new(0.0, h),
                ];
                let v = eval_stencil(surface, &stencil)?;
                let c = v[0];
                let lap = combine(
                    &[(1.0, v[1]), (1.0, v[2]), (1.0, v[3]), (1.0, v[4]), (-4.0, c)],
                    h * h,
                );
                max_abs(&lap)
            }
        };
        max_residual = max_residual.max(residual);
    }
    Ok(ResidualReport { max_residual, samples: samples.len() })
}

fn eval_stencil(
    surface: &SurfaceMap,
    stencil: &[Complex64],
) -> Result<Vec<Point3>, SurfaceError> {
    surface.eval_batch(stencil).into_iter().collect()
}

fn combine(terms: &[(f64, Point3)], denom: f64) -> [f64; 3] {
    let mut acc = [0.0f64; 3];
    for (w, p) in terms {
        acc[0] += w * p.x;
        acc[1] += w * p.y;
        acc[2] += w * p.t;
    }
    [acc[0] / denom, acc[1] / denom, acc[2] / denom]
}

fn max_abs(v: &[f64; 3]) -> f64 {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

/// Max Cauchy-Riemann residual of the planar part h = x + i y over the
/// samples: |dh/dv - i dh/du| for conformal charts. On strips the planar
/// part is only conformal composed with the blow-up, so the check runs on
/// the r > 0 side pulled back to w.
pub fn conformality_residual(
    surface: &SurfaceMap,
    samples: &[Complex64],
) -> Result<ResidualReport, SurfaceError> {
    let chart = surface.chart();
    let mut max_residual: f64 = 0.0;
    for &p0 in samples {
        let (eval_chart, p) = match chart {
            Chart::Strip => {
                // Pull back to w = r e^{i theta} on the positive side.
                let r = p0.re.abs().max(0.25);
                let w = Complex64::from_polar(r, p0.im);
                (Chart::HalfPlane, w)
            }
            c => (c, p0),
        };
        let h = local_step(eval_chart, p);
        let du = Complex64::new(h, 0.0);
        let dv = Complex64::new(0.0, h);
        let stencil = [p, p + du, p - du, p + dv, p - dv];
        let values: Result<Vec<Point3>, SurfaceError> = match chart {
            Chart::Strip => {
                // Evaluate the underlying surface through strip coordinates.
                let strip_points: Vec<Complex64> = stencil
                    .iter()
                    .map(|&w| Complex64::new(w.norm(), w.arg()))
                    .collect();
                surface.eval_batch(&strip_points).into_iter().collect()
            }
            _ => surface.eval_batch(&stencil).into_iter().collect(),
        };
        let v = values?;
        let h_of = |p: &Point3| p.planar();
        let dhdu = (h_of(&v[1]) - h_of(&v[2])) / (2.0 * h);
        let dhdv = (h_of(&v[3]) - h_of(&v[4])) / (2.0 * h);
        let residual = (dhdv - Complex64::new(0.0, 1.0) * dhdu).norm();
        max_residual = max_residual.max(residual);
    }
    Ok(ResidualReport { max_residual, samples: samples.len() })
}

/// Euclidean minimal-surface operator on a height field:
/// (1 + p_y^2) p_xx - 2 p_x p_y p_xy + (1 + p_x^2) p_yy.
fn minimal_surface_residual(d: &GraphDerivatives) -> f64 {
    (1.0 + d.py * d.py) * d.pxx - 2.0 * d.px * d.py * d.pxy + (1.0 + d.px * d.px) * d.pyy
}

/// Lorentzian maximal-surface operator (spacelike graphs, |grad| < 1):
/// (1 - p_y^2) p_xx + 2 p_x p_y p_xy + (1 - p_x^2) p_yy.
fn maximal_surface_residual(d: &GraphDerivatives) -> f64 {
    (1.0 - d.py * d.py) * d.pxx + 2.0 * d.px * d.py * d.pxy + (1.0 - d.px * d.px) * d.pyy
}

struct GraphDerivatives {
    px: f64,
    py: f64,
    pxx: f64,
    pyy: f64,
    pxy: f64,
}

/// Local graph t = phi(x, y) around the image of `w_center`, sampled by
/// Newton-inverting the planar part on a 3x3 stencil of spacing `dx`.
fn graph_derivatives(
    surface: &WeierstrassSurface,
    w_center: Complex64,
    dx: f64,
) -> Result<GraphDerivatives, SurfaceError> {
    let center = surface.eval(w_center)?;
    let q0 = center.planar();
    // FD Jacobian of the planar part at w (as an R-linear map on C).
    let jac = |w: Complex64| -> Result<(Complex64, Complex64), SurfaceError> {
        let e = 1e-6;
        let px = surface.eval(w + Complex64::new(e, 0.0))?.planar();
        let mx = surface.eval(w - Complex64::new(e, 0.0))?.planar();
        let py = surface.eval(w + Complex64::new(0.0, e))?.planar();
        let my = surface.eval(w - Complex64::new(0.0, e))?.planar();
        Ok(((px - mx) / (2.0 * e), (py - my) / (2.0 * e)))
    };
    let mut heights = [[0.0f64; 3]; 3];
    for (jy, sy) in [-1.0, 0.0, 1.0].iter().enumerate() {
        for (jx, sx) in [-1.0, 0.0, 1.0].iter().enumerate() {
            let target = q0 + Complex64::new(sx * dx, sy * dx);
            let mut w = w_center;
            let mut converged = false;
            for _ in 0..30 {
                let value = surface.eval(w)?.planar();
                let err = value - target;
                if err.norm() < 1e-11 {
                    converged = true;
                    break;
                }
                let (du, dv) = jac(w)?;
                // Solve du * a + dv * b = err for real (a, b).
                let det = du.re * dv.im - du.im * dv.re;
                if det.abs() < 1e-14 {
                    break;
                }
                let a = (err.re * dv.im - err.im * dv.re) / det;
                let b = (du.re * err.im - du.im * err.re) / det;
                w -= Complex64::new(a, b);
            }
            if !converged {
                return Err(SurfaceError::InvalidData(format!(
                    "planar inversion did not converge near {w_center}"
                )));
            }
            heights[jy][jx] = surface.eval(w)?.t;
        }
    }
    let px = (heights[1][2] - heights[1][0]) / (2.0 * dx);
    let py = (heights[2][1] - heights[0][1]) / (2.0 * dx);
    let pxx = (heights[1][2] - 2.0 * heights[1][1] + heights[1][0]) / (dx * dx);
    let pyy = (heights[2][1] - 2.0 * heights[1][1] + heights[0][1]) / (dx * dx);
    let pxy = (heights[2][2] - heights[2][0] - heights[0][2] + heights[0][0]) / (4.0 * dx * dx);
    Ok(GraphDerivatives { px, py, pxx, pyy, pxy })
}

/// Max residual of the Euclidean minimal (c = 1) or Lorentzian maximal
/// (c = -1) surface equation on local graph patches around the samples.
pub fn family_pde_residual(
    data: &WeierstrassData,
    samples: &[Complex64],
    dx: f64,
) -> Result<ResidualReport, SurfaceError> {
    let surface = WeierstrassSurface::new(data.clone());
    let mut max_residual: f64 = 0.0;
    for &w in samples {
        let d = graph_derivatives(&surface, w, dx)?;
        let r = if data.c >= 0.0 {
            minimal_surface_residual(&d)
        } else {
            maximal_surface_residual(&d)
        };
        max_residual = max_residual.max(r.abs());
    }
    Ok(ResidualReport { max_residual, samples: samples.len() })
}

/// One named verification suite outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteResult {
    pub fn new(suite: &str, max_residual: f64, tolerance: f64) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }
}

/// The standard verification battery for one surface: harmonicity and
/// conformality residuals plus context-independent reflection involutions,
/// Poisson boundary recovery, and (for disk charts) the SC symmetry checks.
pub fn run_standard_suites(
    surface: &SurfaceMap,
    data: Option<&WeierstrassData>,
    scale: f64,
) -> Result<Vec<SuiteResult>, SurfaceError> {
    let mut results = Vec::new();

    // Data validity gates the rest: a non-analytic F is a failed suite, not
    // a config error.
    if let Some(d) = data {
        let valid = d.validate();
        results.push(SuiteResult::new(
            "weierstrass-data",
            if valid.is_ok() { 0.0 } else { 1.0 },
            0.5,
        ));
        if valid.is_err() {
            return Ok(results);
        }
    }

    let samples = interior_samples(surface.chart(), 200, 0x15_0F1EC7);
    let harmonic = harmonicity_residual(surface, &samples)?;
    results.push(SuiteResult::new(
        "harmonicity",
        harmonic.max_residual,
        1e-5 * scale.max(1.0),
    ));

    let conformal = conformality_residual(surface, &samples)?;
    results.push(SuiteResult::new("conformality", conformal.max_residual, 1e-6 * scale.max(1.0)));

    // Reflection involution on the canonical arcs.
    let involution = reflection_involution_residual()?;
    results.push(SuiteResult::new("reflection-involution", involution, 1e-10));

    // Poisson closed form against the boundary data it extends.
    let recovery = poisson_recovery_residual();
    results.push(SuiteResult::new("poisson-recovery", recovery, 1e-8));

    if surface.chart() == Chart::Disk {
        let sc = sc_symmetry_residual(2)?;
        results.push(SuiteResult::new("sc-symmetry", sc, 1e-8));
    }

    Ok(results)
}

fn reflection_involution_residual() -> Result<f64, SurfaceError> {
    use crate::expr::ComplexExpr;
    use crate::reflect::ArcChart;
    let arcs = vec![
        ArcChart::line(Complex64::new(0.5, -0.25), Complex64::new(2.0, 1.0))
            .map_err(SurfaceError::from)?,
        ArcChart::circle(Complex64::new(0.0, 0.0), 1.0).map_err(SurfaceError::from)?,
        ArcChart::analytic(
            ComplexExpr::parse("w+i*w^2").map_err(|e| SurfaceError::InvalidData(e.to_string()))?,
            (-0.5, 0.5),
        )
        .map_err(SurfaceError::from)?,
    ];
    let mut worst: f64 = 0.0;
    let mut stream = SampleStream::new(0xA5);
    for arc in &arcs {
        for _ in 0..50 {
            let s = stream.in_range(-0.4, 0.4);
            let z = arc.point_at(s).map_err(SurfaceError::from)?;
            let fixed = arc.reflect(z).map_err(SurfaceError::from)?;
            worst = worst.max((fixed - z).norm());
            let off = z + Complex64::new(0.0, stream.in_range(0.01, 0.04));
            let twice = arc
                .reflect(arc.reflect(off).map_err(SurfaceError::from)?)
                .map_err(SurfaceError::from)?;
            worst = worst.max((twice - off).norm());
        }
    }
    Ok(worst)
}

fn poisson_recovery_residual() -> f64 {
    use crate::harmonic::{poisson_halfplane, BoundaryData};
    let bd = BoundaryData::helicoid();
    let mut worst: f64 = 0.0;
    // Vertical limits at distance 1e-6 converge like height / (pi * d) with
    // d the distance to the nearest jump, so the 1e-8 recovery bound needs
    // boundary points well away from the jumps.
    for (x, expected) in [(-500.0, 1.0), (-200.0, 1.0), (200.0, 0.0), (500.0, 0.0)] {
        let v = poisson_halfplane(&bd, Complex64::new(x, 1e-6)).unwrap_or(f64::NAN);
        worst = worst.max((v - expected).abs());
    }
    worst
}

fn sc_symmetry_residual(n: usize) -> Result<f64, SurfaceError> {
    let rot = Complex64::from_polar(1.0, std::f64::consts::PI / n as f64);
    let mut worst: f64 = 0.0;
    let mut stream = SampleStream::new(0x5C);
    for _ in 0..40 {
        let r = stream.in_range(0.0, 0.95);
        let ang = stream.in_range(0.0, std::f64::consts::TAU);
        let w = Complex64::from_polar(r, ang);
        let tol = 1e-10;
        let a = crate::scpoly::sc_map(n, rot * w, tol)
            .map_err(|e| SurfaceError::InvalidData(e.to_string()))?;
        let b = rot
            * crate::scpoly::sc_map(n, w, tol)
                .map_err(|e| SurfaceError::InvalidData(e.to_string()))?;
        worst = worst.max((a - b).norm());
        let c = crate::scpoly::sc_map(n, w.conj(), tol)
            .map_err(|e| SurfaceError::InvalidData(e.to_string()))?;
        let d = crate::scpoly::sc_map(n, w, tol)
            .map_err(|e| SurfaceError::InvalidData(e.to_string()))?
            .conj();
        worst = worst.max((c - d).norm());
    }
    Ok(worst)
}
