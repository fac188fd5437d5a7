//! Closed-form harmonic extensions of piecewise-constant boundary heights.
//!
//! Bounded harmonic functions on the upper half-plane and unit disk are
//! Poisson integrals of their boundary values. For piecewise-constant data
//! the integral collapses to a finite sum of `arg` terms, which is what this
//! module evaluates: no numerical integration on the primary path (the
//! quadrature form survives as a test oracle). Harmonic conjugates pair each
//! `arg` term with `-log| |`.
//!
//! [`extend_blowup`] realizes the analytic continuation across a boundary
//! jump point: composing with the blow-up `(r, theta) -> w0 + r e^{i theta}`
//! turns the discontinuity into a coordinate line `r = 0` across which the
//! extension is real analytic, linear in `theta` on the line itself, and
//! reflection-symmetric between `(r, theta)` and `(-r, pi - theta)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HarmonicError {
    #[error("point {at} is not interior to the chart")]
    NotInterior { at: Complex64 },
    #[error("harmonic conjugate diverges at jump point {at}")]
    AtJumpPoint { at: Complex64 },
    #[error("blow-up angle {theta} outside (0, pi)")]
    AngleOutOfRange { theta: f64 },
    #[error("boundary data invalid: {0}")]
    InvalidData(String),
}

/// Piecewise-constant boundary heights on the boundary of the upper
/// half-plane or of the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "kebab-case")]
pub enum BoundaryData {
    /// Jump positions x_1 < ... < x_m on the real axis; `values[k]` holds on
    /// the k-th arc, so `values[0]` on (-inf, x_1) and `values[m]` on
    /// (x_m, +inf). A jump at infinity (`values[0] != values[m]`) is allowed.
    HalfPlane { jumps: Vec<f64>, values: Vec<f64> },
    /// Jump angles phi_1 < ... < phi_m in [0, 2 pi); `values[k]` holds on the
    /// counterclockwise arc from phi_k to phi_{k+1} (the last wraps around).
    Disk { jump_angles: Vec<f64>, values: Vec<f64> },
}

impl BoundaryData {
    pub fn half_plane(jumps: Vec<f64>, values: Vec<f64>) -> Result<Self, HarmonicError> {
        if values.len() != jumps.len() + 1 {
            return Err(HarmonicError::InvalidData(format!(
                "half-plane data needs {} values for {} jumps, got {}",
                jumps.len() + 1,
                jumps.len(),
                values.len()
            )));
        }
        if jumps.windows(2).any(|p| p[0] >= p[1]) {
            return Err(HarmonicError::InvalidData("jumps must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HarmonicError::InvalidData("values must be finite".into()));
        }
        Ok(BoundaryData::HalfPlane { jumps, values })
    }

    pub fn disk(jump_angles: Vec<f64>, values: Vec<f64>) -> Result<Self, HarmonicError> {
        if values.len() != jump_angles.len() || values.is_empty() {
            return Err(HarmonicError::InvalidData(
                "disk data needs one value per jump angle".into(),
            ));
        }
        let tau = std::f64::consts::TAU;
        if jump_angles.iter().any(|a| !(0.0..tau).contains(a)) {
            return Err(HarmonicError::InvalidData("jump angles must lie in [0, 2 pi)".into()));
        }
        if jump_angles.windows(2).any(|p| p[0] >= p[1]) {
            return Err(HarmonicError::InvalidData(
                "jump angles must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HarmonicError::InvalidData("values must be finite".into()));
        }
        Ok(BoundaryData::Disk { jump_angles, values })
    }

    /// The helicoid's boundary heights: 1 on the negative axis, 0 on the
    /// positive axis.
    pub fn helicoid() -> Self {
        BoundaryData::HalfPlane { jumps: vec![0.0], values: vec![1.0, 0.0] }
    }

    pub fn min_value(&self) -> f64 {
        self.values().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn max_value(&self) -> f64 {
        self.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    fn values(&self) -> &[f64] {
        match self {
            BoundaryData::HalfPlane { values, .. } => values,
            BoundaryData::Disk { values, .. } => values,
        }
    }
}

/// Harmonic extension of half-plane boundary data, evaluated in closed form:
/// the value at +infinity plus one `arg` term per jump.
pub fn poisson_halfplane(bd: &BoundaryData, w: Complex64) -> Result<f64, HarmonicError> {
    let (jumps, values) = match bd {
        BoundaryData::HalfPlane { jumps, values } => (jumps, values),
        BoundaryData::Disk { .. } => {
            return Err(HarmonicError::InvalidData("expected half-plane data".into()))
        }
    };
    if w.im <= 0.0 {
        return Err(HarmonicError::NotInterior { at: w });
    }
    // arg(w - x) lies in (0, pi) on the half-plane, so the principal branch
    // is already continuous there.
    let mut acc = values[values.len() - 1];
    for (j, &x) in jumps.iter().enumerate() {
        let drop = values[j] - values[j + 1];
        acc += drop / std::f64::consts::PI * (w - Complex64::new(x, 0.0)).arg();
    }
    Ok(acc)
}

/// Harmonic measure of the counterclockwise boundary arc from angle `alpha`
/// to `beta` seen from `w` inside the disk. The subtended angle is taken on
/// the branch continuous throughout the disk: the Moebius image
/// `(b - w)/(a - w)` of the disk is a half-plane, rotated here so the
/// principal `arg` never crosses its cut.
fn disk_arc_measure(alpha: f64, beta: f64, w: Complex64) -> f64 {
    let length = beta - alpha;
    let a = Complex64::new(alpha.cos(), alpha.sin());
    let b = Complex64::new(beta.cos(), beta.sin());
    let zeta = (b - w) / (a - w);
    let half = 0.5 * length;
    let rot = Complex64::new(half.cos(), -half.sin());
    // The rotated image of the closed disk is the closed upper half-plane;
    // clamp roundoff below the real axis so boundary points stay on the
    // continuous branch instead of jumping by 2 pi.
    let val = zeta * rot;
    let psi = half + val.im.max(0.0).atan2(val.re);
    psi / std::f64::consts::PI - length / std::f64::consts::TAU
}

/// Harmonic extension of disk boundary data via the arg-sum closed form.
pub fn poisson_disk(bd: &BoundaryData, w: Complex64) -> Result<f64, HarmonicError> {
    let (angles, values) = match bd {
        BoundaryData::Disk { jump_angles, values } => (jump_angles, values),
        BoundaryData::HalfPlane { .. } => {
            return Err(HarmonicError::InvalidData("expected disk data".into()))
        }
    };
    if w.norm() >= 1.0 {
        return Err(HarmonicError::NotInterior { at: w });
    }
    let m = angles.len();
    let mut acc = 0.0;
    for k in 0..m {
        let alpha = angles[k];
        let beta = if k + 1 < m { angles[k + 1] } else { angles[0] + std::f64::consts::TAU };
        acc += values[k] * disk_arc_measure(alpha, beta, w);
    }
    Ok(acc)
}

/// Evaluates whichever chart the data lives on.
pub fn poisson(bd: &BoundaryData, w: Complex64) -> Result<f64, HarmonicError> {
    match bd {
        BoundaryData::HalfPlane { .. } => poisson_halfplane(bd, w),
        BoundaryData::Disk { .. } => poisson_disk(bd, w),
    }
}

/// Harmonic conjugate of the Poisson extension, as the matching sum of
/// `-log| |` terms. Normalized to vanish at `i` (half-plane) or `0` (disk).
pub fn conjugate_harmonic(bd: &BoundaryData, w: Complex64) -> Result<f64, HarmonicError> {
    match bd {
        BoundaryData::HalfPlane { jumps, values } => {
            if w.im <= 0.0 {
                return Err(HarmonicError::NotInterior { at: w });
            }
            let reference = Complex64::new(0.0, 1.0);
            let mut acc = 0.0;
            for (j, &x) in jumps.iter().enumerate() {
                let drop = values[j] - values[j + 1];
                if drop == 0.0 {
                    continue;
                }
                let d = (w - Complex64::new(x, 0.0)).norm();
                if d == 0.0 {
                    return Err(HarmonicError::AtJumpPoint { at: w });
                }
                let dref = (reference - Complex64::new(x, 0.0)).norm();
                acc -= drop / std::f64::consts::PI * (d.ln() - dref.ln());
            }
            Ok(acc)
        }
        BoundaryData::Disk { jump_angles, values } => {
            if w.norm() >= 1.0 {
                return Err(HarmonicError::NotInterior { at: w });
            }
            let m = jump_angles.len();
            let mut acc = 0.0;
            for k in 0..m {
                let alpha = jump_angles[k];
                let beta = if k + 1 < m {
                    jump_angles[k + 1]
                } else {
                    jump_angles[0] + std::f64::consts::TAU
                };
                let a = Complex64::new(alpha.cos(), alpha.sin());
                let b = Complex64::new(beta.cos(), beta.sin());
                let da = (w - a).norm();
                let db = (w - b).norm();
                if da == 0.0 || db == 0.0 {
                    return Err(HarmonicError::AtJumpPoint { at: w });
                }
                // Conjugate of the arc-measure arg term; |b/a| = 1 makes the
                // normalization at w = 0 exact.
                acc -= values[k] / std::f64::consts::PI * (db.ln() - da.ln());
            }
            Ok(acc)
        }
    }
}

/// Blow-up chart around one boundary jump point of the half-plane: strip
/// coordinates (r, theta) in R x (0, pi) with projection
/// `w = jump + r e^{i theta}`, left boundary value `a` and right value `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpChart {
    /// The jump point w0 on the real axis.
    pub jump: f64,
    /// Boundary value on (w0 - eps, w0).
    pub left_value: f64,
    /// Boundary value on (w0, w0 + eps).
    pub right_value: f64,
}

impl BlowUpChart {
    pub fn new(jump: f64, left_value: f64, right_value: f64) -> Self {
        BlowUpChart { jump, left_value, right_value }
    }

    /// The projection Pi(r, theta) = w0 + r e^{i theta}. Restricted to r > 0
    /// it is a homeomorphism onto the upper half-plane around w0.
    pub fn project(&self, r: f64, theta: f64) -> Complex64 {
        Complex64::new(self.jump, 0.0) + r * Complex64::new(theta.cos(), theta.sin())
    }

    /// Height of the point dividing the jump segment at angle theta:
    /// a theta/pi + b (1 - theta/pi).
    pub fn line_height(&self, theta: f64) -> f64 {
        let s = theta / std::f64::consts::PI;
        self.left_value * s + self.right_value * (1.0 - s)
    }
}

/// Real-analytic extension of a bounded harmonic function across the jump
/// point, in blow-up coordinates:
///
/// - `r > 0`: the function itself at `Pi(r, theta)`;
/// - `r = 0`: the linear interpolation `a theta/pi + b (1 - theta/pi)`;
/// - `r < 0`: `a + b - t(Pi(-r, pi - theta))`.
///
/// The mirrored angle is computed as the plain subtraction `pi - theta` so
/// that mirrored parameter pairs evaluate the underlying function at
/// bit-identical points whenever `pi - theta` is exact (dyadic multiples of
/// pi in particular), making the reflection relation an identity.
pub fn extend_blowup<F>(
    t: F,
    chart: &BlowUpChart,
    r: f64,
    theta: f64,
) -> Result<f64, HarmonicError>
where
    F: Fn(Complex64) -> Result<f64, HarmonicError>,
{
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(HarmonicError::AngleOutOfRange { theta });
    }
    if r > 0.0 {
        t(chart.project(r, theta))
    } else if r == 0.0 {
        Ok(chart.line_height(theta))
    } else {
        let mirrored = std::f64::consts::PI - theta;
        let inner = t(chart.project(-r, mirrored))?;
        Ok((chart.left_value + chart.right_value) - inner)
    }
}
