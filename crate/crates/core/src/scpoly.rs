//! Schwarz-Christoffel mapping of the disk onto a regular 2n-gon, the
//! alternating boundary-height harmonic function, and the resulting surface
//! patch with isotropic boundary lines.
//!
//! The conformal map is `f(w) = integral_0^w (1 - zeta^{2n})^{-1/n} dzeta`
//! along radial paths. Its integrand has integrable singularities of
//! exponent 1/n at the 2n-th roots of unity; radial integration to a vertex
//! substitutes `1 - s = v^n`, which turns the endpoint singularity into an
//! analytic integrand. Vertex preimages are `e^{k pi i/n}`, edge-midpoint
//! preimages `w_k = e^{k pi i/n - pi i/(2n)}`.
//!
//! The patch height is the Poisson extension of alternating 1/0 data on the
//! arcs between consecutive midpoints:
//! `t(w) = sum_k arg((w_{2k} - w)/(w_{2k-1} - w))/pi - 1/2`,
//! with each `arg` taken on the branch continuous throughout the disk.
//! `X = (f, t)` then has 2n horizontal boundary pieces at alternating
//! heights joined by 2n isotropic lines over the edge midpoints, and for
//! n = 2 iterating the boundary rotations tiles space triply periodically.

use crate::mesh::{self, GridBounds, Mesh, MeshError};
use crate::quad::{self, QuadError};
use crate::reflect::{self, MotionI3, OrbitTiling, ReflectError};
use crate::weierstrass::{Chart, SurfaceError, SurfaceMap};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScError {
    #[error("polygon order n must be at least 2, got {0}")]
    BadOrder(usize),
    #[error("point {at} outside the closed unit disk")]
    OutsideDisk { at: Complex64 },
    #[error("height undefined at the midpoint preimage {at} (isotropic line)")]
    AtMidpointPreimage { at: Complex64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Surface(#[from] Box<SurfaceError>),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Reflect(#[from] ReflectError),
}

impl From<SurfaceError> for ScError {
    fn from(e: SurfaceError) -> Self {
        ScError::Surface(Box::new(e))
    }
}

/// Integrand (1 - z^{2n})^{-1/n} on the principal branch.
fn sc_integrand(n: usize, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let base = one - z.powi(2 * n as i32);
    (base.ln() * (-1.0 / n as f64)).exp()
}

/// Nearest 2n-th root of unity direction to the unit vector `dir`.
fn nearest_root(n: usize, dir: Complex64) -> (usize, Complex64) {
    let m = 2 * n;
    let ang = dir.arg();
    let step = std::f64::consts::PI / n as f64;
    let k = (ang / step).round().rem_euclid(m as f64) as usize % m;
    let root_ang = k as f64 * step;
    (k, Complex64::new(root_ang.cos(), root_ang.sin()))
}

/// Value of the Schwarz-Christoffel integral along the radial path from 0.
///
/// For targets on the unit circle within angular 1e-9 of a vertex direction
/// the tail over the last stretch is integrated in the substituted variable
/// `1 - s = v^n`, which removes the endpoint singularity exactly.
pub fn sc_map(n: usize, w: Complex64, tol: f64) -> Result<Complex64, ScError> {
    if n < 2 {
        return Err(ScError::BadOrder(n));
    }
    let rho = w.norm();
    if rho > 1.0 + 1e-12 {
        return Err(ScError::OutsideDisk { at: w });
    }
    if rho == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let dir = w / rho;
    let (_, root) = nearest_root(n, dir);
    let at_vertex = (dir - root).norm() < 1e-9 && (rho - 1.0).abs() < 1e-12;
    let split = 0.9f64.min(rho);
    // Head: 0 -> split * dir, plain adaptive quadrature on the segment.
    let head: Complex64 = if split > 0.0 {
        quad::integrate_path(
            |z| Ok::<_, QuadError>(sc_integrand(n, z)),
            &quad::PathInC::line(Complex64::new(0.0, 0.0), split * dir),
            tol,
            quad::DEFAULT_PANEL_BUDGET,
        )?
    } else {
        Complex64::new(0.0, 0.0)
    };
    if rho <= split {
        return Ok(head);
    }
    let tail: Complex64 = if at_vertex {
        // Radial integrand at a vertex direction: (1 - s^{2n})^{-1/n} with
        // the exact factorization 1 - s^{2n} = (1 - s) q(s),
        // q(s) = 1 + s + ... + s^{2n-1}. Substituting 1 - s = v^n gives
        // n v^{n-2} q(1 - v^n)^{-1/n} dv, analytic on [0, (1-split)^{1/n}].
        let exponent = -1.0 / n as f64;
        let q = |s: f64| -> f64 {
            let mut acc = 1.0;
            let mut p = 1.0;
            for _ in 1..(2 * n) {
                p *= s;
                acc += p;
            }
            acc
        };
        let upper = (1.0 - split).powf(1.0 / n as f64);
        let nf = n as f64;
        let integral: Complex64 = quad::integrate_path(
            |z| {
                let v = z.re;
                let s = 1.0 - v.powi(n as i32);
                let value = nf * v.powi(n as i32 - 2) * q(s).powf(exponent);
                Ok::<_, QuadError>(Complex64::new(value, 0.0))
            },
            &quad::PathInC::line(Complex64::new(0.0, 0.0), Complex64::new(upper, 0.0)),
            tol,
            quad::DEFAULT_PANEL_BUDGET,
        )?;
        // v: 0 -> upper traverses s: 1 -> split against the ray, and the
        // substitution's -n v^{n-1} ds-factor flips it back; scale by the
        // ray direction.
        root * integral
    } else {
        quad::integrate_path(
            |z| Ok::<_, QuadError>(sc_integrand(n, z)),
            &quad::PathInC::line(split * dir, rho * dir),
            tol,
            quad::DEFAULT_PANEL_BUDGET,
        )?
    };
    Ok(head + tail)
}

/// The disk chart of the regular 2n-gon: cached vertices, midpoint
/// preimages, and the arc structure of the boundary data.
#[derive(Debug, Clone)]
pub struct PolygonChart {
    pub n: usize,
    /// Mapped vertices f(e^{k pi i/n}), k = 1..2n.
    pub vertices: Vec<Complex64>,
    /// Edge-midpoint preimages w_k = e^{k pi i/n - pi i/(2n)}, k = 1..2n.
    pub midpoint_params: Vec<Complex64>,
    pub tol: f64,
}

impl PolygonChart {
    pub fn new(n: usize, tol: f64) -> Result<Self, ScError> {
        if n < 2 {
            return Err(ScError::BadOrder(n));
        }
        let m = 2 * n;
        let step = std::f64::consts::PI / n as f64;
        let mut vertices = Vec::with_capacity(m);
        let mut midpoint_params = Vec::with_capacity(m);
        for k in 1..=m {
            let va = k as f64 * step;
            vertices.push(sc_map(n, Complex64::new(va.cos(), va.sin()), tol)?);
            let ma = k as f64 * step - 0.5 * step;
            midpoint_params.push(Complex64::new(ma.cos(), ma.sin()));
        }
        Ok(PolygonChart { n, vertices, midpoint_params, tol })
    }

    /// Mapped midpoint of edge k (1-based; edge k runs from vertex k-1 to
    /// vertex k and carries midpoint preimage w_k), from the cached vertices.
    pub fn edge_midpoint(&self, k: usize) -> Complex64 {
        let m = 2 * self.n;
        let a = self.vertices[(k + m - 2) % m]; // V_{k-1}, with V_0 = V_{2n}
        let b = self.vertices[(k - 1) % m]; // V_k
        0.5 * (a + b)
    }

    /// Unit direction of edge k (from vertex k-1 to vertex k, 1-based).
    pub fn edge_direction(&self, k: usize) -> Complex64 {
        let m = 2 * self.n;
        let a = self.vertices[(k + m - 2) % m];
        let b = self.vertices[(k - 1) % m];
        let d = b - a;
        d / d.norm()
    }

    /// Height of the boundary arc I_k (from w_k to w_{k+1}): 1 on odd, 0 on
    /// even.
    pub fn arc_height(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            1.0
        } else {
            0.0
        }
    }

    /// Spread of the edge lengths (regularity check).
    pub fn edge_length_spread(&self) -> f64 {
        let m = 2 * self.n;
        let lengths: Vec<f64> = (0..m)
            .map(|k| (self.vertices[(k + 1) % m] - self.vertices[k]).norm())
            .collect();
        let min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max - min
    }
}

/// Closed-form Poisson extension of the alternating 1/0 boundary data on the
/// 2n midpoint-to-midpoint arcs: the arg-sum
/// `sum_{k=1}^{n} arg((w_{2k} - w)/(w_{2k-1} - w))/pi - 1/2`
/// with each quotient's argument taken on the inscribed-angle branch that
/// stays continuous inside the disk.
pub fn polygon_height(n: usize, w: Complex64) -> Result<f64, ScError> {
    if n < 2 {
        return Err(ScError::BadOrder(n));
    }
    if w.norm() >= 1.0 + 1e-12 {
        return Err(ScError::OutsideDisk { at: w });
    }
    let step = std::f64::consts::PI / n as f64;
    let angle = |k: usize| k as f64 * step - 0.5 * step;
    let mut acc = -0.5;
    for k in 1..=n {
        let a1 = angle(2 * k - 1);
        let a2 = angle(2 * k);
        let w1 = Complex64::new(a1.cos(), a1.sin());
        let w2 = Complex64::new(a2.cos(), a2.sin());
        if w == w1 || w == w2 {
            return Err(ScError::AtMidpointPreimage { at: w });
        }
        // Continuous branch: rotate so the image half-plane sits over the
        // upper half-plane, where the principal arg has no cut; clamp
        // boundary roundoff onto the branch.
        let half = 0.5 * (a2 - a1);
        let rot = Complex64::new(half.cos(), -half.sin());
        let zeta = (w2 - w) / (w1 - w);
        let val = zeta * rot;
        let psi = half + val.im.max(0.0).atan2(val.re);
        acc += psi / std::f64::consts::PI;
    }
    Ok(acc)
}

/// The Schwarz patch X = (f, t) on the unit disk: boundary made of 2n
/// horizontal corner curves at alternating heights 1 and 0, joined by 2n
/// isotropic segments over the mapped edge midpoints.
pub fn schwarz_patch(n: usize) -> Result<SurfaceMap, ScError> {
    schwarz_patch_with_tol(n, quad::DEFAULT_TOL)
}

pub fn schwarz_patch_with_tol(n: usize, tol: f64) -> Result<SurfaceMap, ScError> {
    if n < 2 {
        return Err(ScError::BadOrder(n));
    }
    let surface = SurfaceMap::from_harmonic_pair(
        move |w| {
            sc_map(n, w, tol).map_err(|e| SurfaceError::InvalidData(e.to_string()))
        },
        move |w| {
            polygon_height(n, w).map_err(|e| SurfaceError::InvalidData(e.to_string()))
        },
        Chart::Disk,
    );
    Ok(surface)
}

/// The eight boundary rotations of the n = 2 patch: per edge k, the
/// 180-degree rotation about the horizontal line carrying the isotropic
/// segment's midpoint (height 1/2), and the rotation about the edge line at
/// the height of its odd arc. Iterating them tiles space.
pub fn schwarz_d_generators(chart: &PolygonChart) -> Result<Vec<MotionI3>, ReflectError> {
    let m = 2 * chart.n;
    let mut generators = Vec::with_capacity(2 * m);
    for k in 1..=m {
        let midpoint = chart.edge_midpoint(k);
        let direction = chart.edge_direction(k);
        // Isotropic-line rotation: reflection across the edge line at the
        // mid-height of the jump (heights alternate 1/0, so always 1/2).
        generators.push(MotionI3::rotation_about_horizontal_line(
            midpoint, direction, 0.5,
        )?);
        // Horizontal-edge rotation at the height of arc I_k.
        generators.push(MotionI3::rotation_about_horizontal_line(
            midpoint,
            direction,
            chart.arc_height(k),
        )?);
    }
    Ok(generators)
}

/// Result of the Schwarz-D tiling: the patch orbit and detected periods.
pub struct SchwarzDTiling {
    pub chart: PolygonChart,
    pub seed: Mesh,
    pub orbit: OrbitTiling,
}

/// Builds the n = 2 patch, meshes it, and iterates its 8 boundary rotations
/// to the given depth. At depth >= 2 the orbit contains three independent
/// translation periods.
pub fn schwarz_d_tiling(depth: usize, resolution: usize) -> Result<SchwarzDTiling, ScError> {
    let n = 2;
    let chart = PolygonChart::new(n, quad::DEFAULT_TOL)?;
    let patch = schwarz_patch(n)?;
    let grid = mesh::sample_grid(Chart::Disk, resolution.max(2), &GridBounds::default_for(Chart::Disk))?;
    let seed = mesh::build_mesh(&patch, &grid)?;
    let generators = schwarz_d_generators(&chart)?;
    let orbit = reflect::orbit_tiling(&seed, &generators, depth)?;
    Ok(SchwarzDTiling { chart, seed, orbit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{poisson_disk, BoundaryData};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent value of f(1) for n = 2: the closed form
    /// Gamma(1/4) Gamma(1/2) / (4 Gamma(3/4)) of the Beta integral,
    /// cross-checked below by composite Simpson on the substituted smooth
    /// integrand.
    const HALF_DIAGONAL_N2: f64 = 1.3110287771460599;

    fn simpson_oracle_f1_n2() -> f64 {
        // s = 1 - u^2 turns (1 - s^4)^{-1/2} ds into
        // 2 ((1 + s)(1 + s^2))^{-1/2} du on [0, 1].
        let g = |u: f64| {
            let s = 1.0 - u * u;
            2.0 / ((1.0 + s) * (1.0 + s * s)).sqrt()
        };
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut acc = g(0.0) + g(1.0);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(j as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn sc_map_at_zero_is_zero() {
        for n in 2..=4 {
            assert_eq!(sc_map(n, c(0.0, 0.0), 1e-10).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn half_diagonal_matches_substitution_oracle() {
        let oracle = simpson_oracle_f1_n2();
        assert!(
            (oracle - HALF_DIAGONAL_N2).abs() < 1e-10,
            "oracle self-check: {oracle} vs {HALF_DIAGONAL_N2}"
        );
        let f1 = sc_map(2, c(1.0, 0.0), 1e-10).unwrap();
        assert!(f1.im.abs() < 1e-10);
        assert!(
            (f1.re - oracle).abs() < 1e-6,
            "sc_map {} vs oracle {oracle}",
            f1.re
        );
    }

    #[test]
    fn rotation_symmetry_of_the_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5c2);
        for n in [2usize, 3] {
            let rot = Complex64::from_polar(1.0, PI / n as f64);
            for _ in 0..15 {
                let r = rng.gen_range(0.0..0.97);
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let w = Complex64::from_polar(r, ang);
                let tol = 1e-10;
                let a = sc_map(n, rot * w, tol).unwrap();
                let b = rot * sc_map(n, w, tol).unwrap();
                assert!((a - b).norm() < 2.0 * tol + 1e-12, "n={n} w={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugation_symmetry_of_the_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..15 {
            let r = rng.gen_range(0.0..0.97);
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let w = Complex64::from_polar(r, ang);
            let tol = 1e-10;
            let a = sc_map(3, w.conj(), tol).unwrap();
            let b = sc_map(3, w, tol).unwrap().conj();
            assert!((a - b).norm() < 2.0 * tol + 1e-12);
        }
    }

    #[test]
    fn polygon_is_regular() {
        for n in [2usize, 3, 4] {
            let chart = PolygonChart::new(n, 1e-10).unwrap();
            assert!(
                chart.edge_length_spread() < 1e-8,
                "n={n}: spread {}",
                chart.edge_length_spread()
            );
            // Vertices on a common circle subtending equal angles.
            let radii: Vec<f64> = chart.vertices.iter().map(|v| v.norm()).collect();
            let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
            let rmax = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(rmax - rmin < 1e-8, "n={n}");
            let m = 2 * n;
            for k in 0..m {
                let a = chart.vertices[k];
                let b = chart.vertices[(k + 1) % m];
                let span = (b / a).arg().rem_euclid(std::f64::consts::TAU);
                assert!((span - PI / n as f64).abs() < 1e-8, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mapped_midpoints_are_edge_midpoints() {
        for n in [2usize, 3] {
            let chart = PolygonChart::new(n, 1e-10).unwrap();
            for k in 1..=(2 * n) {
                let via_map = sc_map(n, chart.midpoint_params[k - 1], 1e-10).unwrap();
                let via_vertices = chart.edge_midpoint(k);
                assert!(
                    (via_map - via_vertices).norm() < 1e-7,
                    "n={n} k={k}: {via_map} vs {via_vertices}"
                );
            }
        }
    }

    #[test]
    fn height_at_center_is_half() {
        for n in [2usize, 3, 5] {
            let v = polygon_height(n, c(0.0, 0.0)).unwrap();
            assert!((v - 0.5).abs() < 1e-14, "n={n}: {v}");
        }
    }

    #[test]
    fn radial_limits_hit_alternating_heights() {
        let n = 2;
        // Interior of arc I_1 (between w_1 and w_2, through vertex at pi/2).
        let w = 0.9999999 * c((PI / 2.0).cos(), (PI / 2.0).sin());
        let v = polygon_height(n, w).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        // Interior of arc I_2 (through vertex at pi).
        let w = 0.9999999 * c(PI.cos(), PI.sin());
        let v = polygon_height(n, w).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
    }

    #[test]
    fn polygon_height_matches_poisson_disk_module() {
        // Same data expressed as generic disk boundary data: jumps at the
        // midpoint angles, alternating values starting with 1 on I_1.
        let n = 3usize;
        let step = PI / n as f64;
        let angles: Vec<f64> = (1..=(2 * n))
            .map(|k| (k as f64 * step - 0.5 * step).rem_euclid(std::f64::consts::TAU))
            .collect();
        // angles are already increasing in (0, 2 pi) for this construction.
        let values: Vec<f64> = (1..=(2 * n))
            .map(|k| if k % 2 == 1 { 1.0 } else { 0.0 })
            .collect();
        let bd = BoundaryData::disk(angles, values).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let r = rng.gen_range(0.0..0.98);
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let w = Complex64::from_polar(r, ang);
            let a = polygon_height(n, w).unwrap();
            let b = poisson_disk(&bd, w).unwrap();
            assert!((a - b).abs() < 1e-12, "at {w}: {a} vs {b}");
        }
    }

    #[test]
    fn height_errors_at_midpoint_preimages() {
        // The surface has no value over a midpoint preimage (the whole
        // isotropic segment clusters there).
        let chart = PolygonChart::new(2, 1e-10).unwrap();
        for w in &chart.midpoint_params {
            assert!(matches!(
                polygon_height(2, *w),
                Err(ScError::AtMidpointPreimage { .. })
            ));
        }
    }

    #[test]
    fn height_obeys_max_principle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let r = rng.gen_range(0.0..0.999);
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let v = polygon_height(2, Complex64::from_polar(r, ang)).unwrap();
            assert!(v > 0.0 && v < 1.0, "{v}");
        }
    }

    #[test]
    fn patch_boundary_alternates_heights_n2() {
        let patch = schwarz_patch(2).unwrap();
        // Radial limit into each arc interior: heights 1, 0, 1, 0.
        for (k, expected) in [(1usize, 1.0), (2, 0.0), (3, 1.0), (4, 0.0)] {
            let ang = k as f64 * PI / 2.0; // vertex angle inside arc I_k
            let w = 0.999999 * c(ang.cos(), ang.sin());
            let p = patch.eval(w).unwrap();
            assert!((p.t - expected).abs() < 1e-5, "arc {k}: {}", p.t);
        }
    }

    #[test]
    fn isotropic_line_over_first_midpoint_has_unit_range() {
        // Sequence-sampling oracle for the cluster segment: approaching the
        // midpoint preimage w_1 from varying angles, the heights sweep
        // (0, 1) while the planar part converges to the mapped midpoint.
        let n = 2;
        let chart = PolygonChart::new(n, 1e-10).unwrap();
        let m1 = PI / 4.0;
        let mapped_midpoint = chart.edge_midpoint(1);
        let mut min_t = f64::INFINITY;
        let mut max_t = f64::NEG_INFINITY;
        for j in 1..40 {
            let s = j as f64 / 40.0;
            // Points approaching w_1 inside the disk along a curve whose
            // tangent angle varies.
            let eps = 1e-7;
            let ang = m1 + eps * (2.0 * s - 1.0);
            let w = (1.0 - eps * s * (1.0 - s) * 4.0 - 1e-12) * c(ang.cos(), ang.sin());
            let t = polygon_height(n, w).unwrap();
            min_t = min_t.min(t);
            max_t = max_t.max(t);
            let f = sc_map(n, w, 1e-10).unwrap();
            assert!(
                (f - mapped_midpoint).norm() < 1e-6,
                "planar limit {f} vs {mapped_midpoint}"
            );
        }
        assert!(min_t < 0.2, "min {min_t}");
        assert!(max_t > 0.8, "max {max_t}");
    }

    #[test]
    fn patch_reflects_across_half_edge() {
        // Horizontal extension of the n = 2 patch across the height-1 half
        // of edge 1: mirrored parameters (disk inversion 1/conj(w)) must
        // evaluate to the motion image of the original.
        use crate::reflect::{
            reflect_horizontal, ArcChart, BoundaryInterval, ExtensionTolerances, MotionI3,
        };
        let chart = PolygonChart::new(2, 1e-10).unwrap();
        let patch = schwarz_patch(2).unwrap();
        let arc = ArcChart::line(chart.edge_midpoint(1), chart.edge_direction(1)).unwrap();
        // Half-arc of I_1 on edge 1: boundary angles just above w_1.
        let boundary = BoundaryInterval::DiskArc { lo: PI / 4.0 + 0.02, hi: PI / 2.0 - 0.02 };
        let extended = reflect_horizontal(
            &patch,
            arc.clone(),
            1.0,
            boundary,
            ExtensionTolerances::default(),
        )
        .unwrap();
        let motion = MotionI3::horizontal_reflection(&arc, 1.0);
        for (rho, ang) in [(0.9, 1.0), (0.85, 0.9), (0.95, 1.2)] {
            let w = Complex64::from_polar(rho, ang);
            let p = extended.eval(w).unwrap();
            let q = extended.eval(1.0 / w.conj()).unwrap();
            let mapped = motion.apply(&p).unwrap();
            assert!(
                q.sub(&mapped).norm() < 1e-8,
                "at {w}: {q:?} vs {mapped:?}"
            );
        }
    }

    #[test]
    fn schwarz_d_depth_one_has_nine_patches() {
        let tiling = schwarz_d_tiling(1, 5).unwrap();
        assert_eq!(tiling.orbit.meshes.len(), 9);
    }

    #[test]
    fn schwarz_d_periods_are_three_and_independent() {
        let tiling = schwarz_d_tiling(4, 3).unwrap();
        assert_eq!(tiling.orbit.periods.len(), 3, "periods: {:?}", tiling.orbit.periods);
        let det = crate::reflect::det3(
            &tiling.orbit.periods[0],
            &tiling.orbit.periods[1],
            &tiling.orbit.periods[2],
        );
        assert!(det.abs() > 1e-6, "det {det}");
    }

    #[test]
    fn seed_and_depth_zero() {
        let tiling = schwarz_d_tiling(0, 4).unwrap();
        assert_eq!(tiling.orbit.meshes.len(), 1);
    }

    #[test]
    fn adjacent_patches_share_seams() {
        let chart = PolygonChart::new(2, 1e-10).unwrap();
        let generators = schwarz_d_generators(&chart).unwrap();
        let patch = schwarz_patch(2).unwrap();
        // For each horizontal-edge generator, boundary points of the seed on
        // the matching half-edge are fixed by the motion.
        // Arc I_k spans midpoint angles; its half adjacent to midpoint k at
        // the arc's height is the seam of the rotation about edge k at that
        // height.
        let step = PI / 2.0;
        for k in 1..=4usize {
            let gen_horizontal = &generators[2 * (k - 1) + 1];
            let lo = k as f64 * step - 0.5 * step; // angle of w_k
            for j in 1..8 {
                let ang = lo + 0.45 * step * j as f64 / 8.0;
                let w = c(ang.cos(), ang.sin());
                let p = patch.eval(w).unwrap();
                let q = gen_horizontal.apply(&p).unwrap();
                assert!(
                    q.sub(&p).norm() < 1e-9,
                    "edge {k} angle {ang}: {p:?} moved to {q:?}"
                );
            }
        }
    }
}
