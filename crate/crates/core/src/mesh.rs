//! Grid sampling, indexed triangle meshes, and OBJ/PLY export.
//!
//! Charts are sampled on structured two-axis grids (polar for half-plane and
//! disk charts, rectangular for blow-up strips). Strip grids straddling the
//! seam always carry an exact `r = 0` node column so the isotropic segment
//! is an ordinary grid line. Meshes keep per-vertex flags (interior,
//! boundary, isotropic seam, metric-singular) and survive export round-trips
//! losslessly: OBJ text carries 17 significant digits, PLY is binary
//! little-endian float64.

use crate::reflect::{MotionI3, ReflectError};
use crate::weierstrass::{Chart, Point3, SurfaceError, SurfaceMap};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, Read, Write};
use thiserror::Error;

pub const FLAG_INTERIOR: u8 = 1;
pub const FLAG_BOUNDARY: u8 = 2;
pub const FLAG_SEAM: u8 = 4;
pub const FLAG_SINGULAR: u8 = 8;

/// Metric factors below this are flagged singular.
pub const SINGULAR_METRIC_THRESHOLD: f64 = 1e-10;
/// Vertex welding tolerance in world units.
pub const WELD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("surface evaluation failed at grid node {param}: {source}")]
    Evaluation {
        param: Complex64,
        #[source]
        source: SurfaceError,
    },
    #[error("grid bounds are empty or inverted")]
    EmptyBounds,
    #[error("resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("mesh file parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Reflect(#[from] ReflectError),
}

/// Axis ranges of a structured grid. Interpretation depends on the chart:
/// (radius, angle) for half-plane, plane, and disk charts; (r, theta) for
/// blow-up strips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl GridBounds {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        GridBounds { u, v }
    }

    /// Chart-appropriate defaults: a radial annulus of the half-plane, the
    /// unit disk minus a thin boundary ring, a seam-straddling strip window.
    pub fn default_for(chart: Chart) -> Self {
        match chart {
            Chart::HalfPlane => GridBounds::new((0.1, 2.5), (0.05, std::f64::consts::PI - 0.05)),
            Chart::Disk => GridBounds::new((0.02, 1.0 - 1e-4), (0.0, std::f64::consts::TAU)),
            Chart::Strip => {
                GridBounds::new((-1.5, 1.5), (0.05, std::f64::consts::PI - 0.05))
            }
            Chart::Plane => GridBounds::new(
                (0.1, 2.5),
                (-std::f64::consts::PI + 0.05, std::f64::consts::PI - 0.05),
            ),
        }
    }
}

/// Structured parameter grid over a chart, row-major over (u, v) nodes.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    pub chart: Chart,
    pub nu: usize,
    pub nv: usize,
    /// Node parameters, indexed `ju * nv + jv`.
    pub params: Vec<Complex64>,
    /// Chart metadata flags per node (boundary, seam).
    pub node_flags: Vec<u8>,
}

impl ParamGrid {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn row(&self, ju: usize) -> &[Complex64] {
        &self.params[ju * self.nv..(ju + 1) * self.nv]
    }
}

/// Axis nodes, inserting an exact zero when the range straddles it (the
/// strip seam must be a grid line, not a rounding casualty). Two-node axes
/// cannot host an interior zero and stay plain endpoints.
fn axis_nodes(lo: f64, hi: f64, n: usize, force_zero: bool) -> Vec<f64> {
    if force_zero && lo < 0.0 && hi > 0.0 && n >= 3 {
        let frac = -lo / (hi - lo);
        let k = ((n - 1) as f64 * frac).round().clamp(1.0, (n - 2) as f64) as usize;
        let mut nodes = Vec::with_capacity(n);
        for j in 0..=k {
            nodes.push(lo + (0.0 - lo) * j as f64 / k as f64);
        }
        nodes[k] = 0.0;
        let right = n - 1 - k;
        for j in 1..=right {
            nodes.push(hi * j as f64 / right as f64);
        }
        nodes
    } else {
        (0..n)
            .map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Samples a chart on a `resolution x resolution` structured grid.
pub fn sample_grid(
    chart: Chart,
    resolution: usize,
    bounds: &GridBounds,
) -> Result<ParamGrid, MeshError> {
    if resolution < 2 {
        return Err(MeshError::BadResolution(resolution));
    }
    let increasing =
        |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
    if !increasing(bounds.u.0, bounds.u.1) || !increasing(bounds.v.0, bounds.v.1) {
        return Err(MeshError::EmptyBounds);
    }
    let (u0, u1) = bounds.u;
    let (v0, v1) = bounds.v;
    if chart == Chart::Disk && (u0 <= 0.0 || u1 > 1.0 - 1e-4 + 1e-15) {
        return Err(MeshError::Invalid(format!(
            "disk grids need radius in (0, {}]",
            1.0 - 1e-4
        )));
    }
    let us = axis_nodes(u0, u1, resolution, chart == Chart::Strip);
    let vs = axis_nodes(v0, v1, resolution, false);
    let mut params = Vec::with_capacity(resolution * resolution);
    let mut node_flags = Vec::with_capacity(resolution * resolution);
    for (ju, &u) in us.iter().enumerate() {
        for (jv, &v) in vs.iter().enumerate() {
            let p = match chart {
                Chart::Strip => Complex64::new(u, v),
                _ => u * Complex64::new(v.cos(), v.sin()),
            };
            params.push(p);
            let mut flags = 0u8;
            let edge = ju == 0 || ju + 1 == resolution || jv == 0 || jv + 1 == resolution;
            if edge {
                flags |= FLAG_BOUNDARY;
            } else {
                flags |= FLAG_INTERIOR;
            }
            if chart == Chart::Strip && u == 0.0 {
                flags |= FLAG_SEAM;
            }
            node_flags.push(flags);
        }
    }
    Ok(ParamGrid { chart, nu: resolution, nv: resolution, params, node_flags })
}

/// Indexed triangle mesh with per-vertex flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    pub flags: Vec<u8>,
}

impl Mesh {
    pub fn validate(&self) -> Result<(), MeshError> {
        if self.flags.len() != self.vertices.len() {
            return Err(MeshError::Invalid(format!(
                "{} flags for {} vertices",
                self.flags.len(),
                self.vertices.len()
            )));
        }
        let n = self.vertices.len() as u32;
        for t in &self.triangles {
            if t.iter().any(|&i| i >= n) {
                return Err(MeshError::Invalid(format!("triangle index out of range: {t:?}")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::Invalid(format!("degenerate triangle: {t:?}")));
            }
        }
        Ok(())
    }

    pub fn bounding_box(&self) -> Option<(Point3, Point3)> {
        let first = self.vertices.first()?;
        let mut lo = *first;
        let mut hi = *first;
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            lo.t = lo.t.min(v.t);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
            hi.t = hi.t.max(v.t);
        }
        Some((lo, hi))
    }

    pub fn bbox_diagonal(&self) -> f64 {
        match self.bounding_box() {
            Some((lo, hi)) => hi.sub(&lo).norm(),
            None => 0.0,
        }
    }

    /// Image of the mesh under a motion as a map of space:
    /// orientation-reversing motions flip triangle winding. (Tiling copies
    /// additionally flip per parameter reflection; see `orbit_tiling`.)
    pub fn transformed(&self, motion: &MotionI3) -> Result<Mesh, ReflectError> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| motion.apply(v))
            .collect::<Result<Vec<_>, _>>()?;
        let mut mesh = Mesh { vertices, triangles: self.triangles.clone(), flags: self.flags.clone() };
        if motion.orientation() < 0.0 {
            mesh.flip_winding();
        }
        Ok(mesh)
    }

    /// Reverses every triangle in place.
    pub fn flip_winding(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    /// Merge vertices closer than `tol` (quantized grid hash); collapses
    /// duplicated seam vertices to bit-identical copies of the first
    /// occurrence and drops triangles that degenerate.
    pub fn welded(&self, tol: f64) -> Mesh {
        let inv = 1.0 / tol;
        let mut table: HashMap<(i64, i64, i64), u32> = HashMap::new();
        let mut remap: Vec<u32> = Vec::with_capacity(self.vertices.len());
        let mut vertices: Vec<Point3> = Vec::new();
        let mut flags: Vec<u8> = Vec::new();
        for (v, &f) in self.vertices.iter().zip(&self.flags) {
            let key = (
                (v.x * inv).round() as i64,
                (v.y * inv).round() as i64,
                (v.t * inv).round() as i64,
            );
            match table.get(&key) {
                Some(&idx) => {
                    remap.push(idx);
                    flags[idx as usize] |= f;
                }
                None => {
                    let idx = vertices.len() as u32;
                    table.insert(key, idx);
                    vertices.push(*v);
                    flags.push(f);
                    remap.push(idx);
                }
            }
        }
        let triangles = self
            .triangles
            .iter()
            .map(|t| [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]])
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        Mesh { vertices, triangles, flags }
    }

    /// Concatenates meshes and welds shared seams.
    pub fn weld_all(meshes: &[Mesh], tol: f64) -> Mesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut flags = Vec::new();
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            flags.extend_from_slice(&m.flags);
            triangles.extend(m.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        }
        Mesh { vertices, triangles, flags }.welded(tol)
    }

    /// True when every interior edge is traversed once in each direction by
    /// its two incident triangles (consistent outward orientation).
    pub fn orientation_consistent(&self) -> bool {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &self.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &count)| {
            count == 1 && directed.get(&(b, a)).copied().unwrap_or(0) <= 1
        })
    }
}

/// Evaluates the surface on the grid (rows in parallel, quadrature-backed
/// surfaces chain along each row) and assembles two triangles per quad.
/// Quads degenerate in parameter space are skipped; vertices where the
/// metric factor collapses are flagged singular.
pub fn build_mesh(surface: &SurfaceMap, grid: &ParamGrid) -> Result<Mesh, MeshError> {
    let rows: Vec<Vec<Result<Point3, SurfaceError>>> = (0..grid.nu)
        .into_par_iter()
        .map(|ju| surface.eval_batch(grid.row(ju)))
        .collect();
    let mut vertices = Vec::with_capacity(grid.len());
    let mut flags = Vec::with_capacity(grid.len());
    for (ju, row) in rows.into_iter().enumerate() {
        for (jv, value) in row.into_iter().enumerate() {
            let idx = ju * grid.nv + jv;
            let p = value.map_err(|source| MeshError::Evaluation {
                param: grid.params[idx],
                source,
            })?;
            let mut f = grid.node_flags[idx];
            if let Some(metric) = surface.metric_factor(grid.params[idx]) {
                if metric < SINGULAR_METRIC_THRESHOLD {
                    f |= FLAG_SINGULAR;
                }
            }
            vertices.push(p);
            flags.push(f);
        }
    }
    let mut triangles = Vec::with_capacity(2 * (grid.nu - 1) * (grid.nv - 1));
    let at = |ju: usize, jv: usize| (ju * grid.nv + jv) as u32;
    for ju in 0..grid.nu - 1 {
        for jv in 0..grid.nv - 1 {
            let a = grid.params[ju * grid.nv + jv];
            let b = grid.params[ju * grid.nv + jv + 1];
            let c = grid.params[(ju + 1) * grid.nv + jv];
            let d = grid.params[(ju + 1) * grid.nv + jv + 1];
            // Parameter-space area of the quad (shoelace on a, b, d, c).
            let area = 0.5
                * ((a.re * b.im - b.re * a.im)
                    + (b.re * d.im - d.re * b.im)
                    + (d.re * c.im - c.re * d.im)
                    + (c.re * a.im - a.re * c.im))
                    .abs();
            if area <= 1e-12 {
                continue;
            }
            triangles.push([at(ju, jv), at(ju, jv + 1), at(ju + 1, jv + 1)]);
            triangles.push([at(ju, jv), at(ju + 1, jv + 1), at(ju + 1, jv)]);
        }
    }
    let mesh = Mesh { vertices, triangles, flags };
    mesh.validate()?;
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(format!("unknown mesh format `{other}` (expected obj or ply)")),
        }
    }
}

/// OBJ text: `v x y t` with 17 significant digits (lossless for f64),
/// then 1-based `f i j k`.
pub fn export_obj<W: Write>(mesh: &Mesh, mut w: W) -> Result<(), MeshError> {
    for v in &mesh.vertices {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.t)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn import_obj<R: BufRead>(r: R) -> Result<Mesh, MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .map(|p| {
                        p.parse::<f64>().map_err(|e| {
                            MeshError::Parse(format!("line {}: {e}", lineno + 1))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(MeshError::Parse(format!(
                        "line {}: vertex needs 3 coordinates",
                        lineno + 1
                    )));
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = parts
                    .map(|p| {
                        let head = p.split('/').next().unwrap_or(p);
                        head.parse::<u32>().map_err(|e| {
                            MeshError::Parse(format!("line {}: {e}", lineno + 1))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(MeshError::Parse(format!(
                        "line {}: only triangles supported",
                        lineno + 1
                    )));
                }
                triangles.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    let flags = vec![0u8; vertices.len()];
    let mesh = Mesh { vertices, triangles, flags };
    mesh.validate()?;
    Ok(mesh)
}

/// Binary little-endian PLY with float64 coordinates and a uchar flag per
/// vertex; faces as uchar-counted int lists.
pub fn export_ply<W: Write>(mesh: &Mesh, mut w: W) -> Result<(), MeshError> {
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nproperty uchar flags\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    )?;
    for (v, &f) in mesh.vertices.iter().zip(&mesh.flags) {
        w.write_all(&v.x.to_le_bytes())?;
        w.write_all(&v.y.to_le_bytes())?;
        w.write_all(&v.t.to_le_bytes())?;
        w.write_all(&[f])?;
    }
    for t in &mesh.triangles {
        w.write_all(&[3u8])?;
        for &i in t {
            w.write_all(&(i as i32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn import_ply<R: Read>(mut r: R) -> Result<Mesh, MeshError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let header_end = data
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| MeshError::Parse("missing end_header".into()))?
        + 11;
    let header = std::str::from_utf8(&data[..header_end])
        .map_err(|_| MeshError::Parse("non-utf8 header".into()))?;
    let mut n_vertices = None;
    let mut n_faces = None;
    for line in header.lines() {
        let mut parts = line.split_whitespace();
        if parts.next() == Some("element") {
            match (parts.next(), parts.next()) {
                (Some("vertex"), Some(n)) => {
                    n_vertices = Some(n.parse::<usize>().map_err(|e| {
                        MeshError::Parse(format!("vertex count: {e}"))
                    })?)
                }
                (Some("face"), Some(n)) => {
                    n_faces = Some(n.parse::<usize>().map_err(|e| {
                        MeshError::Parse(format!("face count: {e}"))
                    })?)
                }
                _ => {}
            }
        }
    }
    let n_vertices = n_vertices.ok_or_else(|| MeshError::Parse("missing vertex element".into()))?;
    let n_faces = n_faces.ok_or_else(|| MeshError::Parse("missing face element".into()))?;
    let mut cursor = header_end;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8], MeshError> {
        if *cursor + n > data.len() {
            return Err(MeshError::Parse("unexpected end of binary payload".into()));
        }
        let s = &data[*cursor..*cursor + n];
        *cursor += n;
        Ok(s)
    };
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut flags = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let mut coords = [0.0f64; 3];
        for c in &mut coords {
            *c = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        }
        flags.push(take(&mut cursor, 1)?[0]);
        vertices.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    let mut triangles = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let count = take(&mut cursor, 1)?[0];
        if count != 3 {
            return Err(MeshError::Parse(format!("non-triangle face ({count} vertices)")));
        }
        let mut t = [0u32; 3];
        for i in &mut t {
            let v = i32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap());
            *i = u32::try_from(v).map_err(|_| MeshError::Parse("negative index".into()))?;
        }
        triangles.push(t);
    }
    let mesh = Mesh { vertices, triangles, flags };
    mesh.validate()?;
    Ok(mesh)
}

pub fn export(mesh: &Mesh, format: MeshFormat, path: &std::path::Path) -> Result<(), MeshError> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    match format {
        MeshFormat::Obj => export_obj(mesh, &mut buf)?,
        MeshFormat::Ply => export_ply(mesh, &mut buf)?,
    }
    buf.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::presets;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn polar_grid_node_count() {
        let g = sample_grid(
            Chart::HalfPlane,
            4,
            &GridBounds::new((0.5, 2.0), (PI / 8.0, 7.0 * PI / 8.0)),
        )
        .unwrap();
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn strip_grid_contains_exact_zero() {
        let g = sample_grid(Chart::Strip, 9, &GridBounds::new((-1.0, 1.0), (0.1, 3.0))).unwrap();
        let zero_nodes: Vec<_> = g.params.iter().filter(|p| p.re == 0.0).collect();
        assert_eq!(zero_nodes.len(), 9);
        // Unbalanced range still lands a node exactly at zero.
        let g = sample_grid(Chart::Strip, 8, &GridBounds::new((-0.3, 1.7), (0.1, 3.0))).unwrap();
        assert!(g.params.iter().any(|p| p.re == 0.0));
        // Seam flags on the zero column.
        for (p, &f) in g.params.iter().zip(&g.node_flags) {
            assert_eq!(p.re == 0.0, f & FLAG_SEAM != 0);
        }
        // Two-node axes cannot host an interior zero; the grid still builds.
        let g = sample_grid(Chart::Strip, 2, &GridBounds::new((-1.0, 1.0), (0.1, 3.0))).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.params.iter().all(|p| p.re != 0.0));
    }

    #[test]
    fn disk_grid_excludes_boundary_ring() {
        let err = sample_grid(Chart::Disk, 6, &GridBounds::new((0.1, 1.0), (0.0, 6.0)));
        assert!(err.is_err());
        let g = sample_grid(Chart::Disk, 6, &GridBounds::default_for(Chart::Disk)).unwrap();
        assert!(g.params.iter().all(|p| p.norm() <= 1.0 - 1e-4 + 1e-12));
    }

    #[test]
    fn resolution_below_two_is_rejected() {
        let e = sample_grid(Chart::HalfPlane, 1, &GridBounds::default_for(Chart::HalfPlane));
        assert!(matches!(e, Err(MeshError::BadResolution(1))));
    }

    #[test]
    fn flat_plane_two_by_two_grid() {
        let plane = SurfaceMap::from_harmonic_pair(Ok, |_| Ok(0.0), Chart::HalfPlane);
        let grid = sample_grid(
            Chart::HalfPlane,
            2,
            &GridBounds::new((1.0, 2.0), (0.3, 1.0)),
        )
        .unwrap();
        let mesh = build_mesh(&plane, &grid).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles.len(), 2);
    }

    #[test]
    fn helicoid_strip_mesh_seam_is_isotropic_segment() {
        let surface = presets::helicoid_closed();
        let jump = crate::harmonic::BlowUpChart::new(0.0, 1.0, 0.0);
        let extended = crate::reflect::extend_isotropic(
            &surface,
            jump,
            crate::reflect::ArcChart::real_axis(),
            crate::reflect::ExtensionTolerances::default(),
        )
        .unwrap();
        let grid =
            sample_grid(Chart::Strip, 11, &GridBounds::new((-1.0, 1.0), (0.2, PI - 0.2))).unwrap();
        let mesh = build_mesh(&extended, &grid).unwrap();
        for (idx, p) in grid.params.iter().enumerate() {
            if p.re == 0.0 {
                let v = mesh.vertices[idx];
                assert!(v.x.abs() < 1e-12 && v.y.abs() < 1e-12);
                assert!((v.t - p.im / PI).abs() < 1e-12);
                assert!(mesh.flags[idx] & FLAG_SEAM != 0);
            }
        }
    }

    #[test]
    fn singular_vertices_are_flagged() {
        use crate::expr::ComplexExpr;
        use crate::weierstrass::WeierstrassData;
        let data = WeierstrassData::new(
            ComplexExpr::parse("w").unwrap(),
            ComplexExpr::parse("0").unwrap(),
            Complex64::new(0.0, 1.0),
            Chart::HalfPlane,
        );
        let surface = SurfaceMap::from_weierstrass(data);
        // A grid node exactly at the origin has |F|^2 = 0.
        let grid = ParamGrid {
            chart: Chart::HalfPlane,
            nu: 2,
            nv: 2,
            params: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 1.0),
            ],
            node_flags: vec![FLAG_BOUNDARY; 4],
        };
        let mesh = build_mesh(&surface, &grid).unwrap();
        assert!(mesh.flags[0] & FLAG_SINGULAR != 0);
        assert!(mesh.flags[3] & FLAG_SINGULAR == 0);
    }

    #[test]
    fn obj_round_trip_is_exact() {
        let mesh = Mesh {
            vertices: vec![
                Point3::new(0.1, -2.5e-17, 3.0),
                Point3::new(1.0 / 3.0, PI, -1.0),
                Point3::new(f64::MIN_POSITIVE, 1e300, 0.0),
            ],
            triangles: vec![[0, 1, 2]],
            flags: vec![0; 3],
        };
        let mut buf = Vec::new();
        export_obj(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
        let back = import_obj(std::io::BufReader::new(buf.as_slice())).unwrap();
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.t.to_bits(), b.t.to_bits());
        }
        assert_eq!(mesh.triangles, back.triangles);
    }

    #[test]
    fn ply_round_trip_is_bit_exact() {
        let mesh = Mesh {
            vertices: vec![
                Point3::new(0.1, 0.2, 0.3),
                Point3::new(-1.5, 2.5, -3.5),
                Point3::new(1e-300, -1e300, 42.0),
                Point3::new(0.0, -0.0, 1.0),
            ],
            triangles: vec![[0, 1, 2], [1, 3, 2]],
            flags: vec![FLAG_INTERIOR, FLAG_BOUNDARY, FLAG_SEAM, FLAG_SINGULAR],
        };
        let mut buf = Vec::new();
        export_ply(&mesh, &mut buf).unwrap();
        let header = String::from_utf8_lossy(&buf[..buf.len().min(200)]);
        assert!(header.contains("element vertex 4"));
        assert!(header.contains("element face 2"));
        let back = import_ply(buf.as_slice()).unwrap();
        assert_eq!(back.flags, mesh.flags);
        assert_eq!(back.triangles, mesh.triangles);
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.t.to_bits(), b.t.to_bits());
        }
    }

    #[test]
    fn welding_merges_seam_vertices() {
        let a = Mesh {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 1, 2]],
            flags: vec![FLAG_BOUNDARY; 3],
        };
        let b = Mesh {
            vertices: vec![
                Point3::new(1.0 + 1e-12, 0.0, 0.0),
                Point3::new(0.0, 1.0 - 1e-12, 0.0),
                Point3::new(1.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 2, 1]],
            flags: vec![FLAG_BOUNDARY; 3],
        };
        let welded = Mesh::weld_all(&[a, b], WELD_TOLERANCE);
        assert_eq!(welded.vertices.len(), 4);
        assert_eq!(welded.triangles.len(), 2);
        assert!(welded.orientation_consistent());
    }

    #[test]
    fn orientation_under_motions() {
        let mesh = Mesh {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.5),
            ],
            triangles: vec![[0, 1, 2]],
            flags: vec![0; 3],
        };
        // A 180-degree rotation about a horizontal line is a proper motion
        // of space: `transformed` keeps the winding.
        let rot = crate::reflect::MotionI3::rotation_about_horizontal_line(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            0.0,
        )
        .unwrap();
        assert!(rot.orientation() > 0.0);
        let image = mesh.transformed(&rot).unwrap();
        assert_eq!(image.triangles[0], [0, 1, 2]);
        // A mirror in the horizontal plane reverses orientation: winding
        // must flip.
        let mirror = crate::reflect::MotionI3 {
            planar: crate::reflect::PlanarMap::identity(),
            vertical: crate::reflect::VerticalMap::flip(0.0),
        };
        assert!(mirror.orientation() < 0.0);
        let mirrored = mesh.transformed(&mirror).unwrap();
        assert_eq!(mirrored.triangles[0], [0, 2, 1]);
    }

    #[test]
    fn tiling_copies_weld_with_consistent_orientation() {
        // A patch glued to its reflection image across the seam: the orbit
        // applies the parameter-parity winding flip, so the weld is
        // consistently oriented.
        let mesh = Mesh {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.5),
            ],
            triangles: vec![[0, 1, 2]],
            flags: vec![0; 3],
        };
        let rot = crate::reflect::MotionI3::rotation_about_horizontal_line(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            0.0,
        )
        .unwrap();
        let orbit = crate::reflect::orbit_tiling(&mesh, &[rot], 1).unwrap();
        assert_eq!(orbit.meshes.len(), 2);
        let welded = Mesh::weld_all(&orbit.meshes, WELD_TOLERANCE);
        assert!(welded.orientation_consistent());
    }
}
