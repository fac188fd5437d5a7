//! C ABI over the surface kernel.
//!
//! Conventions, matching what C callers expect:
//! - opaque handles (`IsoflectSurface`, `IsoflectMesh`); C never sees layouts
//! - every fallible call returns an `int32_t` status (`ISOFLECT_OK` is 0,
//!   errors are negative); results come back through out-parameters
//! - the last error message for the calling thread is readable via
//!   [`isoflect_last_error`] until the next failing call
//! - handles are freed with the matching `*_free` function, exactly once
//!
//! The generated header lands in `include/isoflect.h` at build time.

use isoflect::expr::ComplexExpr;
use isoflect::mesh::{self, GridBounds, Mesh, MeshFormat};
use isoflect::scpoly;
use isoflect::weierstrass::{presets, Chart, SurfaceMap, WeierstrassData};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

pub const ISOFLECT_OK: i32 = 0;
pub const ISOFLECT_ERR_NULL_ARGUMENT: i32 = -1;
pub const ISOFLECT_ERR_INVALID_UTF8: i32 = -2;
pub const ISOFLECT_ERR_PARSE: i32 = -3;
pub const ISOFLECT_ERR_EVAL: i32 = -4;
pub const ISOFLECT_ERR_CONFIG: i32 = -5;
pub const ISOFLECT_ERR_RUNTIME: i32 = -6;
pub const ISOFLECT_ERR_BUFFER_TOO_SMALL: i32 = -7;

/// OBJ text format selector for `isoflect_mesh_export`.
pub const ISOFLECT_FORMAT_OBJ: i32 = 0;
/// Binary little-endian PLY format selector.
pub const ISOFLECT_FORMAT_PLY: i32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(code: i32, message: impl Into<String>) -> i32 {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
    code
}

/// Surface evaluator handle.
pub struct IsoflectSurface {
    surface: SurfaceMap,
}

/// Indexed triangle mesh handle.
pub struct IsoflectMesh {
    mesh: Mesh,
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call from the same thread. Never null.
#[no_mangle]
pub extern "C" fn isoflect_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null string argument"));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| set_error(ISOFLECT_ERR_INVALID_UTF8, "string is not valid UTF-8"))
}

/// Evaluates an expression in the documented grammar at w = re + i im,
/// writing the value into `out[0]` (real) and `out[1]` (imaginary).
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` must point to at
/// least two doubles.
#[no_mangle]
pub unsafe extern "C" fn isoflect_expr_eval(
    text: *const c_char,
    re: f64,
    im: f64,
    out: *mut f64,
) -> i32 {
    if out.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null output pointer");
    }
    let text = match unsafe { read_str(text) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    let expr = match ComplexExpr::parse(text) {
        Ok(e) => e,
        Err(e) => return set_error(ISOFLECT_ERR_PARSE, e.to_string()),
    };
    match expr.eval(Complex64::new(re, im)) {
        Ok(v) => {
            unsafe {
                *out = v.re;
                *out.add(1) = v.im;
            }
            ISOFLECT_OK
        }
        Err(e) => set_error(ISOFLECT_ERR_EVAL, e.to_string()),
    }
}

fn build_preset(name: &str) -> Result<SurfaceMap, i32> {
    match name {
        "helicoid" => Ok(SurfaceMap::from_weierstrass(presets::helicoid_data())),
        "isotropic-catenoid" => Ok(SurfaceMap::from_weierstrass(presets::catenoid_data())),
        "schwarz-d" => scpoly::schwarz_patch(2)
            .map_err(|e| set_error(ISOFLECT_ERR_RUNTIME, e.to_string())),
        other => Err(set_error(
            ISOFLECT_ERR_CONFIG,
            format!("unknown preset `{other}` (helicoid, isotropic-catenoid, schwarz-d)"),
        )),
    }
}

/// Creates a preset surface: "helicoid", "isotropic-catenoid", "schwarz-d".
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle until `isoflect_surface_free`.
#[no_mangle]
pub unsafe extern "C" fn isoflect_surface_preset(
    name: *const c_char,
    out: *mut *mut IsoflectSurface,
) -> i32 {
    if out.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null output pointer");
    }
    let name = match unsafe { read_str(name) } {
        Ok(n) => n,
        Err(code) => return code,
    };
    match build_preset(name) {
        Ok(surface) => {
            unsafe { *out = Box::into_raw(Box::new(IsoflectSurface { surface })) };
            ISOFLECT_OK
        }
        Err(code) => code,
    }
}

/// Creates a half-plane surface from Weierstrass data (F, G) in the
/// expression grammar, with family parameter `c` and basepoint
/// `basepoint_re + i basepoint_im`.
///
/// # Safety
/// `f` and `g` must be valid NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn isoflect_surface_weierstrass(
    f: *const c_char,
    g: *const c_char,
    c: f64,
    basepoint_re: f64,
    basepoint_im: f64,
    out: *mut *mut IsoflectSurface,
) -> i32 {
    if out.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null output pointer");
    }
    let f_text = match unsafe { read_str(f) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    let g_text = match unsafe { read_str(g) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    let f_expr = match ComplexExpr::parse(f_text) {
        Ok(e) => e,
        Err(e) => return set_error(ISOFLECT_ERR_PARSE, format!("F: {e}")),
    };
    let g_expr = match ComplexExpr::parse(g_text) {
        Ok(e) => e,
        Err(e) => return set_error(ISOFLECT_ERR_PARSE, format!("G: {e}")),
    };
    let data = WeierstrassData::new(
        f_expr,
        g_expr,
        Complex64::new(basepoint_re, basepoint_im),
        Chart::HalfPlane,
    )
    .with_c(c);
    if let Err(e) = data.validate() {
        return set_error(ISOFLECT_ERR_CONFIG, e.to_string());
    }
    unsafe {
        *out = Box::into_raw(Box::new(IsoflectSurface {
            surface: SurfaceMap::from_weierstrass(data),
        }))
    };
    ISOFLECT_OK
}

/// Evaluates the surface at parameter re + i im; writes (x, y, t) into
/// `out[0..3]`.
///
/// # Safety
/// `surface` must be a live handle; `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn isoflect_surface_eval(
    surface: *const IsoflectSurface,
    re: f64,
    im: f64,
    out: *mut f64,
) -> i32 {
    if surface.is_null() || out.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null handle or output");
    }
    let handle = unsafe { &*surface };
    match handle.surface.eval(Complex64::new(re, im)) {
        Ok(p) => {
            unsafe {
                *out = p.x;
                *out.add(1) = p.y;
                *out.add(2) = p.t;
            }
            ISOFLECT_OK
        }
        Err(e) => set_error(ISOFLECT_ERR_EVAL, e.to_string()),
    }
}

/// Meshes the surface on its default chart bounds at the given resolution
/// (nodes per axis, at least 2).
///
/// # Safety
/// `surface` must be a live handle; `out` must be valid. On success `*out`
/// owns the mesh until `isoflect_mesh_free`.
#[no_mangle]
pub unsafe extern "C" fn isoflect_surface_mesh(
    surface: *const IsoflectSurface,
    resolution: u32,
    out: *mut *mut IsoflectMesh,
) -> i32 {
    if surface.is_null() || out.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null handle or output");
    }
    if resolution < 2 {
        return set_error(ISOFLECT_ERR_CONFIG, "resolution must be at least 2");
    }
    let handle = unsafe { &*surface };
    let chart = handle.surface.chart();
    let bounds = GridBounds::default_for(chart);
    let grid = match mesh::sample_grid(chart, resolution as usize, &bounds) {
        Ok(g) => g,
        Err(e) => return set_error(ISOFLECT_ERR_CONFIG, e.to_string()),
    };
    match mesh::build_mesh(&handle.surface, &grid) {
        Ok(built) => {
            let built = if chart == Chart::Disk {
                built.welded(mesh::WELD_TOLERANCE)
            } else {
                built
            };
            unsafe { *out = Box::into_raw(Box::new(IsoflectMesh { mesh: built })) };
            ISOFLECT_OK
        }
        Err(e) => set_error(ISOFLECT_ERR_RUNTIME, e.to_string()),
    }
}

/// Writes the vertex and triangle counts of a mesh.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn isoflect_mesh_counts(
    mesh: *const IsoflectMesh,
    vertices: *mut usize,
    triangles: *mut usize,
) -> i32 {
    if mesh.is_null() || vertices.is_null() || triangles.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null handle or output");
    }
    let handle = unsafe { &*mesh };
    unsafe {
        *vertices = handle.mesh.vertices.len();
        *triangles = handle.mesh.triangles.len();
    }
    ISOFLECT_OK
}

/// Copies vertex coordinates as (x, y, t) triples; `len` is the buffer
/// capacity in doubles and must be at least 3 * vertex count.
///
/// # Safety
/// `buffer` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn isoflect_mesh_copy_vertices(
    mesh: *const IsoflectMesh,
    buffer: *mut f64,
    len: usize,
) -> i32 {
    if mesh.is_null() || buffer.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null handle or buffer");
    }
    let handle = unsafe { &*mesh };
    let needed = 3 * handle.mesh.vertices.len();
    if len < needed {
        return set_error(
            ISOFLECT_ERR_BUFFER_TOO_SMALL,
            format!("vertex buffer needs {needed} doubles, got {len}"),
        );
    }
    for (i, v) in handle.mesh.vertices.iter().enumerate() {
        unsafe {
            *buffer.add(3 * i) = v.x;
            *buffer.add(3 * i + 1) = v.y;
            *buffer.add(3 * i + 2) = v.t;
        }
    }
    ISOFLECT_OK
}

/// Copies triangle indices as index triples; `len` is the buffer capacity in
/// u32 and must be at least 3 * triangle count.
///
/// # Safety
/// `buffer` must point to at least `len` writable u32 values.
#[no_mangle]
pub unsafe extern "C" fn isoflect_mesh_copy_triangles(
    mesh: *const IsoflectMesh,
    buffer: *mut u32,
    len: usize,
) -> i32 {
    if mesh.is_null() || buffer.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null handle or buffer");
    }
    let handle = unsafe { &*mesh };
    let needed = 3 * handle.mesh.triangles.len();
    if len < needed {
        return set_error(
            ISOFLECT_ERR_BUFFER_TOO_SMALL,
            format!("index buffer needs {needed} entries, got {len}"),
        );
    }
    for (i, t) in handle.mesh.triangles.iter().enumerate() {
        unsafe {
            *buffer.add(3 * i) = t[0];
            *buffer.add(3 * i + 1) = t[1];
            *buffer.add(3 * i + 2) = t[2];
        }
    }
    ISOFLECT_OK
}

/// Exports the mesh: `format` 0 writes OBJ text, 1 binary little-endian PLY.
///
/// # Safety
/// `mesh` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn isoflect_mesh_export(
    mesh: *const IsoflectMesh,
    path: *const c_char,
    format: i32,
) -> i32 {
    if mesh.is_null() {
        return set_error(ISOFLECT_ERR_NULL_ARGUMENT, "null mesh handle");
    }
    let path = match unsafe { read_str(path) } {
        Ok(p) => p,
        Err(code) => return code,
    };
    let format = match format {
        ISOFLECT_FORMAT_OBJ => MeshFormat::Obj,
        ISOFLECT_FORMAT_PLY => MeshFormat::Ply,
        other => {
            return set_error(ISOFLECT_ERR_CONFIG, format!("unknown format selector {other}"))
        }
    };
    let handle = unsafe { &*mesh };
    match mesh::export(&handle.mesh, format, std::path::Path::new(path)) {
        Ok(()) => ISOFLECT_OK,
        Err(e) => set_error(ISOFLECT_ERR_RUNTIME, e.to_string()),
    }
}

/// Frees a surface handle. Passing null is a no-op.
///
/// # Safety
/// `surface` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn isoflect_surface_free(surface: *mut IsoflectSurface) {
    if !surface.is_null() {
        drop(unsafe { Box::from_raw(surface) });
    }
}

/// Frees a mesh handle. Passing null is a no-op.
///
/// # Safety
/// `mesh` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn isoflect_mesh_free(mesh: *mut IsoflectMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}
