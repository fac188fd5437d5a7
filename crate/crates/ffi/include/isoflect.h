/* C interface to the isoflect zero mean curvature surface kernel. */

#ifndef ISOFLECT_H
#define ISOFLECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ISOFLECT_OK 0

#define ISOFLECT_ERR_NULL_ARGUMENT -1

#define ISOFLECT_ERR_INVALID_UTF8 -2

#define ISOFLECT_ERR_PARSE -3

#define ISOFLECT_ERR_EVAL -4

#define ISOFLECT_ERR_CONFIG -5

#define ISOFLECT_ERR_RUNTIME -6

#define ISOFLECT_ERR_BUFFER_TOO_SMALL -7

/**
 * OBJ text format selector for `isoflect_mesh_export`.
 */
#define ISOFLECT_FORMAT_OBJ 0

/**
 * Binary little-endian PLY format selector.
 */
#define ISOFLECT_FORMAT_PLY 1

/**
 * Indexed triangle mesh handle.
 */
typedef struct IsoflectMesh IsoflectMesh;

/**
 * Surface evaluator handle.
 */
typedef struct IsoflectSurface IsoflectSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. The pointer stays valid
 * until the next failing call from the same thread. Never null.
 */
const char *isoflect_last_error(void);

/**
 * Evaluates an expression in the documented grammar at w = re + i im,
 * writing the value into `out[0]` (real) and `out[1]` (imaginary).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` must point to at
 * least two doubles.
 */
int32_t isoflect_expr_eval(const char *text, double re, double im, double *out);

/**
 * Creates a preset surface: "helicoid", "isotropic-catenoid", "schwarz-d".
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the handle until `isoflect_surface_free`.
 */
int32_t isoflect_surface_preset(const char *name, struct IsoflectSurface **out);

/**
 * Creates a half-plane surface from Weierstrass data (F, G) in the
 * expression grammar, with family parameter `c` and basepoint
 * `basepoint_re + i basepoint_im`.
 *
 * # Safety
 * `f` and `g` must be valid NUL-terminated strings; `out` must be valid.
 */
int32_t isoflect_surface_weierstrass(const char *f,
                                     const char *g,
                                     double c,
                                     double basepoint_re,
                                     double basepoint_im,
                                     struct IsoflectSurface **out);

/**
 * Evaluates the surface at parameter re + i im; writes (x, y, t) into
 * `out[0..3]`.
 *
 * # Safety
 * `surface` must be a live handle; `out` must point to three doubles.
 */
int32_t isoflect_surface_eval(const struct IsoflectSurface *surface,
                              double re,
                              double im,
                              double *out);

/**
 * Meshes the surface on its default chart bounds at the given resolution
 * (nodes per axis, at least 2).
 *
 * # Safety
 * `surface` must be a live handle; `out` must be valid. On success `*out`
 * owns the mesh until `isoflect_mesh_free`.
 */
int32_t isoflect_surface_mesh(const struct IsoflectSurface *surface,
                              uint32_t resolution,
                              struct IsoflectMesh **out);

/**
 * Writes the vertex and triangle counts of a mesh.
 *
 * # Safety
 * All pointers must be valid.
 */
int32_t isoflect_mesh_counts(const struct IsoflectMesh *mesh, size_t *vertices, size_t *triangles);

/**
 * Copies vertex coordinates as (x, y, t) triples; `len` is the buffer
 * capacity in doubles and must be at least 3 * vertex count.
 *
 * # Safety
 * `buffer` must point to at least `len` writable doubles.
 */
int32_t isoflect_mesh_copy_vertices(const struct IsoflectMesh *mesh, double *buffer, size_t len);

/**
 * Copies triangle indices as index triples; `len` is the buffer capacity in
 * u32 and must be at least 3 * triangle count.
 *
 * # Safety
 * `buffer` must point to at least `len` writable u32 values.
 */
int32_t isoflect_mesh_copy_triangles(const struct IsoflectMesh *mesh, uint32_t *buffer, size_t len);

/**
 * Exports the mesh: `format` 0 writes OBJ text, 1 binary little-endian PLY.
 *
 * # Safety
 * `mesh` must be a live handle; `path` a valid NUL-terminated string.
 */
int32_t isoflect_mesh_export(const struct IsoflectMesh *mesh, const char *path, int32_t format);

/**
 * Frees a surface handle. Passing null is a no-op.
 *
 * # Safety
 * `surface` must be a handle from this library, freed at most once.
 */
void isoflect_surface_free(struct IsoflectSurface *surface);

/**
 * Frees a mesh handle. Passing null is a no-op.
 *
 * # Safety
 * `mesh` must be a handle from this library, freed at most once.
 */
void isoflect_mesh_free(struct IsoflectMesh *mesh);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOFLECT_H */
