//! Zero mean curvature surfaces in the simply isotropic 3-space.
//!
//! The simply isotropic 3-space is R^3 carrying the degenerate metric
//! dx^2 + dy^2; surfaces whose conformal coordinate functions are harmonic
//! play the role minimal surfaces play in Euclidean space. This crate builds
//! such surfaces from Weierstrass data (a holomorphic F and meromorphic G),
//! extends them analytically across horizontal boundary curves and vertical
//! (isotropic) boundary lines, assembles triply periodic tilings such as the
//! Schwarz-D analogue over the square, and emits verified triangle meshes.
//!
//! Modules:
//! - [`expr`]: complex expression parsing, evaluation, differentiation
//! - [`quad`]: adaptive Gauss-Kronrod contour integration
//! - [`weierstrass`]: representation-formula surfaces and the deformation family
//! - [`harmonic`]: closed-form Poisson solvers and the blow-up extension
//! - [`reflect`]: arc reflections, isotropic-line extensions, orbit tilings
//! - [`scpoly`]: Schwarz-Christoffel polygon patches
//! - [`mesh`]: grid sampling, triangle meshes, OBJ/PLY export
//! - [`verify`]: residual suites (harmonicity, conformality, recovery)
//! - [`cli`]: the `isoflect` command-line front end

pub mod cli;
pub mod expr;
pub mod harmonic;
pub mod mesh;
pub mod quad;
pub mod reflect;
pub mod scpoly;
pub mod verify;
pub mod weierstrass;

pub use expr::ComplexExpr;
pub use weierstrass::{Point3, SurfaceMap, WeierstrassData};
