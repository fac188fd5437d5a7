//! Library-level tiling demo: build the square patch, iterate its boundary
//! rotations, and weld the orbit into one mesh.
//!
//! Run with `cargo run --release -p isoflect --example tiling_stress`.

fn main() {
    let depth = 5;
    let start = std::time::Instant::now();
    let tiling = isoflect::scpoly::schwarz_d_tiling(depth, 12).expect("tiling");
    let periods = &tiling.orbit.periods;
    assert_eq!(periods.len(), 3, "expected three independent periods");
    let det = isoflect::reflect::det3(&periods[0], &periods[1], &periods[2]);
    assert!(det.abs() > 1e-6, "degenerate period basis");
    println!(
        "depth {depth}: {} patches, {} periods, det {det:.6}, {:.2}s",
        tiling.orbit.meshes.len(),
        periods.len(),
        start.elapsed().as_secs_f64()
    );
    for (k, p) in periods.iter().enumerate() {
        println!("  period {k}: ({:+.6}, {:+.6}, {:+.6})", p[0], p[1], p[2]);
    }
    let welded = isoflect::mesh::Mesh::weld_all(&tiling.orbit.meshes, 1e-9);
    println!(
        "welded: {} vertices, {} triangles, oriented: {}",
        welded.vertices.len(),
        welded.triangles.len(),
        welded.orientation_consistent()
    );
    let path = std::path::Path::new("schwarz-d-depth5.obj");
    isoflect::mesh::export(&welded, isoflect::mesh::MeshFormat::Obj, path).expect("export");
    println!("wrote {}", path.display());
}
