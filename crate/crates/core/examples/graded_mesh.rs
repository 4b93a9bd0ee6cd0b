//! Builds a mesh graded towards the conduit, checks the mesh assumptions
//! and writes it as JSON.
//!
//! cargo run --example graded_mesh -- [nx] [ny] [ratio]

use karst_fem::mesh::{
    build_graded_mesh, check_mesh_assumptions, split_to_triangles, DomainGeometry, Grading, MeshDocument,
    DEFAULT_RATIO_THRESHOLD,
};

fn main() -> karst_fem::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nx = args.first().and_then(|s| s.parse().ok()).unwrap_or(8);
    let ny = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let ratio = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);

    let geometry = DomainGeometry::new(2.0, 1.0)?;
    let rect = build_graded_mesh(geometry, nx, ny, Grading::Geometric { ratio })?;
    let tri = split_to_triangles(&rect)?;

    for (name, mesh) in [("rectangles", &rect), ("triangles", &tri)] {
        let max_ar = mesh
            .elements()
            .iter()
            .map(|e| e.anisotropy.aspect_ratio())
            .fold(1.0, f64::max);
        let diag = check_mesh_assumptions(mesh, DEFAULT_RATIO_THRESHOLD);
        println!(
            "{name:>10}: {} elements, {} vertices, {} conduit edges, max aspect ratio {max_ar:.1}, assumptions {}",
            mesh.num_elements(),
            mesh.num_vertices(),
            mesh.conduit_edges().len(),
            if diag.passes() { "ok" } else { "flagged" }
        );
    }

    let path = std::env::temp_dir().join("karst_graded_mesh.json");
    MeshDocument::from_mesh(&rect).write(&path)?;
    let back = MeshDocument::read(&path)?.to_mesh()?;
    println!("wrote {} and read back {} elements", path.display(), back.num_elements());
    Ok(())
}
