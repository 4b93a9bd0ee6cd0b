use serde::{Deserialize, Serialize};

use super::{Mesh, Shape};

/// Adjacent-size ratios above this value are flagged.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 4.0;

/// Mesh-regularity report for the "sizes must not change rapidly" and
/// "bounded valence" requirements on anisotropic meshes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDiagnostics {
    /// Largest number of elements sharing a vertex.
    pub max_valence: usize,
    pub valence_threshold: usize,
    /// Max of `h_{1,K'} / h_{1,K}` over elements sharing at least a vertex.
    pub max_ratio_h1: f64,
    /// Same for `h_{2,K}`.
    pub max_ratio_h2: f64,
    /// Bounding-box extents in x, compared over touching pairs.
    pub max_ratio_x: f64,
    /// Bounding-box extents in y, compared over touching pairs.
    pub max_ratio_y: f64,
    /// Max over edges and incident elements of `max(h_E / h_{E,K}, h_{E,K} / h_E)`.
    pub max_edge_height_discrepancy: f64,
    /// Same for `h_min,E` against `h_min,K`.
    pub max_edge_hmin_discrepancy: f64,
    pub ratio_threshold: f64,
    pub ratio_flagged: bool,
    pub valence_flagged: bool,
}

impl MeshDiagnostics {
    pub fn passes(&self) -> bool {
        !(self.ratio_flagged || self.valence_flagged)
    }
}

pub fn check_mesh_assumptions(mesh: &Mesh, ratio_threshold: f64) -> MeshDiagnostics {
    let valence_threshold = match mesh.shape() {
        Shape::Rectangle => 4,
        Shape::Triangle => 8,
    };
    let extents: Vec<(f64, f64)> = (0..mesh.num_elements())
        .map(|k| {
            let pts = mesh.element_points(k);
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in &pts {
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
            (x1 - x0, y1 - y0)
        })
        .collect();

    let mut max_valence = 0;
    let (mut r1, mut r2, mut rx, mut ry) = (1.0f64, 1.0f64, 1.0f64, 1.0f64);
    for v in 0..mesh.num_vertices() {
        let patch = mesh.vertex_patch(v);
        max_valence = max_valence.max(patch.len());
        for &a in patch {
            for &b in patch {
                let (ea, eb) = (&mesh.element(a).anisotropy, &mesh.element(b).anisotropy);
                r1 = r1.max(eb.h1 / ea.h1);
                r2 = r2.max(eb.h2 / ea.h2);
                rx = rx.max(extents[b].0 / extents[a].0);
                ry = ry.max(extents[b].1 / extents[a].1);
            }
        }
    }

    let (mut dh, mut dm) = (1.0f64, 1.0f64);
    for (id, e) in mesh.edges().iter().enumerate() {
        for k in e.elements() {
            let hk = mesh.edge_height(id, k);
            let hm = mesh.element(k).anisotropy.h_min();
            dh = dh.max(e.h_e / hk).max(hk / e.h_e);
            dm = dm.max(e.h_min_e / hm).max(hm / e.h_min_e);
        }
    }

    let ratio_flagged = [r1, r2, rx, ry].iter().any(|&r| r > ratio_threshold);
    MeshDiagnostics {
        max_valence,
        valence_threshold,
        max_ratio_h1: r1,
        max_ratio_h2: r2,
        max_ratio_x: rx,
        max_ratio_y: ry,
        max_edge_height_discrepancy: dh,
        max_edge_hmin_discrepancy: dm,
        ratio_threshold,
        ratio_flagged,
        valence_flagged: max_valence > valence_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};

    fn geom() -> DomainGeometry {
        DomainGeometry::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_mesh_is_regular() {
        let m = build_graded_mesh(geom(), 4, 4, Grading::Uniform).unwrap();
        let d = check_mesh_assumptions(&m, DEFAULT_RATIO_THRESHOLD);
        assert_eq!(d.max_ratio_h1, 1.0);
        assert_eq!(d.max_ratio_h2, 1.0);
        assert!(d.max_valence <= 4);
        assert!(d.passes());
    }

    #[test]
    fn geometric_layers_have_ratio_two() {
        let m = build_graded_mesh(geom(), 4, 3, Grading::Geometric { ratio: 0.5 }).unwrap();
        let d = check_mesh_assumptions(&m, DEFAULT_RATIO_THRESHOLD);
        assert!((d.max_ratio_y - 2.0).abs() < 1e-12);
        assert_eq!(d.max_ratio_x, 1.0);
    }

    #[test]
    fn split_mesh_valence() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 4, 4, Grading::Uniform).unwrap())
            .unwrap();
        let d = check_mesh_assumptions(&m, DEFAULT_RATIO_THRESHOLD);
        assert!(d.max_valence <= 6);
        assert!(d.passes());
    }

    #[test]
    fn strong_grading_is_flagged() {
        let m = build_graded_mesh(geom(), 2, 3, Grading::Geometric { ratio: 0.1 }).unwrap();
        assert!(check_mesh_assumptions(&m, DEFAULT_RATIO_THRESHOLD).ratio_flagged);
    }
}
