use std::collections::HashMap;

use rayon::prelude::*;

use super::map::ElementMap;
use super::reference::{DofTopology, ReferenceElement};
use super::Family;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::poly::Poly2;

/// Discrete space on a mesh: matrix unknowns of one family plus a
/// continuous 1D Lagrange space on the conduit.
///
/// Global system numbering puts the matrix dofs first and the conduit dofs
/// after them, starting at [`FeSpace::conduit_offset`].
#[derive(Debug, Clone)]
pub struct FeSpace<'m> {
    mesh: &'m Mesh,
    family: Family,
    reference: &'static ReferenceElement,
    maps: Vec<ElementMap>,
    element_dofs: Vec<Vec<usize>>,
    num_matrix: usize,
    matrix_boundary: Vec<bool>,
    conduit_degree: usize,
    conduit_basis: Vec<Poly2>,
    conduit_edge_dofs: Vec<Vec<usize>>,
    conduit_boundary: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DofKey {
    Vertex(usize),
    EdgeNode(usize, usize),
    EdgeMean(usize),
    Interior(usize, usize),
}

impl<'m> FeSpace<'m> {
    pub fn new(mesh: &'m Mesh, family: Family) -> Result<FeSpace<'m>> {
        if mesh.shape() != family.shape() {
            return Err(Error::IncompatibleFamily {
                family: family.to_string(),
                expected: format!("{:?}", family.shape()).to_lowercase(),
                found: format!("{:?}", mesh.shape()).to_lowercase(),
            });
        }
        let reference = ReferenceElement::get(family);
        let maps: Vec<ElementMap> = (0..mesh.num_elements())
            .into_par_iter()
            .map(|k| ElementMap::new(mesh, k, family))
            .collect();

        let k = family.degree();
        let mut index: HashMap<DofKey, usize> = HashMap::new();
        let mut matrix_boundary = Vec::new();
        let mut element_dofs = Vec::with_capacity(mesh.num_elements());
        for (el_id, (el, map)) in mesh.elements().iter().zip(&maps).enumerate() {
            let mut dofs = Vec::with_capacity(reference.len());
            for spec in &reference.dofs {
                let (key, on_boundary) = match spec.topology {
                    DofTopology::Vertex(r) => {
                        let v = el.vertices[map.vertex[r]];
                        (DofKey::Vertex(v), mesh.is_boundary_vertex(v))
                    }
                    DofTopology::EdgeNode { edge: r, index } => {
                        let e = el.edges[map.edge[r]];
                        let start = el.vertices[map.vertex[r]];
                        let pos = if mesh.edge(e).vertices[0] == start {
                            index
                        } else {
                            k - index
                        };
                        (DofKey::EdgeNode(e, pos), mesh.edge(e).is_boundary())
                    }
                    DofTopology::EdgeMean(r) => {
                        let e = el.edges[map.edge[r]];
                        (DofKey::EdgeMean(e), mesh.edge(e).is_boundary())
                    }
                    DofTopology::Interior(i) => (DofKey::Interior(el_id, i), false),
                };
                let id = *index.entry(key).or_insert_with(|| {
                    matrix_boundary.push(on_boundary);
                    matrix_boundary.len() - 1
                });
                dofs.push(id);
            }
            element_dofs.push(dofs);
        }

        let kc = family.conduit_degree();
        let n_edges = mesh.conduit_edges().len();
        let conduit_edge_dofs = (0..n_edges)
            .map(|e| (0..=kc).map(|j| e * kc + j).collect())
            .collect();
        let num_conduit = n_edges * kc + 1;
        let mut conduit_boundary = vec![false; num_conduit];
        conduit_boundary[0] = true;
        conduit_boundary[num_conduit - 1] = true;

        Ok(FeSpace {
            mesh,
            family,
            reference,
            maps,
            num_matrix: matrix_boundary.len(),
            element_dofs,
            matrix_boundary,
            conduit_degree: kc,
            conduit_basis: lagrange_1d(kc),
            conduit_edge_dofs,
            conduit_boundary,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn reference(&self) -> &'static ReferenceElement {
        self.reference
    }

    pub fn map(&self, k: usize) -> &ElementMap {
        &self.maps[k]
    }

    /// Global matrix dofs of element `k`, one per reference basis function.
    pub fn element_dofs(&self, k: usize) -> &[usize] {
        &self.element_dofs[k]
    }

    pub fn num_matrix_dofs(&self) -> usize {
        self.num_matrix
    }

    pub fn num_conduit_dofs(&self) -> usize {
        self.conduit_boundary.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_matrix + self.num_conduit_dofs()
    }

    /// First conduit unknown in the global numbering.
    pub fn conduit_offset(&self) -> usize {
        self.num_matrix
    }

    pub fn conduit_degree(&self) -> usize {
        self.conduit_degree
    }

    /// Conduit dofs on the `i`-th conduit edge (in `x` order), ordered from
    /// left to right.
    pub fn conduit_edge_dofs(&self, i: usize) -> &[usize] {
        &self.conduit_edge_dofs[i]
    }

    /// Values of the 1D conduit basis at parameter `s` in `[0, 1]`.
    pub fn conduit_values(&self, s: f64) -> Vec<f64> {
        self.conduit_basis.iter().map(|p| p.eval(s, 0.0)).collect()
    }

    /// `d/ds` of the 1D conduit basis.
    pub fn conduit_derivatives(&self, s: f64) -> Vec<f64> {
        self.conduit_basis.iter().map(|p| p.dx().eval(s, 0.0)).collect()
    }

    /// `d^2/ds^2` of the 1D conduit basis.
    pub fn conduit_second_derivatives(&self, s: f64) -> Vec<f64> {
        self.conduit_basis
            .iter()
            .map(|p| p.dx().dx().eval(s, 0.0))
            .collect()
    }

    /// Whether each global unknown is constrained by the homogeneous
    /// Dirichlet condition.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = self.matrix_boundary.clone();
        mask.extend_from_slice(&self.conduit_boundary);
        mask
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        self.dirichlet_mask()
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Conduit edge endpoints `(x_left, x_right)`.
    pub fn conduit_edge_span(&self, i: usize) -> (f64, f64) {
        let [a, b] = self.mesh.edge_points(self.mesh.conduit_edges()[i]);
        (a.x, b.x)
    }

    /// Coefficients of the canonical interpolant: every dof functional is
    /// applied to `fm` on an element carrying it, and conduit nodal values
    /// are taken from `fc`. Returned in global numbering.
    pub fn interpolate(
        &self,
        fm: &(dyn Fn(&Point) -> f64 + Sync),
        fc: &(dyn Fn(f64) -> f64 + Sync),
    ) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs()];
        let mut done = vec![false; self.num_matrix];
        let degree = 2 * self.family.degree() + 6;
        for k in 0..self.mesh.num_elements() {
            let map = &self.maps[k];
            for (spec, &g) in self.reference.dofs.iter().zip(&self.element_dofs[k]) {
                if done[g] {
                    continue;
                }
                let f = |p: [f64; 2]| fm(&map.to_physical(p));
                out[g] = spec.functional.apply_with(self.reference.shape, &f, degree);
                done[g] = true;
            }
        }
        let kc = self.conduit_degree;
        for i in 0..self.mesh.conduit_edges().len() {
            let (x0, x1) = self.conduit_edge_span(i);
            for (j, &g) in self.conduit_edge_dofs[i].iter().enumerate() {
                let s = j as f64 / kc as f64;
                out[self.num_matrix + g] = fc(x0 + s * (x1 - x0));
            }
        }
        out
    }
}

/// Lagrange basis on `[0, 1]` with equispaced nodes, as polynomials in `x`.
fn lagrange_1d(k: usize) -> Vec<Poly2> {
    let nodes: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
    (0..=k)
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(Poly2::constant(1.0), |acc, (_, &xm)| {
                    let factor = (Poly2::x() - Poly2::constant(xm)).scale(1.0 / (nodes[j] - xm));
                    acc * factor
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};

    fn unit() -> DomainGeometry {
        DomainGeometry::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn q1_free_dof_count() {
        let m = build_graded_mesh(unit(), 4, 4, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        // 3 x 7 interior matrix nodes plus 3 interior conduit nodes
        assert_eq!(s.free_dofs().len(), 21 + 3);
    }

    #[test]
    fn single_element_p1_is_fully_constrained() {
        let m = split_to_triangles(&build_graded_mesh(unit(), 1, 1, Grading::Uniform).unwrap())
            .unwrap();
        let s = FeSpace::new(&m, Family::P1).unwrap();
        assert!(s.free_dofs().is_empty());
    }

    #[test]
    fn rejects_wrong_shape() {
        let m = build_graded_mesh(unit(), 2, 2, Grading::Uniform).unwrap();
        assert!(matches!(
            FeSpace::new(&m, Family::P1),
            Err(Error::IncompatibleFamily { .. })
        ));
    }

    #[test]
    fn shared_edge_nodes_agree() {
        // higher-order interpolants of a smooth function are continuous, so
        // each shared node must get one global id reached from both sides
        let m = build_graded_mesh(unit(), 3, 2, Grading::Geometric { ratio: 0.5 }).unwrap();
        for fam in [Family::Q2, Family::Q3] {
            let s = FeSpace::new(&m, fam).unwrap();
            let nodes_per_axis = 3 * fam.degree() + 1;
            let rows = 2 * 2 * fam.degree() + 1;
            assert_eq!(s.num_matrix_dofs(), nodes_per_axis * rows);
        }
        let t = split_to_triangles(&m).unwrap();
        for fam in [Family::P2, Family::P3] {
            let s = FeSpace::new(&t, fam).unwrap();
            let k = fam.degree();
            let expect = t.num_vertices() + t.num_edges() * (k - 1) + t.num_elements() * (k - 1) * (k - 2) / 2;
            assert_eq!(s.num_matrix_dofs(), expect);
        }
    }
}
