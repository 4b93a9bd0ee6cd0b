use rayon::prelude::*;

use super::map::ElementMap;
use super::{Family, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Shape, Vector};
use crate::quadrature::Rule2d;

/// Continuous piecewise `P1` (triangles) or `Q1` (rectangles) functions
/// vanishing on the boundary, stored by vertex values.
#[derive(Debug, Clone)]
pub struct ClementSpace<'m> {
    mesh: &'m Mesh,
    reference: &'static ReferenceElement,
    maps: Vec<ElementMap>,
    interior: Vec<usize>,
}

impl<'m> ClementSpace<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let family = match mesh.shape() {
            Shape::Triangle => Family::P1,
            Shape::Rectangle => Family::Q1,
        };
        let maps = (0..mesh.num_elements())
            .map(|k| ElementMap::new(mesh, k, family))
            .collect();
        let interior = (0..mesh.num_vertices())
            .filter(|&v| !mesh.is_boundary_vertex(v))
            .collect();
        ClementSpace {
            mesh,
            reference: ReferenceElement::get(family),
            maps,
            interior,
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn map(&self, k: usize) -> &ElementMap {
        &self.maps[k]
    }

    /// Interior vertices, one basis function `phi_j` each.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Vertex values of `phi_j` for the `j`-th interior node.
    pub fn basis_function(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.mesh.num_vertices()];
        v[self.interior[j]] = 1.0;
        v
    }

    pub fn value(&self, nodal: &[f64], k: usize, p: [f64; 2]) -> f64 {
        let verts = &self.mesh.element(k).vertices;
        self.reference
            .basis
            .iter()
            .zip(verts)
            .map(|(q, &v)| nodal[v] * q.eval(p[0], p[1]))
            .sum()
    }

    pub fn gradient(&self, nodal: &[f64], k: usize, p: [f64; 2]) -> Vector {
        let verts = &self.mesh.element(k).vertices;
        let mut g = [0.0; 2];
        for ([gx, gy], &v) in self.reference.gradients.iter().zip(verts) {
            g[0] += nodal[v] * gx.eval(p[0], p[1]);
            g[1] += nodal[v] * gy.eval(p[0], p[1]);
        }
        self.maps[k].gradient(g)
    }

    pub fn value_at(&self, nodal: &[f64], k: usize, x: &Point) -> f64 {
        self.value(nodal, k, self.maps[k].to_reference(x))
    }
}

/// `I_Cl v`: every interior vertex gets the mean of `v` over its vertex
/// patch; boundary vertices get zero. Integrals use `rule` on each element,
/// which may be a composite rule for piecewise-smooth `v`.
pub fn clement_interpolate(
    space: &ClementSpace<'_>,
    v: &(dyn Fn(usize, &Point) -> f64 + Sync),
    rule: &Rule2d,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let integrals: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let map = space.map(k);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * map.det * v(k, &map.to_physical(*p)))
                .sum()
        })
        .collect();
    if let Some(k) = integrals.iter().position(|x: &f64| !x.is_finite()) {
        return Err(Error::NonFinite(format!("patch integral on element {k}")));
    }
    let mut nodal = vec![0.0; mesh.num_vertices()];
    for &x in space.interior_nodes() {
        let patch = mesh.vertex_patch(x);
        let num: f64 = patch.iter().map(|&k| integrals[k]).sum();
        let den: f64 = patch.iter().map(|&k| mesh.element(k).area).sum();
        nodal[x] = num / den;
    }
    Ok(nodal)
}
