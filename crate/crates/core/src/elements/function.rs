use serde::{Deserialize, Serialize};

use super::reference::inside_reference;
use super::{FeSpace, Family};
use crate::error::{Error, Result};
use crate::mesh::{Point, Vector};

const REFERENCE_TOL: f64 = 1e-12;

/// A discrete function: matrix coefficients `u_h^m` and conduit
/// coefficients `u_h^c` over a space.
#[derive(Debug, Clone)]
pub struct FeFunction<'a> {
    space: &'a FeSpace<'a>,
    matrix: Vec<f64>,
    conduit: Vec<f64>,
}

impl<'a> FeFunction<'a> {
    pub fn zeros(space: &'a FeSpace<'a>) -> Self {
        FeFunction {
            space,
            matrix: vec![0.0; space.num_matrix_dofs()],
            conduit: vec![0.0; space.num_conduit_dofs()],
        }
    }

    /// Splits a vector in global numbering.
    pub fn from_global(space: &'a FeSpace<'a>, values: &[f64]) -> Result<Self> {
        if values.len() != space.num_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                space.num_dofs(),
                values.len()
            )));
        }
        let (m, c) = values.split_at(space.num_matrix_dofs());
        Ok(FeFunction {
            space,
            matrix: m.to_vec(),
            conduit: c.to_vec(),
        })
    }

    /// Canonical interpolant of `(fm, fc)`.
    pub fn interpolate(
        space: &'a FeSpace<'a>,
        fm: &(dyn Fn(&Point) -> f64 + Sync),
        fc: &(dyn Fn(f64) -> f64 + Sync),
    ) -> Self {
        let v = space.interpolate(fm, fc);
        FeFunction::from_global(space, &v).expect("sizes match by construction")
    }

    pub fn space(&self) -> &'a FeSpace<'a> {
        self.space
    }

    pub fn matrix_coefficients(&self) -> &[f64] {
        &self.matrix
    }

    pub fn conduit_coefficients(&self) -> &[f64] {
        &self.conduit
    }

    pub fn to_global(&self) -> Vec<f64> {
        let mut v = self.matrix.clone();
        v.extend_from_slice(&self.conduit);
        v
    }

    fn check(&self, p: [f64; 2]) -> Result<()> {
        if !inside_reference(self.space.reference().shape, p, REFERENCE_TOL) {
            return Err(Error::OutsideReference(p[0], p[1]));
        }
        Ok(())
    }

    /// Value on element `k` at reference point `p`.
    pub fn value(&self, k: usize, p: [f64; 2]) -> Result<f64> {
        self.check(p)?;
        Ok(self.value_unchecked(k, p))
    }

    /// Physical gradient on element `k` at reference point `p`.
    pub fn gradient(&self, k: usize, p: [f64; 2]) -> Result<Vector> {
        self.check(p)?;
        Ok(self.gradient_unchecked(k, p))
    }

    pub(crate) fn value_unchecked(&self, k: usize, p: [f64; 2]) -> f64 {
        let r = self.space.reference();
        r.basis
            .iter()
            .zip(self.space.element_dofs(k))
            .map(|(q, &g)| self.matrix[g] * q.eval(p[0], p[1]))
            .sum()
    }

    pub(crate) fn gradient_unchecked(&self, k: usize, p: [f64; 2]) -> Vector {
        let r = self.space.reference();
        let mut g = [0.0; 2];
        for ([gx, gy], &d) in r.gradients.iter().zip(self.space.element_dofs(k)) {
            let c = self.matrix[d];
            g[0] += c * gx.eval(p[0], p[1]);
            g[1] += c * gy.eval(p[0], p[1]);
        }
        self.space.map(k).gradient(g)
    }

    pub(crate) fn laplacian_unchecked(&self, k: usize, p: [f64; 2]) -> f64 {
        let r = self.space.reference();
        let mut h = [0.0; 3];
        for (hq, &d) in r.hessians.iter().zip(self.space.element_dofs(k)) {
            let c = self.matrix[d];
            for i in 0..3 {
                h[i] += c * hq[i].eval(p[0], p[1]);
            }
        }
        self.space.map(k).laplacian(h)
    }

    /// Value of the restriction to element `k` at a physical point.
    pub fn value_at(&self, k: usize, x: &Point) -> f64 {
        self.value_unchecked(k, self.space.map(k).to_reference(x))
    }

    pub fn gradient_at(&self, k: usize, x: &Point) -> Vector {
        self.gradient_unchecked(k, self.space.map(k).to_reference(x))
    }

    pub fn laplacian_at(&self, k: usize, x: &Point) -> f64 {
        self.laplacian_unchecked(k, self.space.map(k).to_reference(x))
    }

    /// Point on edge `e` at parameter `t`, measured from `vertices[0]`.
    pub fn edge_point(&self, e: usize, t: f64) -> Point {
        let [a, b] = self.space.mesh().edge_points(e);
        a + (b - a) * t
    }

    /// Jump `[u_h]_E` at parameter `t`: plus-side minus minus-side trace on
    /// interior edges, minus the inner trace on boundary edges.
    pub fn edge_jump(&self, e: usize, t: f64) -> f64 {
        let edge = self.space.mesh().edge(e);
        let x = self.edge_point(e, t);
        let inner = self.value_at(edge.minus, &x);
        match edge.plus {
            Some(p) => self.value_at(p, &x) - inner,
            None => -inner,
        }
    }

    /// Jump of the normal flux `[grad u_h . n_E]_E` (unit conductivity).
    pub fn normal_derivative_jump(&self, e: usize, t: f64) -> f64 {
        let edge = self.space.mesh().edge(e);
        let x = self.edge_point(e, t);
        let minus = self.gradient_at(edge.minus, &x).dot(&edge.normal);
        match edge.plus {
            Some(p) => self.gradient_at(p, &x).dot(&edge.normal) - minus,
            None => -minus,
        }
    }

    /// Conduit value on the `i`-th conduit edge at parameter `s`, left to right.
    pub fn conduit_value(&self, i: usize, s: f64) -> f64 {
        let dofs = self.space.conduit_edge_dofs(i);
        self.space
            .conduit_values(s)
            .iter()
            .zip(dofs)
            .map(|(v, &d)| v * self.conduit[d])
            .sum()
    }

    /// `d u_h^c / dx` on the `i`-th conduit edge.
    pub fn conduit_slope(&self, i: usize, s: f64) -> f64 {
        let (x0, x1) = self.space.conduit_edge_span(i);
        let dofs = self.space.conduit_edge_dofs(i);
        let ds: f64 = self
            .space
            .conduit_derivatives(s)
            .iter()
            .zip(dofs)
            .map(|(v, &d)| v * self.conduit[d])
            .sum();
        ds / (x1 - x0)
    }

    /// `d^2 u_h^c / dx^2` on the `i`-th conduit edge.
    pub fn conduit_curvature(&self, i: usize, s: f64) -> f64 {
        let (x0, x1) = self.space.conduit_edge_span(i);
        let dofs = self.space.conduit_edge_dofs(i);
        let d2: f64 = self
            .space
            .conduit_second_derivatives(s)
            .iter()
            .zip(dofs)
            .map(|(v, &d)| v * self.conduit[d])
            .sum();
        d2 / (x1 - x0).powi(2)
    }

    /// Matrix trace on the conduit: mean of the upper and lower traces.
    pub fn matrix_trace(&self, i: usize, s: f64) -> f64 {
        let e = self.space.mesh().conduit_edges()[i];
        let edge = self.space.mesh().edge(e);
        let (x0, x1) = self.space.conduit_edge_span(i);
        let x = Point::new(x0 + s * (x1 - x0), 0.0);
        let lower = self.value_at(edge.minus, &x);
        let upper = self.value_at(edge.plus.expect("conduit edges are interior"), &x);
        0.5 * (lower + upper)
    }

    pub fn to_document(&self) -> SolutionDocument {
        SolutionDocument {
            family: self.space.family(),
            num_elements: self.space.mesh().num_elements(),
            matrix: self.matrix.clone(),
            conduit: self.conduit.clone(),
        }
    }
}

/// JSON form of a discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub family: Family,
    pub num_elements: usize,
    pub matrix: Vec<f64>,
    pub conduit: Vec<f64>,
}

impl SolutionDocument {
    /// Rebinds stored coefficients to a space on the same mesh.
    pub fn to_function<'a>(&self, space: &'a FeSpace<'a>) -> Result<FeFunction<'a>> {
        if space.family() != self.family || space.mesh().num_elements() != self.num_elements {
            return Err(Error::DimensionMismatch(
                "solution was computed on a different space".into(),
            ));
        }
        let mut v = self.matrix.clone();
        v.extend_from_slice(&self.conduit);
        FeFunction::from_global(space, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};

    fn mesh() -> crate::mesh::Mesh {
        build_graded_mesh(DomainGeometry::new(1.0, 1.0).unwrap(), 3, 2, Grading::Geometric { ratio: 0.5 })
            .unwrap()
    }

    #[test]
    fn zero_function() {
        let m = mesh();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let f = FeFunction::zeros(&s);
        assert_eq!(f.value(0, [0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(f.gradient(0, [0.3, 0.4]).unwrap(), Vector::zeros());
        assert!(matches!(f.value(0, [1.5, 0.0]), Err(Error::OutsideReference(..))));
    }

    #[test]
    fn p1_interpolant_of_x() {
        let t = split_to_triangles(&mesh()).unwrap();
        let s = FeSpace::new(&t, Family::P1).unwrap();
        let f = FeFunction::interpolate(&s, &|p| p.x, &|x| x);
        for k in 0..t.num_elements() {
            let g = f.gradient(k, [0.2, 0.2]).unwrap();
            assert!((g - Vector::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn cr2_first_basis_gradient() {
        // a unit square element keeps the identity map
        let m = build_graded_mesh(DomainGeometry::new(1.0, 1.0).unwrap(), 1, 1, Grading::Uniform)
            .unwrap();
        let s = FeSpace::new(&m, Family::Cr2).unwrap();
        let mut v = vec![0.0; s.num_dofs()];
        v[s.element_dofs(0)[0]] = 1.0;
        let f = FeFunction::from_global(&s, &v).unwrap();
        let g = f.gradient(0, [0.5, 0.5]).unwrap();
        assert!((g - Vector::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn conforming_jumps_vanish() {
        let m = mesh();
        for fam in [Family::Q1, Family::Q2, Family::Q3] {
            let s = FeSpace::new(&m, fam).unwrap();
            let f = FeFunction::interpolate(&s, &|p| (3.0 * p.x).sin() * (1.0 + p.y * p.y), &|x| x);
            for (e, edge) in m.edges().iter().enumerate() {
                if edge.is_boundary() {
                    continue;
                }
                for t in [0.1, 0.5, 0.77] {
                    assert!(f.edge_jump(e, t).abs() < 1e-13, "{fam:?} edge {e}");
                }
            }
        }
    }

    #[test]
    fn boundary_jump_is_minus_trace() {
        let m = mesh();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let v = vec![2.5; s.num_dofs()];
        let f = FeFunction::from_global(&s, &v).unwrap();
        let e = m.edges().iter().position(|e| e.is_boundary()).unwrap();
        assert!((f.edge_jump(e, 0.3) + 2.5).abs() < 1e-14);
    }
}
