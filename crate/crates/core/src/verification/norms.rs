use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ManufacturedCase;
use crate::elements::FeFunction;
use crate::error::Result;
use crate::quadrature::{line_rule, quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `(sum |e|_1,K^2 + |e_c|_1^2 + J(e, e))^(1/2)`, `J` only for
    /// nonconforming families.
    Discrete,
    /// `|e|_1,m + |e_c|_1,c`, a sum of two norms.
    Conforming,
}

/// Squared error contributions per element, conduit edge and mesh edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDistribution {
    /// `|grad e|_K^2`.
    pub semi: Vec<f64>,
    /// `|e|_K^2`.
    pub l2: Vec<f64>,
    /// `|e_c|_1,E^2` per conduit edge.
    pub conduit: Vec<f64>,
    /// `h_E / h_min,E^2 |[e]|_E^2` per edge; zero for conforming families.
    pub jump: Vec<f64>,
    conforming: bool,
    conduit_of_edge: Vec<Option<usize>>,
}

impl ErrorDistribution {
    /// Error of `u_h` against `exact`, or the norm of `u_h` itself when
    /// `exact` is `None`.
    pub fn compute(u_h: &FeFunction<'_>, exact: Option<&ManufacturedCase>) -> Result<Self> {
        let space = u_h.space();
        let mesh = space.mesh();
        let family = space.family();
        let deg = family.quadrature_degree() + 4;
        let parts = (0..mesh.num_elements())
            .into_par_iter()
            .map(|k| {
                let el = mesh.element(k);
                let map = space.map(k);
                let rule = quadrature(el.shape, deg)?;
                let (mut semi, mut l2) = (0.0, 0.0);
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    let x = map.to_physical(*p);
                    let (mut g, mut v) = (-u_h.gradient_unchecked(k, *p), -u_h.value_unchecked(k, *p));
                    if let Some(c) = exact {
                        g += (c.grad_matrix)(&x, el.subdomain);
                        v += (c.u_matrix)(&x);
                    }
                    semi += w * map.det * g.norm_squared();
                    l2 += w * map.det * v * v;
                }
                Ok((semi, l2))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let (semi, l2) = parts.into_iter().unzip();

        let lrule = line_rule(deg)?;
        let mut conduit = Vec::with_capacity(mesh.conduit_edges().len());
        let mut conduit_of_edge = vec![None; mesh.num_edges()];
        for (i, &e) in mesh.conduit_edges().iter().enumerate() {
            conduit_of_edge[e] = Some(i);
            let (x0, x1) = space.conduit_edge_span(i);
            let len = x1 - x0;
            let mut s2 = 0.0;
            for (&s, &w) in lrule.points.iter().zip(&lrule.weights) {
                let x = x0 + s * len;
                let (mut v, mut d) = (-u_h.conduit_value(i, s), -u_h.conduit_slope(i, s));
                if let Some(c) = exact {
                    v += (c.u_conduit)(x);
                    d += (c.du_conduit)(x);
                }
                s2 += w * len * (v * v + d * d);
            }
            conduit.push(s2);
        }

        let conforming = family.is_conforming();
        let jump = if conforming {
            vec![0.0; mesh.num_edges()]
        } else {
            // the exact solution is continuous and vanishes on the boundary,
            // so [e] = -[u_h] on every edge
            (0..mesh.num_edges())
                .into_par_iter()
                .map(|e| {
                    let edge = mesh.edge(e);
                    let w = edge.h_e / (edge.h_min_e * edge.h_min_e);
                    w * lrule
                        .points
                        .iter()
                        .zip(&lrule.weights)
                        .map(|(&t, &q)| q * edge.length * u_h.edge_jump(e, t).powi(2))
                        .sum::<f64>()
                })
                .collect()
        };
        Ok(ErrorDistribution {
            semi,
            l2,
            conduit,
            jump,
            conforming,
            conduit_of_edge,
        })
    }

    pub fn matrix_seminorm(&self) -> f64 {
        self.semi.iter().sum::<f64>().sqrt()
    }

    pub fn conduit_norm(&self) -> f64 {
        self.conduit.iter().sum::<f64>().sqrt()
    }

    /// `J(e, e)^(1/2)`.
    pub fn jump_norm(&self) -> f64 {
        self.jump.iter().sum::<f64>().sqrt()
    }

    pub fn global(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Discrete => {
                let s: f64 = self.semi.iter().sum::<f64>()
                    + self.conduit.iter().sum::<f64>()
                    + self.jump.iter().sum::<f64>();
                s.sqrt()
            }
            NormKind::Conforming => self.matrix_seminorm() + self.conduit_norm(),
        }
    }

    /// `|e|_{h, omega}` for the element set `patch`: full `H^1` norms on its
    /// elements and conduit edges, plus `J` over its edges (nonconforming).
    pub fn local(&self, mesh: &crate::mesh::Mesh, patch: &[usize]) -> f64 {
        let mut edges = BTreeSet::new();
        let mut s = 0.0;
        for &k in patch {
            s += self.semi[k] + self.l2[k];
            edges.extend(mesh.element(k).edges.iter().copied());
        }
        for e in edges {
            if let Some(i) = self.conduit_of_edge[e] {
                s += self.conduit[i];
            }
            if !self.conforming {
                s += self.jump[e];
            }
        }
        s.sqrt()
    }
}

/// `|u - u_h|_h` or `|u - u_h|_V`.
pub fn error_norm(u_h: &FeFunction<'_>, case: &ManufacturedCase, kind: NormKind) -> Result<f64> {
    Ok(ErrorDistribution::compute(u_h, Some(case))?.global(kind))
}

/// `|u - u_h|_{h, omega}` over the element set `patch`.
pub fn local_error_norm(u_h: &FeFunction<'_>, case: &ManufacturedCase, patch: &[usize]) -> Result<f64> {
    Ok(ErrorDistribution::compute(u_h, Some(case))?.local(u_h.space().mesh(), patch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{FeSpace, Family};
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading, Point, Vector};
    use crate::verification::{CaseKind, CaseParams};
    use std::sync::Arc;

    fn geom() -> DomainGeometry {
        DomainGeometry::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn zero_error_and_zero_case() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 2, 2, Grading::Uniform).unwrap()).unwrap();
        let s = FeSpace::new(&m, Family::P1).unwrap();
        let z = FeFunction::zeros(&s);
        let c = ManufacturedCase::new(CaseKind::Zero, geom(), CaseParams::default()).unwrap();
        assert_eq!(error_norm(&z, &c, NormKind::Discrete).unwrap(), 0.0);
    }

    #[test]
    fn reproduced_conduit_quadratic_has_zero_error() {
        let m = build_graded_mesh(geom(), 3, 2, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q2).unwrap();
        let c = ManufacturedCase::new(CaseKind::ConduitQuadratic, geom(), CaseParams::default()).unwrap();
        let u = FeFunction::interpolate(&s, &|_| 0.0, &|x| x * (1.0 - x));
        assert!(error_norm(&u, &c, NormKind::Conforming).unwrap() < 1e-13);
    }

    #[test]
    fn constant_gradient_seminorm() {
        // e with grad e = (1, 0) on the matrix and e_c = 0: |e|_1,m = sqrt(2 L H)
        let m = build_graded_mesh(geom(), 2, 2, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let z = FeFunction::zeros(&s);
        let mut c = ManufacturedCase::new(CaseKind::Zero, geom(), CaseParams::default()).unwrap();
        c.grad_matrix = Arc::new(|_, _| Vector::new(1.0, 0.0));
        c.u_matrix = Arc::new(|p: &Point| p.x);
        let d = ErrorDistribution::compute(&z, Some(&c)).unwrap();
        assert!((d.matrix_seminorm() - 1.0f64.sqrt()).abs() < 1e-14);
        assert!((d.global(NormKind::Conforming) - (2.0 * 1.0 * 0.5f64).sqrt()).abs() < 1e-14);
        let all: Vec<usize> = (0..m.num_elements()).collect();
        // full H1 norm adds |x|^2 = 1/3 over the unit-area matrix domain
        assert!((d.local(&m, &all).powi(2) - (1.0 + 1.0 / 3.0)).abs() < 1e-13);
    }
}
