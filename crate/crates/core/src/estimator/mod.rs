//! Residual a posteriori error estimator on anisotropic meshes.
//!
//! `Theta_K^2` collects, for element `K`:
//!
//! * `w_K |r_K|^2` with `r_K = f_K + div(K grad u_h)` and projected data;
//! * flux jumps `[K grad u_h . n]` over interior matrix edges of `K`;
//! * on conduit edges of `K`, the conduit residual
//!   `r_E = f_E + (D u_c')' + alpha (mean trace - u_c)` and the interface
//!   flux residual `[K d_y u_h] - alpha (mean trace - u_c)`;
//! * in nonconforming modes, jumps `[u_h]` over every edge of `K`.
//!
//! Anisotropic weights use `h_min,K`, `h_E`; isotropic weights use the
//! element and edge diameters. The exchange term never appears inside
//! `r_K` because no element straddles `y = 0`.

mod alignment;
mod report;

use std::collections::HashMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::ProblemData;
use crate::elements::{ElementMap, FeFunction, Family};
use crate::error::{Error, Result};
use crate::mesh::{EdgeLocation, Mesh, Point, Shape};
use crate::quadrature::{line_rule, quadrature};

pub use alignment::alignment_measure;
pub use report::{AlignmentValue, EstimatorReport, LocalIndicator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    AnisotropicConforming,
    AnisotropicNonconforming,
    IsotropicConforming,
    IsotropicNonconforming,
}

impl EstimatorMode {
    pub const ALL: [EstimatorMode; 4] = [
        EstimatorMode::AnisotropicConforming,
        EstimatorMode::AnisotropicNonconforming,
        EstimatorMode::IsotropicConforming,
        EstimatorMode::IsotropicNonconforming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::AnisotropicConforming => "anisotropic-conforming",
            EstimatorMode::AnisotropicNonconforming => "anisotropic-nonconforming",
            EstimatorMode::IsotropicConforming => "isotropic-conforming",
            EstimatorMode::IsotropicNonconforming => "isotropic-nonconforming",
        }
    }

    pub fn is_anisotropic(self) -> bool {
        matches!(
            self,
            EstimatorMode::AnisotropicConforming | EstimatorMode::AnisotropicNonconforming
        )
    }

    pub fn is_nonconforming(self) -> bool {
        matches!(
            self,
            EstimatorMode::AnisotropicNonconforming | EstimatorMode::IsotropicNonconforming
        )
    }

    /// Anisotropic mode matching the family's conformity.
    pub fn for_family(family: Family) -> Self {
        if family.is_conforming() {
            EstimatorMode::AnisotropicConforming
        } else {
            EstimatorMode::AnisotropicNonconforming
        }
    }
}

impl FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorMode::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

/// Weights of the four kinds of terms for one element/edge pair.
#[derive(Debug, Clone, Copy)]
struct Weights {
    volume: f64,
    edge: f64,
    jump: f64,
}

fn weights(mesh: &Mesh, k: usize, e: Option<usize>, mode: EstimatorMode) -> Weights {
    let el = mesh.element(k);
    if mode.is_anisotropic() {
        let hmin2 = el.anisotropy.h_min().powi(2);
        let h_e = e.map(|e| mesh.edge(e).h_e).unwrap_or(1.0);
        Weights {
            volume: hmin2,
            edge: hmin2 / h_e,
            jump: h_e / hmin2,
        }
    } else {
        let len = e.map(|e| mesh.edge(e).length).unwrap_or(1.0);
        Weights {
            volume: el.diameter.powi(2),
            edge: len,
            jump: 1.0 / len,
        }
    }
}

/// `P1` or `Q1` map and monomials used for the matrix data projection.
fn projection_map(mesh: &Mesh, k: usize) -> ElementMap {
    let fam = match mesh.element(k).shape {
        Shape::Triangle => Family::P1,
        Shape::Rectangle => Family::Q1,
    };
    ElementMap::new(mesh, k, fam)
}

fn projection_monomials(shape: Shape, p: [f64; 2]) -> Vec<f64> {
    match shape {
        Shape::Triangle => vec![1.0, p[0], p[1]],
        Shape::Rectangle => vec![1.0, p[0], p[1], p[0] * p[1]],
    }
}

/// Projected sources: `f^m_K` in `P1`/`Q1` per element, `f^c_E` constant
/// per conduit edge.
#[derive(Debug, Clone)]
pub struct ProjectedData {
    maps: Vec<ElementMap>,
    shapes: Vec<Shape>,
    matrix: Vec<Vec<f64>>,
    conduit: Vec<f64>,
}

impl ProjectedData {
    /// `f^m_K` at a physical point of element `k`.
    pub fn matrix_value(&self, k: usize, x: &Point) -> f64 {
        let p = self.maps[k].to_reference(x);
        projection_monomials(self.shapes[k], p)
            .iter()
            .zip(&self.matrix[k])
            .map(|(m, c)| m * c)
            .sum()
    }

    /// `f^c_E` on the `i`-th conduit edge.
    pub fn conduit_value(&self, i: usize) -> f64 {
        self.conduit[i]
    }
}

/// Local `L^2` projections of the sources, integrated with a rule of
/// degree `degree`.
pub fn project_data(data: &ProblemData, mesh: &Mesh, degree: usize) -> Result<ProjectedData> {
    let results: Vec<Result<(ElementMap, Vec<f64>)>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let shape = mesh.element(k).shape;
            let rule = quadrature(shape, degree)?;
            let map = projection_map(mesh, k);
            let n = if shape == Shape::Triangle { 3 } else { 4 };
            let mut mass = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let m = projection_monomials(shape, *p);
                let f = (data.f_matrix)(&map.to_physical(*p));
                if !f.is_finite() {
                    return Err(Error::NonFinite(format!("matrix source on element {k}")));
                }
                for i in 0..n {
                    rhs[i] += w * f * m[i];
                    for j in 0..n {
                        mass[(i, j)] += w * m[i] * m[j];
                    }
                }
            }
            let c = mass
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Singular(format!("projection mass matrix of element {k}")))?;
            Ok((map, c.iter().copied().collect()))
        })
        .collect();
    let mut maps = Vec::with_capacity(results.len());
    let mut matrix = Vec::with_capacity(results.len());
    for r in results {
        let (m, c) = r?;
        maps.push(m);
        matrix.push(c);
    }
    let rule = line_rule(degree)?;
    let mut conduit = Vec::with_capacity(mesh.conduit_edges().len());
    for &e in mesh.conduit_edges() {
        let [a, b] = mesh.edge_points(e);
        let mean: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| w * (data.f_conduit)(a.x + s * (b.x - a.x)))
            .sum();
        if !mean.is_finite() {
            return Err(Error::NonFinite(format!("conduit source on edge {e}")));
        }
        conduit.push(mean);
    }
    Ok(ProjectedData {
        maps,
        shapes: mesh.elements().iter().map(|el| el.shape).collect(),
        matrix,
        conduit,
    })
}

/// `r_K = f^m_K + K lap u_h` at a physical point of element `k`.
pub fn element_residual(
    u_h: &FeFunction<'_>,
    k: usize,
    projected: &ProjectedData,
    data: &ProblemData,
    x: &Point,
) -> f64 {
    projected.matrix_value(k, x) + data.conductivity * u_h.laplacian_at(k, x)
}

/// `[K grad u_h . n_E]` at parameter `t` of an interior matrix edge.
pub fn flux_jump(u_h: &FeFunction<'_>, e: usize, data: &ProblemData, t: f64) -> Result<f64> {
    if u_h.space().mesh().edge(e).location != EdgeLocation::InteriorMatrix {
        return Err(Error::NotInteriorMatrixEdge(e));
    }
    Ok(data.conductivity * u_h.normal_derivative_jump(e, t))
}

/// `r_E = f^c_E + D u_c'' + alpha (mean trace - u_c)` on the `i`-th conduit
/// edge at parameter `s`.
pub fn conduit_residual(
    u_h: &FeFunction<'_>,
    i: usize,
    projected: &ProjectedData,
    data: &ProblemData,
    s: f64,
) -> f64 {
    projected.conduit_value(i)
        + data.conduit_conductivity * u_h.conduit_curvature(i, s)
        + data.exchange * (u_h.matrix_trace(i, s) - u_h.conduit_value(i, s))
}

/// `[K d_y u_h] - alpha (mean trace - u_c)` on the `i`-th conduit edge.
pub fn interface_flux_residual(u_h: &FeFunction<'_>, i: usize, data: &ProblemData, s: f64) -> f64 {
    let e = u_h.space().mesh().conduit_edges()[i];
    data.conductivity * u_h.normal_derivative_jump(e, s)
        - data.exchange * (u_h.matrix_trace(i, s) - u_h.conduit_value(i, s))
}

/// Shared state for indicator evaluation.
pub struct EstimatorContext<'a> {
    pub u_h: &'a FeFunction<'a>,
    pub data: &'a ProblemData,
    pub projected: ProjectedData,
    pub mode: EstimatorMode,
    conduit_index: HashMap<usize, usize>,
    element_degree: usize,
    edge_degree: usize,
}

impl<'a> EstimatorContext<'a> {
    pub fn new(u_h: &'a FeFunction<'a>, data: &'a ProblemData, mode: EstimatorMode) -> Result<Self> {
        data.validate()?;
        let family = u_h.space().family();
        let mesh = u_h.space().mesh();
        let element_degree = family.quadrature_degree() + 2;
        Ok(EstimatorContext {
            u_h,
            data,
            projected: project_data(data, mesh, family.quadrature_degree() + 4)?,
            mode,
            conduit_index: mesh
                .conduit_edges()
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, i))
                .collect(),
            element_degree,
            edge_degree: family.quadrature_degree(),
        })
    }

    fn mesh(&self) -> &'a Mesh {
        self.u_h.space().mesh()
    }

    fn element_norm2(&self, k: usize, f: &dyn Fn(&Point) -> f64) -> Result<f64> {
        let map = self.u_h.space().map(k);
        let rule = quadrature(self.mesh().element(k).shape, self.element_degree)?;
        Ok(rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * map.det * f(&map.to_physical(*p)).powi(2))
            .sum())
    }

    fn edge_norm2(&self, e: usize, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let rule = line_rule(self.edge_degree)?;
        let len = self.mesh().edge(e).length;
        Ok(rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * len * f(t).powi(2))
            .sum())
    }

    /// `Theta_K` and its squared breakdown.
    pub fn local_indicator(&self, k: usize) -> Result<LocalIndicator> {
        let mesh = self.mesh();
        let el = mesh.element(k);
        let u = self.u_h;
        let w = weights(mesh, k, None, self.mode);
        let volume = w.volume
            * self.element_norm2(k, &|x| element_residual(u, k, &self.projected, self.data, x))?;
        let mut flux = 0.0;
        let mut conduit = 0.0;
        let mut nonconformity = 0.0;
        for &e in &el.edges {
            let edge = mesh.edge(e);
            let w = weights(mesh, k, Some(e), self.mode);
            match edge.location {
                EdgeLocation::InteriorMatrix => {
                    flux += w.edge
                        * self.edge_norm2(e, &|t| self.data.conductivity * u.normal_derivative_jump(e, t))?;
                }
                EdgeLocation::Conduit => {
                    let i = self.conduit_index[&e];
                    conduit += w.edge
                        * self.edge_norm2(e, &|s| conduit_residual(u, i, &self.projected, self.data, s))?;
                    flux += w.edge * self.edge_norm2(e, &|s| interface_flux_residual(u, i, self.data, s))?;
                }
                EdgeLocation::Boundary => {}
            }
            if self.mode.is_nonconforming() {
                nonconformity += w.jump * self.edge_norm2(e, &|t| u.edge_jump(e, t))?;
            }
        }
        Ok(LocalIndicator::new(volume, flux, conduit, nonconformity))
    }

    /// `zeta_K^2 = w_K |f^m - f^m_K|^2 + sum over conduit edges w_E |f^c - f^c_E|^2`.
    pub fn approximation_term(&self, k: usize) -> Result<f64> {
        let mesh = self.mesh();
        let w = weights(mesh, k, None, self.mode);
        let mut z = w.volume
            * self.element_norm2(k, &|x| (self.data.f_matrix)(x) - self.projected.matrix_value(k, x))?;
        for &e in &mesh.element(k).edges {
            if let Some(&i) = self.conduit_index.get(&e) {
                let [a, b] = mesh.edge_points(e);
                let fe = self.projected.conduit_value(i);
                let w = weights(mesh, k, Some(e), self.mode);
                z += w.edge
                    * self.edge_norm2(e, &|s| (self.data.f_conduit)(a.x + s * (b.x - a.x)) - fe)?;
            }
        }
        Ok(z.sqrt())
    }
}

/// Indicator for one element.
pub fn local_indicator(
    u_h: &FeFunction<'_>,
    data: &ProblemData,
    k: usize,
    mode: EstimatorMode,
) -> Result<LocalIndicator> {
    EstimatorContext::new(u_h, data, mode)?.local_indicator(k)
}

/// `zeta_K` for every element and the global `zeta`.
pub fn approximation_terms(
    u_h: &FeFunction<'_>,
    data: &ProblemData,
    mode: EstimatorMode,
) -> Result<(Vec<f64>, f64)> {
    let ctx = EstimatorContext::new(u_h, data, mode)?;
    let z = (0..u_h.space().mesh().num_elements())
        .into_par_iter()
        .map(|k| ctx.approximation_term(k))
        .collect::<Result<Vec<f64>>>()?;
    let g = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((z, g))
}

/// Full report for `u_h`.
pub fn estimate(u_h: &FeFunction<'_>, data: &ProblemData, mode: EstimatorMode) -> Result<EstimatorReport> {
    let ctx = EstimatorContext::new(u_h, data, mode)?;
    let n = u_h.space().mesh().num_elements();
    let rows = (0..n)
        .into_par_iter()
        .map(|k| Ok((ctx.local_indicator(k)?, ctx.approximation_term(k)?)))
        .collect::<Result<Vec<(LocalIndicator, f64)>>>()?;
    let (local, zeta): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(EstimatorReport::new(mode, u_h.space().family(), local, zeta))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::elements::FeSpace;
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};
    use crate::solver::{solve_problem, SolverConfig};

    fn rect(nx: usize, ny: usize) -> Mesh {
        build_graded_mesh(DomainGeometry::new(1.0, 1.0).unwrap(), nx, ny, Grading::Uniform).unwrap()
    }

    #[test]
    fn modes_parse() {
        for m in EstimatorMode::ALL {
            assert_eq!(m.name().parse::<EstimatorMode>().unwrap(), m);
        }
        assert!(matches!("fancy".parse::<EstimatorMode>(), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn projection_reproduces_linear_data() {
        let m = split_to_triangles(&rect(3, 2)).unwrap();
        let d = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|p| 1.0 + 2.0 * p.x - p.y), Arc::new(|x| x))
            .unwrap();
        let pd = project_data(&d, &m, 6).unwrap();
        for k in 0..m.num_elements() {
            let c = m.centroid(k);
            assert!((pd.matrix_value(k, &c) - (1.0 + 2.0 * c.x - c.y)).abs() < 1e-13);
        }
        // f^c(x) = x on [0, 1/3]
        assert!((pd.conduit_value(0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn q1_residual_of_xy_is_data() {
        let m = rect(2, 2);
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let u = FeFunction::interpolate(&s, &|p| p.x * p.y, &|_| 0.0);
        let d = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|_| 3.0), Arc::new(|_| 0.0)).unwrap();
        let pd = project_data(&d, &m, 4).unwrap();
        for k in 0..m.num_elements() {
            assert!((element_residual(&u, k, &pd, &d, &m.centroid(k)) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constructed_kink_has_jump_two() {
        let m = rect(1, 2);
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        // |y - 1/2| on the upper half: kink at the interior edge y = 1/2
        let u = FeFunction::interpolate(&s, &|p| (p.y - 0.5).abs(), &|_| 0.0);
        let d = ProblemData::homogeneous(1.0, 1.0, 0.0).unwrap();
        let e = (0..m.num_edges())
            .find(|&e| {
                let [a, b] = m.edge_points(e);
                a.y == 0.5 && b.y == 0.5
            })
            .unwrap();
        assert_eq!(m.edge(e).normal, crate::mesh::Vector::new(0.0, 1.0));
        assert!((flux_jump(&u, e, &d, 0.3).unwrap() - 2.0).abs() < 1e-12);
        let c = m.conduit_edges()[0];
        assert!(matches!(flux_jump(&u, c, &d, 0.3), Err(Error::NotInteriorMatrixEdge(_))));
    }

    #[test]
    fn conduit_residual_examples() {
        let m = rect(2, 1);
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        // u^m(x, 0) = x, u^c = 0, alpha = 2, f^c = 0
        let u = FeFunction::interpolate(&s, &|p| p.x, &|_| 0.0);
        let d = ProblemData::homogeneous(1.0, 1.0, 2.0).unwrap();
        let pd = project_data(&d, &m, 4).unwrap();
        let (x0, x1) = s.conduit_edge_span(1);
        let r = conduit_residual(&u, 1, &pd, &d, 0.25);
        assert!((r - 2.0 * (x0 + 0.25 * (x1 - x0))).abs() < 1e-13);
        let z = FeFunction::zeros(&s);
        let d1 = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|_| 0.0), Arc::new(|_| 1.0)).unwrap();
        let pd1 = project_data(&d1, &m, 4).unwrap();
        assert!((conduit_residual(&z, 0, &pd1, &d1, 0.7) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_term_weight() {
        // one element per half, r_K = 1, zero solution: Theta_K^2 = h_min^2 |K| + edge terms
        let m = rect(1, 1);
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let z = FeFunction::zeros(&s);
        let d = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|_| 1.0), Arc::new(|_| 0.0)).unwrap();
        let li = local_indicator(&z, &d, 0, EstimatorMode::AnisotropicConforming).unwrap();
        assert!((li.volume - 1.0).abs() < 1e-14);
        assert_eq!(li.flux, 0.0);
        assert_eq!(li.conduit, 0.0);
        assert_eq!(li.nonconformity, 0.0);
    }

    #[test]
    fn oscillation_of_linear_conduit_source() {
        // f^c(x) = x on a single conduit edge [0, h]: |f - f_E|^2 = h^3 / 12
        let h = 0.5;
        let m = build_graded_mesh(DomainGeometry::new(h, 1.0).unwrap(), 1, 1, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let z = FeFunction::zeros(&s);
        let d = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|_| 0.0), Arc::new(|x| x)).unwrap();
        let (zk, _) = approximation_terms(&z, &d, EstimatorMode::AnisotropicConforming).unwrap();
        let k = m.edge(m.conduit_edges()[0]).minus;
        let el = m.element(k);
        let w = el.anisotropy.h_min().powi(2) / m.edge(m.conduit_edges()[0]).h_e;
        assert!((zk[k].powi(2) - w * h.powi(3) / 12.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_problem_has_zero_estimator() {
        let m = split_to_triangles(&rect(3, 2)).unwrap();
        for fam in [Family::P1, Family::Cr1] {
            let s = FeSpace::new(&m, fam).unwrap();
            let d = ProblemData::homogeneous(1.0, 1.0, 1.0).unwrap();
            let (u, _) = solve_problem(&s, &d, &SolverConfig::default()).unwrap();
            let r = estimate(&u, &d, EstimatorMode::for_family(fam)).unwrap();
            assert_eq!(r.theta, 0.0);
            assert_eq!(r.zeta, 0.0);
        }
    }
}
