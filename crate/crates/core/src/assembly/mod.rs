//! Discrete coupled system: matrix stiffness, conduit stiffness, the
//! symmetric exchange form on `y = 0`, the optional jump penalty, and the
//! load vector.

mod sparse;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::FeSpace;
use crate::error::{Error, Result};
use crate::mesh::{Point, Vector};
use crate::quadrature::{line_rule, quadrature};

pub use sparse::CsrMatrix;

pub type MatrixSource = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type ConduitSource = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Raw physical parameters of the aquifer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalInputs {
    pub permeability: f64,
    pub viscosity: f64,
    pub gravity: f64,
    pub conduit_width: f64,
}

impl PhysicalInputs {
    /// `k g / mu`.
    pub fn conductivity(&self) -> f64 {
        self.permeability * self.gravity / self.viscosity
    }

    /// `d^3 g / (12 mu)`.
    pub fn conduit_conductivity(&self) -> f64 {
        self.conduit_width.powi(3) * self.gravity / (12.0 * self.viscosity)
    }
}

/// Coefficients and sources of the coupled problem with homogeneous
/// Dirichlet data.
#[derive(Clone)]
pub struct ProblemData {
    pub conductivity: f64,
    pub conduit_conductivity: f64,
    pub exchange: f64,
    pub f_matrix: MatrixSource,
    pub f_conduit: ConduitSource,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("conductivity", &self.conductivity)
            .field("conduit_conductivity", &self.conduit_conductivity)
            .field("exchange", &self.exchange)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    pub fn new(
        conductivity: f64,
        conduit_conductivity: f64,
        exchange: f64,
        f_matrix: MatrixSource,
        f_conduit: ConduitSource,
    ) -> Result<Self> {
        let data = ProblemData {
            conductivity,
            conduit_conductivity,
            exchange,
            f_matrix,
            f_conduit,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn from_physical(
        inputs: &PhysicalInputs,
        exchange: f64,
        f_matrix: MatrixSource,
        f_conduit: ConduitSource,
    ) -> Result<Self> {
        for (name, v) in [
            ("permeability", inputs.permeability),
            ("viscosity", inputs.viscosity),
            ("gravity", inputs.gravity),
            ("conduit_width", inputs.conduit_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidData(format!("{name} must be positive, got {v}")));
            }
        }
        ProblemData::new(
            inputs.conductivity(),
            inputs.conduit_conductivity(),
            exchange,
            f_matrix,
            f_conduit,
        )
    }

    /// Zero sources.
    pub fn homogeneous(conductivity: f64, conduit_conductivity: f64, exchange: f64) -> Result<Self> {
        ProblemData::new(
            conductivity,
            conduit_conductivity,
            exchange,
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.conductivity > 0.0 && self.conductivity.is_finite()) {
            return Err(Error::InvalidData("conductivity must be positive".into()));
        }
        if !(self.conduit_conductivity > 0.0 && self.conduit_conductivity.is_finite()) {
            return Err(Error::InvalidData("conduit conductivity must be positive".into()));
        }
        if !(self.exchange >= 0.0 && self.exchange.is_finite()) {
            return Err(Error::InvalidData("exchange coefficient must be nonnegative".into()));
        }
        Ok(())
    }

    /// Same coefficients with both sources multiplied by `s`.
    pub fn scaled(&self, s: f64) -> ProblemData {
        let fm = self.f_matrix.clone();
        let fc = self.f_conduit.clone();
        ProblemData {
            f_matrix: Arc::new(move |p| s * fm(p)),
            f_conduit: Arc::new(move |x| s * fc(x)),
            ..self.clone()
        }
    }
}

/// Assembled system in global numbering together with the Dirichlet mask.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: Vec<bool>,
}

/// System on the free unknowns only.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each free unknown.
    pub free: Vec<usize>,
    pub full_dim: usize,
}

impl ReducedSystem {
    /// Global vector with zeros in constrained positions.
    pub fn extend(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_dim];
        for (&g, &v) in self.free.iter().zip(x) {
            full[g] = v;
        }
        full
    }
}

/// Basis values and physical gradients of element `k` at reference point `p`.
pub(crate) fn physical_basis(space: &FeSpace<'_>, k: usize, p: [f64; 2]) -> (Vec<f64>, Vec<Vector>) {
    let r = space.reference();
    let map = space.map(k);
    let values = r.values(p);
    let grads = r.gradients_at(p).into_iter().map(|g| map.gradient(g)).collect();
    (values, grads)
}

/// Basis values of element `k` at a physical point.
pub(crate) fn basis_at(space: &FeSpace<'_>, k: usize, x: &Point) -> Vec<f64> {
    space.reference().values(space.map(k).to_reference(x))
}

type Triplets = Vec<(usize, usize, f64)>;

fn outer(dofs: &[usize], coef: &[f64], scale: f64, out: &mut Triplets) {
    for (&i, &ci) in dofs.iter().zip(coef) {
        for (&j, &cj) in dofs.iter().zip(coef) {
            out.push((i, j, scale * ci * cj));
        }
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Jump vector of the basis on edge `e` at parameter `t`: dofs of both
/// sides with `+phi` on the plus side and `-phi` on the minus side.
pub(crate) fn edge_jump_basis(space: &FeSpace<'_>, e: usize, t: f64) -> (Vec<usize>, Vec<f64>) {
    let mesh = space.mesh();
    let edge = mesh.edge(e);
    let [a, b] = mesh.edge_points(e);
    let x = a + (b - a) * t;
    let mut dofs = space.element_dofs(edge.minus).to_vec();
    let mut coef: Vec<f64> = basis_at(space, edge.minus, &x).iter().map(|v| -v).collect();
    if let Some(p) = edge.plus {
        dofs.extend_from_slice(space.element_dofs(p));
        coef.extend(basis_at(space, p, &x));
    }
    (dofs, coef)
}

/// Assembles `a_h` (plus `J` when `penalty` is set) and `F`.
pub fn assemble_system(space: &FeSpace<'_>, data: &ProblemData, penalty: bool) -> Result<SparseSystem> {
    data.validate()?;
    let family = space.family();
    if !family.is_conforming() && !penalty {
        return Err(Error::PenaltyRequired(family.to_string()));
    }
    let mesh = space.mesh();
    let n = space.num_dofs();
    let deg = family.quadrature_degree();
    let stiff_rule = quadrature(family.shape(), deg)?;
    let load_rule = quadrature(family.shape(), deg + 4)?;
    let edge_rule = line_rule(deg)?;
    let conduit_rule = line_rule(deg + 4)?;

    let per_element: Vec<Result<(Triplets, Vec<(usize, f64)>)>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let map = space.map(k);
            let dofs = space.element_dofs(k);
            let nl = dofs.len();
            let mut local = vec![0.0; nl * nl];
            for (p, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
                let (_, g) = physical_basis(space, k, *p);
                let s = w * map.det * data.conductivity;
                for i in 0..nl {
                    for j in 0..nl {
                        local[i * nl + j] += s * g[i].dot(&g[j]);
                    }
                }
            }
            let mut load = vec![0.0; nl];
            for (p, w) in load_rule.points.iter().zip(&load_rule.weights) {
                let f = finite((data.f_matrix)(&map.to_physical(*p)), "matrix source")?;
                for (l, v) in load.iter_mut().zip(space.reference().values(*p)) {
                    *l += w * map.det * f * v;
                }
            }
            let mut trip = Vec::with_capacity(nl * nl);
            for i in 0..nl {
                for j in 0..nl {
                    trip.push((dofs[i], dofs[j], local[i * nl + j]));
                }
            }
            Ok((trip, dofs.iter().copied().zip(load).collect()))
        })
        .collect();

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for r in per_element {
        let (t, l) = r?;
        triplets.extend(t);
        for (i, v) in l {
            rhs[i] += v;
        }
    }

    // conduit stiffness, exchange form and conduit load
    let off = space.conduit_offset();
    for (i, &e) in mesh.conduit_edges().iter().enumerate() {
        let edge = mesh.edge(e);
        let upper = edge.plus.expect("conduit edges are interior");
        let (x0, x1) = space.conduit_edge_span(i);
        let len = x1 - x0;
        let cdofs: Vec<usize> = space.conduit_edge_dofs(i).iter().map(|d| off + d).collect();
        for (&s, &w) in edge_rule.points.iter().zip(&edge_rule.weights) {
            let d: Vec<f64> = space.conduit_derivatives(s);
            outer(&cdofs, &d, w * data.conduit_conductivity / len, &mut triplets);
            if data.exchange > 0.0 {
                let x = Point::new(x0 + s * len, 0.0);
                let mut dofs = space.element_dofs(edge.minus).to_vec();
                dofs.extend_from_slice(space.element_dofs(upper));
                dofs.extend_from_slice(&cdofs);
                let mut coef: Vec<f64> = basis_at(space, edge.minus, &x).iter().map(|v| 0.5 * v).collect();
                coef.extend(basis_at(space, upper, &x).iter().map(|v| 0.5 * v));
                coef.extend(space.conduit_values(s).iter().map(|v| -v));
                outer(&dofs, &coef, w * data.exchange * len, &mut triplets);
            }
        }
        for (&s, &w) in conduit_rule.points.iter().zip(&conduit_rule.weights) {
            let f = finite((data.f_conduit)(x0 + s * len), "conduit source")?;
            for (&g, v) in cdofs.iter().zip(space.conduit_values(s)) {
                rhs[g] += w * len * f * v;
            }
        }
    }

    if penalty {
        let pen: Vec<Triplets> = (0..mesh.num_edges())
            .into_par_iter()
            .map(|e| {
                let edge = mesh.edge(e);
                let weight = edge.h_e / (edge.h_min_e * edge.h_min_e);
                let mut t = Vec::new();
                for (&s, &w) in edge_rule.points.iter().zip(&edge_rule.weights) {
                    let (dofs, coef) = edge_jump_basis(space, e, s);
                    outer(&dofs, &coef, weight * w * edge.length, &mut t);
                }
                t
            })
            .collect();
        triplets.extend(pen.into_iter().flatten());
    }

    let matrix = CsrMatrix::from_triplets(n, triplets)?;
    if !matrix.is_finite() {
        return Err(Error::NonFinite("assembled matrix".into()));
    }
    Ok(SparseSystem {
        matrix,
        rhs,
        dirichlet: space.dirichlet_mask(),
    })
}

/// Removes constrained rows and columns; homogeneous data means no lifting.
pub fn apply_dirichlet(system: &SparseSystem) -> ReducedSystem {
    let free: Vec<usize> = system
        .dirichlet
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| i)
        .collect();
    ReducedSystem {
        matrix: system.matrix.restrict(&free),
        rhs: free.iter().map(|&i| system.rhs[i]).collect(),
        free,
        full_dim: system.rhs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Family;
    use crate::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};

    fn geom() -> DomainGeometry {
        DomainGeometry::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn physical_inputs_give_derived_coefficients() {
        let p = PhysicalInputs {
            permeability: 1e-10,
            viscosity: 1e-3,
            gravity: 9.81,
            conduit_width: 0.05,
        };
        let d = ProblemData::from_physical(&p, 1.0, Arc::new(|_| 0.0), Arc::new(|_| 0.0)).unwrap();
        assert!((d.conductivity / (1e-10 * 9.81 / 1e-3) - 1.0).abs() < 1e-14);
        assert!((d.conduit_conductivity / (0.05f64.powi(3) * 9.81 / 12e-3) - 1.0).abs() < 1e-14);
        assert!(ProblemData::homogeneous(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn decoupled_p1_rows_sum_to_zero() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 4, 2, Grading::Uniform).unwrap()).unwrap();
        let s = FeSpace::new(&m, Family::P1).unwrap();
        let d = ProblemData::homogeneous(2.0, 3.0, 0.0).unwrap();
        let sys = assemble_system(&s, &d, false).unwrap();
        assert!(sys.matrix.symmetry_error() < 1e-12);
        for i in 0..s.num_matrix_dofs() {
            if sys.dirichlet[i] {
                continue;
            }
            let (cols, vals) = sys.matrix.row(i);
            assert!(cols.iter().all(|&j| j < s.num_matrix_dofs()));
            assert!(vals.iter().sum::<f64>().abs() < 1e-12);
        }
        // conduit block: 1D stiffness D / h * [-1, 2, -1]
        let c = s.conduit_offset() + 1;
        assert!((sys.matrix.get(c, c) - 3.0 * 2.0 / 0.25).abs() < 1e-12);
        assert!((sys.matrix.get(c, c + 1) + 3.0 / 0.25).abs() < 1e-12);
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exchange_mass_matrix() {
        // one element per half, so the trace hat functions live on one edge
        let m = build_graded_mesh(DomainGeometry::new(2.0, 1.0).unwrap(), 1, 1, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let d = ProblemData::homogeneous(1.0, 1.0, 1.5).unwrap();
        let sys = assemble_system(&s, &d, false).unwrap();
        let off = s.conduit_offset();
        // conduit dofs see D stiffness plus the exchange mass
        let l = 2.0;
        assert!((sys.matrix.get(off, off) - (1.0 / l + 1.5 * l / 3.0)).abs() < 1e-13);
        assert!((sys.matrix.get(off, off + 1) - (-1.0 / l + 1.5 * l / 6.0)).abs() < 1e-13);
        assert!(sys.matrix.symmetry_error() < 1e-13);
    }

    #[test]
    fn nonconforming_needs_penalty() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 2, 2, Grading::Uniform).unwrap()).unwrap();
        let s = FeSpace::new(&m, Family::Cr1).unwrap();
        let d = ProblemData::homogeneous(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(assemble_system(&s, &d, false), Err(Error::PenaltyRequired(_))));
        let sys = assemble_system(&s, &d, true).unwrap();
        assert!(sys.matrix.symmetry_error() < 1e-12);
    }

    #[test]
    fn non_finite_source_is_reported() {
        let m = build_graded_mesh(geom(), 2, 2, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let d = ProblemData::new(1.0, 1.0, 0.0, Arc::new(|_| f64::NAN), Arc::new(|_| 0.0)).unwrap();
        assert!(matches!(assemble_system(&s, &d, false), Err(Error::NonFinite(_))));
    }

    #[test]
    fn elimination_counts_and_symmetry() {
        let m = build_graded_mesh(geom(), 4, 4, Grading::Uniform).unwrap();
        let s = FeSpace::new(&m, Family::Q1).unwrap();
        let d = ProblemData::homogeneous(1.0, 1.0, 1.0).unwrap();
        let r = apply_dirichlet(&assemble_system(&s, &d, false).unwrap());
        assert_eq!(r.free.len(), 3 * 7 + 3);
        assert!(r.matrix.symmetry_error() < 1e-12);
        let full = r.extend(&vec![1.0; r.free.len()]);
        assert_eq!(full.iter().sum::<f64>(), r.free.len() as f64);
    }

    #[test]
    fn fully_constrained_single_element() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 1, 1, Grading::Uniform).unwrap()).unwrap();
        let s = FeSpace::new(&m, Family::P1).unwrap();
        let d = ProblemData::homogeneous(1.0, 1.0, 1.0).unwrap();
        let r = apply_dirichlet(&assemble_system(&s, &d, false).unwrap());
        assert_eq!(r.matrix.dim(), 0);
        assert!(r.extend(&[]).iter().all(|&v| v == 0.0));
    }
}
