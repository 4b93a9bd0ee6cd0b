use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::Family;
use crate::mesh::Shape;
use crate::poly::Poly2;
use crate::quadrature::{line_rule, quadrature};

/// Where a degree of freedom lives, in reference numbering. Reference
/// vertices are `(0,0), (1,0), (0,1)` (triangle) or `(0,0), (1,0), (1,1),
/// (0,1)` (square); reference edge `r` runs from vertex `r` to `r + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofTopology {
    Vertex(usize),
    /// `index`-th of the interior Lagrange nodes on the edge, counted from
    /// the edge's start vertex, starting at 1.
    EdgeNode { edge: usize, index: usize },
    /// Mean value over the edge.
    EdgeMean(usize),
    Interior(usize),
}

/// Linear functional on the reference element.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    Point([f64; 2]),
    EdgeMean(usize),
    /// `q -> int weight * q` over the reference element.
    Moment(Poly2),
}

#[derive(Debug, Clone)]
pub struct DofSpec {
    pub topology: DofTopology,
    pub functional: Functional,
}

/// Reference basis of one family together with its degrees of freedom.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub family: Family,
    pub shape: Shape,
    pub basis: Vec<Poly2>,
    /// `[d/dx, d/dy]` of each basis function.
    pub gradients: Vec<[Poly2; 2]>,
    /// `[xx, xy, yy]` second derivatives.
    pub hessians: Vec<[Poly2; 3]>,
    pub dofs: Vec<DofSpec>,
}

pub fn reference_vertices(shape: Shape) -> &'static [[f64; 2]] {
    match shape {
        Shape::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        Shape::Rectangle => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    }
}

/// Point at parameter `t` on reference edge `r`.
pub fn reference_edge_point(shape: Shape, r: usize, t: f64) -> [f64; 2] {
    let v = reference_vertices(shape);
    let (a, b) = (v[r], v[(r + 1) % v.len()]);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Whether a reference point lies in the closed reference element.
pub fn inside_reference(shape: Shape, p: [f64; 2], tol: f64) -> bool {
    let [x, y] = p;
    match shape {
        Shape::Triangle => x >= -tol && y >= -tol && x + y <= 1.0 + tol,
        Shape::Rectangle => x >= -tol && y >= -tol && x <= 1.0 + tol && y <= 1.0 + tol,
    }
}

impl Functional {
    /// Exact for polynomial `q`.
    pub fn apply(&self, shape: Shape, q: &Poly2) -> f64 {
        let degree = match shape {
            Shape::Triangle => q.total_degree(),
            Shape::Rectangle => q.max_variable_degree(),
        };
        self.apply_with(shape, &|p| q.eval(p[0], p[1]), degree + 1)
    }

    /// Applies the functional to a general function, integrating with rules
    /// exact for `degree` (plus the weight's degree for moments).
    pub fn apply_with(&self, shape: Shape, f: &dyn Fn([f64; 2]) -> f64, degree: usize) -> f64 {
        match self {
            Functional::Point(p) => f(*p),
            Functional::EdgeMean(r) => {
                let rule = line_rule(degree).expect("degree within the supported range");
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &w)| w * f(reference_edge_point(shape, *r, t)))
                    .sum()
            }
            Functional::Moment(weight) => {
                let wdeg = match shape {
                    Shape::Triangle => weight.total_degree(),
                    Shape::Rectangle => weight.max_variable_degree(),
                };
                let rule = quadrature(shape, degree + wdeg).expect("degree within the supported range");
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * weight.eval(p[0], p[1]) * f(*p))
                    .sum()
            }
        }
    }
}

/// Interior moment weight `3 (2x - 1)(2y - 1)` of the rectangular
/// nonconforming elements.
pub fn moment_weight() -> Poly2 {
    Poly2::from_terms(&[(3.0, 0, 0), (-6.0, 1, 0), (-6.0, 0, 1), (12.0, 1, 1)])
}

impl ReferenceElement {
    /// Cached reference element of a family.
    pub fn get(family: Family) -> &'static ReferenceElement {
        static CACHE: [OnceLock<ReferenceElement>; Family::ALL.len()] =
            [const { OnceLock::new() }; Family::ALL.len()];
        let idx = Family::ALL.iter().position(|&f| f == family).expect("listed");
        CACHE[idx].get_or_init(|| ReferenceElement::build(family))
    }

    fn build(family: Family) -> ReferenceElement {
        let shape = family.shape();
        let (dofs, basis) = match family {
            Family::P1 | Family::P2 | Family::P3 | Family::Q1 | Family::Q2 | Family::Q3 => {
                let dofs = lagrange_dofs(shape, family.degree());
                let monomials = monomial_set(shape, family.degree());
                let basis = dual_basis(shape, &dofs, &monomials);
                (dofs, basis)
            }
            Family::Cr1 => {
                let dofs: Vec<DofSpec> = (0..3)
                    .map(|r| DofSpec {
                        topology: DofTopology::EdgeMean(r),
                        functional: Functional::EdgeMean(r),
                    })
                    .collect();
                let basis = dual_basis(shape, &dofs, &[(0, 0), (1, 0), (0, 1)]);
                (dofs, basis)
            }
            Family::Cr2 => (rect_cr_dofs(false), cr2_basis()),
            Family::Cr3 => (rect_cr_dofs(true), cr3_basis()),
        };
        let gradients = basis.iter().map(|q| [q.dx(), q.dy()]).collect();
        let hessians = basis
            .iter()
            .map(|q| [q.dx().dx(), q.dx().dy(), q.dy().dy()])
            .collect();
        let el = ReferenceElement {
            family,
            shape,
            basis,
            gradients,
            hessians,
            dofs,
        };
        let err = el.unisolvence_error();
        assert!(err <= 1e-12, "{family:?} is not unisolvent: {err:e}");
        el
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// The matrix `theta_i(q_j)`.
    pub fn unisolvence_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.dofs[i].functional.apply(self.shape, &self.basis[j])
        })
    }

    /// `max |theta_i(q_j) - delta_ij|`.
    pub fn unisolvence_error(&self) -> f64 {
        let m = self.unisolvence_matrix();
        let n = self.len();
        (m - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        self.basis.iter().map(|q| q.eval(p[0], p[1])).collect()
    }

    /// Reference gradients at `p`.
    pub fn gradients_at(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        self.gradients
            .iter()
            .map(|[gx, gy]| [gx.eval(p[0], p[1]), gy.eval(p[0], p[1])])
            .collect()
    }

    /// Reference second derivatives `[xx, xy, yy]` at `p`.
    pub fn hessians_at(&self, p: [f64; 2]) -> Vec<[f64; 3]> {
        self.hessians
            .iter()
            .map(|h| [h[0].eval(p[0], p[1]), h[1].eval(p[0], p[1]), h[2].eval(p[0], p[1])])
            .collect()
    }
}

fn monomial_set(shape: Shape, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            if shape == Shape::Rectangle || i + j <= k {
                out.push((i, j));
            }
        }
    }
    out
}

fn lagrange_dofs(shape: Shape, k: usize) -> Vec<DofSpec> {
    let verts = reference_vertices(shape);
    let mut dofs: Vec<DofSpec> = verts
        .iter()
        .enumerate()
        .map(|(r, &p)| DofSpec {
            topology: DofTopology::Vertex(r),
            functional: Functional::Point(p),
        })
        .collect();
    for r in 0..verts.len() {
        for index in 1..k {
            dofs.push(DofSpec {
                topology: DofTopology::EdgeNode { edge: r, index },
                functional: Functional::Point(reference_edge_point(shape, r, index as f64 / k as f64)),
            });
        }
    }
    let h = 1.0 / k as f64;
    let mut interior = Vec::new();
    for j in 1..k {
        for i in 1..k {
            if shape == Shape::Rectangle || i + j < k {
                interior.push([i as f64 * h, j as f64 * h]);
            }
        }
    }
    for (idx, p) in interior.into_iter().enumerate() {
        dofs.push(DofSpec {
            topology: DofTopology::Interior(idx),
            functional: Functional::Point(p),
        });
    }
    dofs
}

/// Basis of the monomial span dual to the given functionals.
fn dual_basis(shape: Shape, dofs: &[DofSpec], monomials: &[(usize, usize)]) -> Vec<Poly2> {
    let n = dofs.len();
    assert_eq!(n, monomials.len());
    let mono: Vec<Poly2> = monomials.iter().map(|&(i, j)| Poly2::monomial(i, j, 1.0)).collect();
    let v = DMatrix::from_fn(n, n, |a, b| dofs[a].functional.apply(shape, &mono[b]));
    let c = v.try_inverse().expect("functionals are unisolvent");
    (0..n)
        .map(|j| {
            let terms: Vec<(f64, usize, usize)> = monomials
                .iter()
                .enumerate()
                .map(|(b, &(p, q))| (c[(b, j)], p, q))
                .collect();
            Poly2::from_terms(&terms)
        })
        .collect()
}

/// Edge means on `ybar = 0`, `ybar = 1`, `xbar = 0`, `xbar = 1` (reference
/// edges 0, 2, 3, 1), then the moment against `3 (2x - 1)(2y - 1)` and, for
/// the six-dof element, the mean.
fn rect_cr_dofs(with_mean: bool) -> Vec<DofSpec> {
    let mut dofs: Vec<DofSpec> = [0, 2, 3, 1]
        .iter()
        .map(|&r| DofSpec {
            topology: DofTopology::EdgeMean(r),
            functional: Functional::EdgeMean(r),
        })
        .collect();
    dofs.push(DofSpec {
        topology: DofTopology::Interior(0),
        functional: Functional::Moment(moment_weight()),
    });
    if with_mean {
        dofs.push(DofSpec {
            topology: DofTopology::Interior(1),
            functional: Functional::Moment(Poly2::constant(1.0)),
        });
    }
    dofs
}

/// Basis of `span{1, x, y, xy, y^2}`.
fn cr2_basis() -> Vec<Poly2> {
    vec![
        Poly2::from_terms(&[(1.0, 0, 0), (-4.0, 0, 1), (3.0, 0, 2)]),
        Poly2::from_terms(&[(-2.0, 0, 1), (3.0, 0, 2)]),
        Poly2::from_terms(&[(0.5, 0, 0), (-1.0, 1, 0), (3.0, 0, 1), (-3.0, 0, 2)]),
        Poly2::from_terms(&[(-0.5, 0, 0), (1.0, 1, 0), (3.0, 0, 1), (-3.0, 0, 2)]),
        moment_weight(),
    ]
}

/// Basis of `P2` on the square. The fifth function carries the factor 3 so
/// that it is dual to the moment functional.
fn cr3_basis() -> Vec<Poly2> {
    vec![
        Poly2::from_terms(&[(1.0, 0, 0), (-4.0, 0, 1), (3.0, 0, 2)]),
        Poly2::from_terms(&[(-2.0, 0, 1), (3.0, 0, 2)]),
        Poly2::from_terms(&[(1.0, 0, 0), (-4.0, 1, 0), (3.0, 2, 0)]),
        Poly2::from_terms(&[(-2.0, 1, 0), (3.0, 2, 0)]),
        moment_weight(),
        Poly2::from_terms(&[(-1.0, 0, 0), (6.0, 1, 0), (-6.0, 2, 0), (6.0, 0, 1), (-6.0, 0, 2)]),
    ]
}
