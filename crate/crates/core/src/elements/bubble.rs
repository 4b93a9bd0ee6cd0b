use nalgebra::Matrix2;

use super::map::ElementMap;
use super::Family;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Shape, Vector};
use crate::poly::Poly2;

/// `27 x y (1 - x - y)` or `16 x (1 - x) y (1 - y)` on the reference element.
pub fn reference_element_bubble(shape: Shape) -> Poly2 {
    let x = Poly2::x();
    let y = Poly2::y();
    let one = Poly2::constant(1.0);
    match shape {
        Shape::Triangle => (&x * &y).scale(27.0) * (one - x - y),
        Shape::Rectangle => {
            let bx = &x * &(&one + &x.scale(-1.0));
            let by = &y * &(&one + &y.scale(-1.0));
            (bx * by).scale(16.0)
        }
    }
}

/// Edge bubble for the reference edge on `ybar = 0`:
/// `4 x (1 - x - y)` or `4 x (1 - x)(1 - y)`.
pub fn reference_edge_bubble(shape: Shape) -> Poly2 {
    let x = Poly2::x();
    let y = Poly2::y();
    let one = Poly2::constant(1.0);
    match shape {
        Shape::Triangle => x.scale(4.0) * (one - Poly2::x() - y),
        Shape::Rectangle => {
            let bx = &x * &(&one + &x.scale(-1.0));
            (bx * (one - y)).scale(4.0)
        }
    }
}

/// Affine map of element `K` that sends the reference edge on `ybar = 0`
/// onto edge `E`, starting at `E`'s first vertex. Both elements of `W_E`
/// use the same edge parametrisation, so edge bubbles and extensions are
/// continuous across `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub element: usize,
    pub edge: usize,
    pub origin: Point,
    pub jacobian: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
    pub det: f64,
}

impl EdgeMap {
    pub fn to_physical(&self, p: [f64; 2]) -> Point {
        self.origin + self.jacobian * Vector::new(p[0], p[1])
    }

    pub fn to_reference(&self, x: &Point) -> [f64; 2] {
        let r = self.inverse * (x - self.origin);
        [r.x, r.y]
    }

    pub fn gradient(&self, g: [f64; 2]) -> Vector {
        self.inverse.transpose() * Vector::new(g[0], g[1])
    }
}

pub fn edge_map(mesh: &Mesh, e: usize, k: usize) -> Result<EdgeMap> {
    let local = mesh
        .local_edge(k, e)
        .ok_or(Error::EdgeNotOnElement { edge: e, element: k })?;
    let el = mesh.element(k);
    let n = el.vertices.len();
    let [a, b] = mesh.edge(e).vertices;
    // the vertex adjacent to `a` that is not on the edge
    let ia = el.vertices.iter().position(|&v| v == a).expect("edge vertex");
    let other = match el.shape {
        Shape::Triangle => el.vertices[(local + 2) % 3],
        Shape::Rectangle => {
            let next = el.vertices[(ia + 1) % n];
            if next == b {
                el.vertices[(ia + n - 1) % n]
            } else {
                next
            }
        }
    };
    let (pa, pb, pc) = (mesh.vertex(a), mesh.vertex(b), mesh.vertex(other));
    let jacobian = Matrix2::from_columns(&[pb - pa, pc - pa]);
    let inverse = jacobian.try_inverse().expect("non-degenerate element");
    Ok(EdgeMap {
        element: k,
        edge: e,
        origin: pa,
        jacobian,
        inverse,
        det: jacobian.determinant().abs(),
    })
}

fn standard_map(mesh: &Mesh, k: usize) -> ElementMap {
    let family = match mesh.element(k).shape {
        Shape::Triangle => Family::P1,
        Shape::Rectangle => Family::Q1,
    };
    ElementMap::new(mesh, k, family)
}

/// `b_K` at a physical point of element `k`.
pub fn element_bubble(mesh: &Mesh, k: usize, x: &Point) -> f64 {
    let p = standard_map(mesh, k).to_reference(x);
    reference_element_bubble(mesh.element(k).shape).eval(p[0], p[1])
}

pub fn element_bubble_gradient(mesh: &Mesh, k: usize, x: &Point) -> Vector {
    let map = standard_map(mesh, k);
    let p = map.to_reference(x);
    let b = reference_element_bubble(mesh.element(k).shape);
    map.gradient([b.dx().eval(p[0], p[1]), b.dy().eval(p[0], p[1])])
}

/// `b_E` at a physical point of element `k` in `W_E`.
pub fn edge_bubble(mesh: &Mesh, e: usize, k: usize, x: &Point) -> Result<f64> {
    let map = edge_map(mesh, e, k)?;
    let p = map.to_reference(x);
    Ok(reference_edge_bubble(mesh.element(k).shape).eval(p[0], p[1]))
}

/// `F_ext(g)` at a physical point of element `k` in `W_E`, where `g` is
/// given as a function of the edge parameter in `[0, 1]`.
pub fn extend_from_edge(
    mesh: &Mesh,
    e: usize,
    k: usize,
    g: &dyn Fn(f64) -> f64,
    x: &Point,
) -> Result<f64> {
    let map = edge_map(mesh, e, k)?;
    Ok(g(map.to_reference(x)[0]))
}
