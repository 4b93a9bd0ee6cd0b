use nalgebra::Matrix2;

use super::Family;
use crate::mesh::{Mesh, Point, Shape, Vector};

/// Affine map `F_K(xbar) = origin + jacobian * xbar` from the reference
/// element onto element `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMap {
    pub origin: Point,
    pub jacobian: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
    /// `|det J|`.
    pub det: f64,
    /// Local mesh vertex hit by each reference vertex.
    pub vertex: Vec<usize>,
    /// Local mesh edge hit by each reference edge.
    pub edge: Vec<usize>,
}

impl ElementMap {
    pub fn new(mesh: &Mesh, k: usize, family: Family) -> ElementMap {
        let el = mesh.element(k);
        let pts = mesh.element_points(k);
        let (origin, jacobian, vertex) = match el.shape {
            Shape::Triangle => (
                pts[0],
                Matrix2::from_columns(&[pts[1] - pts[0], pts[2] - pts[0]]),
                vec![0, 1, 2],
            ),
            Shape::Rectangle => {
                let hx = pts[1].x - pts[0].x;
                let hy = pts[3].y - pts[0].y;
                // the stretching direction becomes ybar for the five-dof element
                if family == Family::Cr2 && hx > hy {
                    (
                        pts[0],
                        Matrix2::from_columns(&[Vector::new(0.0, hy), Vector::new(hx, 0.0)]),
                        vec![0, 3, 2, 1],
                    )
                } else {
                    (
                        pts[0],
                        Matrix2::from_columns(&[Vector::new(hx, 0.0), Vector::new(0.0, hy)]),
                        vec![0, 1, 2, 3],
                    )
                }
            }
        };
        let n = vertex.len();
        let edge = (0..n)
            .map(|r| {
                let (a, b) = (vertex[r], vertex[(r + 1) % n]);
                if (a + 1) % n == b {
                    a
                } else {
                    b
                }
            })
            .collect();
        let inverse = jacobian.try_inverse().expect("valid elements are non-degenerate");
        ElementMap {
            origin,
            jacobian,
            inverse,
            det: jacobian.determinant().abs(),
            vertex,
            edge,
        }
    }

    pub fn to_physical(&self, p: [f64; 2]) -> Point {
        self.origin + self.jacobian * Vector::new(p[0], p[1])
    }

    pub fn to_reference(&self, p: &Point) -> [f64; 2] {
        let r = self.inverse * (p - self.origin);
        [r.x, r.y]
    }

    /// Physical gradient from a reference gradient, `J^{-T} g`.
    pub fn gradient(&self, g: [f64; 2]) -> Vector {
        self.inverse.transpose() * Vector::new(g[0], g[1])
    }

    /// Physical Laplacian from reference second derivatives `[xx, xy, yy]`.
    pub fn laplacian(&self, h: [f64; 3]) -> f64 {
        let hr = Matrix2::new(h[0], h[1], h[1], h[2]);
        let hp = self.inverse.transpose() * hr * self.inverse;
        hp.trace()
    }
}
