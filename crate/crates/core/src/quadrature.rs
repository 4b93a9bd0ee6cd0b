//! Gauss rules on the reference interval, square and triangle.
//!
//! Reference domains: `[0, 1]`, `[0, 1]^2` and the triangle with vertices
//! `(0, 0)`, `(1, 0)`, `(0, 1)`. Rectangle rules are tensor Gauss-Legendre
//! rules and `degree` is the per-variable degree. Triangle rules are
//! collapsed (Duffy) tensor rules exact for total degree `degree`.

use crate::error::{Error, Result};
use crate::mesh::Shape;

/// Highest supported degree.
pub const MAX_DEGREE: usize = 41;

#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule2d {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Rule2d {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, nodes by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Rule1d {
    assert!(n >= 1);
    if n == 1 {
        return Rule1d {
            points: vec![0.5],
            weights: vec![1.0],
        };
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] to [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Rule1d { points, weights }
}

fn check(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedQuadrature(degree));
    }
    Ok(())
}

/// Rule on `[0, 1]` exact for polynomials of the given degree.
pub fn line_rule(degree: usize) -> Result<Rule1d> {
    check(degree)?;
    Ok(gauss_legendre(degree / 2 + 1))
}

/// Rule on the reference element of `shape`.
pub fn quadrature(shape: Shape, degree: usize) -> Result<Rule2d> {
    check(degree)?;
    match shape {
        Shape::Rectangle => {
            let g = gauss_legendre(degree / 2 + 1);
            let mut points = Vec::with_capacity(g.points.len().pow(2));
            let mut weights = Vec::with_capacity(points.capacity());
            for (&y, &wy) in g.points.iter().zip(&g.weights) {
                for (&x, &wx) in g.points.iter().zip(&g.weights) {
                    points.push([x, y]);
                    weights.push(wx * wy);
                }
            }
            Ok(Rule2d { points, weights })
        }
        Shape::Triangle => {
            // the collapse adds one degree in the first variable
            let gu = gauss_legendre((degree + 1) / 2 + 1);
            let gv = gauss_legendre(degree / 2 + 1);
            let mut points = Vec::with_capacity(gu.points.len() * gv.points.len());
            let mut weights = Vec::with_capacity(points.capacity());
            for (&u, &wu) in gu.points.iter().zip(&gu.weights) {
                for (&v, &wv) in gv.points.iter().zip(&gv.weights) {
                    points.push([u, v * (1.0 - u)]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
            Ok(Rule2d { points, weights })
        }
    }
}

/// Composite rule: the reference element is cut into `s^2` congruent
/// pieces and `quadrature(shape, degree)` is applied on each. Exact for
/// functions that are polynomial of the given degree on every piece.
pub fn subdivided(shape: Shape, degree: usize, s: usize) -> Result<Rule2d> {
    let base = quadrature(shape, degree)?;
    if s <= 1 {
        return Ok(base);
    }
    let h = 1.0 / s as f64;
    // (origin, first axis, second axis) of each piece
    let mut pieces: Vec<([f64; 2], [f64; 2], [f64; 2])> = Vec::new();
    for j in 0..s {
        for i in 0..s {
            let o = [i as f64 * h, j as f64 * h];
            match shape {
                Shape::Rectangle => pieces.push((o, [h, 0.0], [0.0, h])),
                Shape::Triangle => {
                    if i + j < s {
                        pieces.push((o, [h, 0.0], [0.0, h]));
                    }
                    if i + j + 1 < s {
                        let o2 = [o[0] + h, o[1] + h];
                        pieces.push((o2, [-h, 0.0], [0.0, -h]));
                    }
                }
            }
        }
    }
    let area = h * h;
    let mut points = Vec::with_capacity(pieces.len() * base.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (o, a, b) in pieces {
        for (p, w) in base.points.iter().zip(&base.weights) {
            points.push([o[0] + a[0] * p[0] + b[0] * p[1], o[1] + a[1] * p[0] + b[1] * p[1]]);
            weights.push(w * area);
        }
    }
    Ok(Rule2d { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn unit_integrals() {
        let r = quadrature(Shape::Rectangle, 0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let t = quadrature(Shape::Triangle, 0).unwrap();
        assert!((t.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_x2y2() {
        let r = quadrature(Shape::Rectangle, 2).unwrap();
        let s: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1] * p[1])
            .sum();
        assert!((s - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomials_exact() {
        // int x^a y^b over the triangle = a! b! / (a + b + 2)!
        for d in 0..=20usize {
            let t = quadrature(Shape::Triangle, d).unwrap();
            for a in 0..=d as u32 {
                let b = d as u32 - a;
                let s: f64 = t
                    .points
                    .iter()
                    .zip(&t.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                assert!((s - exact).abs() < 1e-14 * exact.max(1e-3), "d={d} a={a}: {s} vs {exact}");
            }
        }
    }

    #[test]
    fn line_rule_exact() {
        for d in 0..=MAX_DEGREE {
            let r = line_rule(d).unwrap();
            let s: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
            assert!((s - 1.0 / (d as f64 + 1.0)).abs() < 1e-13, "degree {d}");
        }
    }

    #[test]
    fn subdivided_integrates_piecewise_functions() {
        // |x - 1/2| is linear on each half of a 2 x 2 subdivision
        let r = subdivided(Shape::Rectangle, 1, 2).unwrap();
        let s: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * (p[0] - 0.5).abs()).sum();
        assert!((s - 0.25).abs() < 1e-15);
        let t = subdivided(Shape::Triangle, 2, 3).unwrap();
        assert!((t.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let m: f64 = t.points.iter().zip(&t.weights).map(|(p, w)| w * p[0] * p[1]).sum();
        assert!((m - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_huge_degree() {
        assert!(matches!(
            quadrature(Shape::Rectangle, MAX_DEGREE + 1),
            Err(Error::UnsupportedQuadrature(_))
        ));
    }
}
