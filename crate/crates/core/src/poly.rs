use std::ops::{Add, Mul, Neg, Sub};

/// Bivariate polynomial `sum c[i][j] x^i y^j` with dense coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    /// `coeffs[i][j]` multiplies `x^i y^j`.
    coeffs: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 {
            coeffs: vec![vec![0.0]],
        }
    }

    pub fn constant(c: f64) -> Self {
        Poly2 {
            coeffs: vec![vec![c]],
        }
    }

    pub fn monomial(i: usize, j: usize, c: f64) -> Self {
        let mut coeffs = vec![vec![0.0; j + 1]; i + 1];
        coeffs[i][j] = c;
        Poly2 { coeffs }
    }

    /// Builds from `(coefficient, x power, y power)` terms.
    pub fn from_terms(terms: &[(f64, usize, usize)]) -> Self {
        terms
            .iter()
            .fold(Poly2::zero(), |acc, &(c, i, j)| acc + Poly2::monomial(i, j, c))
    }

    pub fn x() -> Self {
        Poly2::monomial(1, 0, 1.0)
    }

    pub fn y() -> Self {
        Poly2::monomial(0, 1, 1.0)
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    /// Highest total degree with a nonzero coefficient.
    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    /// Highest power of either variable with a nonzero coefficient.
    pub fn max_variable_degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    d = d.max(i).max(j);
                }
            }
        }
        d
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c)
        })
    }

    pub fn dx(&self) -> Poly2 {
        if self.coeffs.len() <= 1 {
            return Poly2::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|c| c * (i + 1) as f64).collect())
            .collect();
        Poly2 { coeffs }
    }

    pub fn dy(&self) -> Poly2 {
        let coeffs: Vec<Vec<f64>> = self
            .coeffs
            .iter()
            .map(|row| {
                if row.len() <= 1 {
                    vec![0.0]
                } else {
                    row[1..]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * (j + 1) as f64)
                        .collect()
                }
            })
            .collect();
        Poly2 { coeffs }
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2 {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c * s).collect())
                .collect(),
        }
    }
}

impl Add for Poly2 {
    type Output = Poly2;

    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Add for &Poly2 {
    type Output = Poly2;

    fn add(self, rhs: &Poly2) -> Poly2 {
        let ni = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..ni)
            .map(|i| {
                let nj = self.coeffs.get(i).map_or(0, Vec::len).max(rhs.coeffs.get(i).map_or(0, Vec::len));
                (0..nj).map(|j| self.coeff(i, j) + rhs.coeff(i, j)).collect()
            })
            .collect();
        Poly2 { coeffs }
    }
}

impl Neg for Poly2 {
    type Output = Poly2;

    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Sub for Poly2 {
    type Output = Poly2;

    fn sub(self, rhs: Poly2) -> Poly2 {
        &self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;

    fn mul(self, rhs: &Poly2) -> Poly2 {
        let ni = self.coeffs.len() + rhs.coeffs.len() - 1;
        let nj = self.coeffs.iter().map(Vec::len).max().unwrap_or(1)
            + rhs.coeffs.iter().map(Vec::len).max().unwrap_or(1)
            - 1;
        let mut coeffs = vec![vec![0.0; nj]; ni];
        for (i1, r1) in self.coeffs.iter().enumerate() {
            for (j1, &c1) in r1.iter().enumerate() {
                if c1 == 0.0 {
                    continue;
                }
                for (i2, r2) in rhs.coeffs.iter().enumerate() {
                    for (j2, &c2) in r2.iter().enumerate() {
                        coeffs[i1 + i2][j1 + j2] += c1 * c2;
                    }
                }
            }
        }
        Poly2 { coeffs }
    }
}

impl Mul for Poly2 {
    type Output = Poly2;

    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivatives() {
        // p = 1 + 2x - y + 3 x y^2
        let p = Poly2::from_terms(&[(1.0, 0, 0), (2.0, 1, 0), (-1.0, 0, 1), (3.0, 1, 2)]);
        assert_eq!(p.eval(2.0, 1.0), 1.0 + 4.0 - 1.0 + 6.0);
        assert_eq!(p.dx().eval(2.0, 3.0), 2.0 + 27.0);
        assert_eq!(p.dy().eval(2.0, 3.0), -1.0 + 36.0);
        assert_eq!(p.total_degree(), 3);
        assert_eq!(p.max_variable_degree(), 2);
    }

    #[test]
    fn product() {
        let p = (Poly2::x() + Poly2::constant(1.0)) * (Poly2::y() - Poly2::constant(2.0));
        for &(x, y) in &[(0.3, 0.7), (-1.0, 2.5)] {
            assert!((p.eval(x, y) - (x + 1.0) * (y - 2.0)).abs() < 1e-15);
        }
    }
}
