//! Symmetric positive definite solves: conjugate gradients with optional
//! Jacobi scaling, and a dense Cholesky factorisation used as an oracle.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::assembly::{apply_dirichlet, assemble_system, CsrMatrix, ProblemData};
use crate::elements::{FeFunction, FeSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    ConjugateGradient,
    DenseDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Relative residual target `|Ax - b| / |b|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub jacobi: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::ConjugateGradient,
            tolerance: 1e-10,
            max_iterations: 100_000,
            jacobi: true,
        }
    }
}

impl SolverConfig {
    pub fn dense() -> Self {
        SolverConfig {
            method: SolverMethod::DenseDirect,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolverMethod,
    pub unknowns: usize,
    pub iterations: usize,
    /// Final relative residual (absolute when `b = 0`).
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm(b);
    if nb > 0.0 {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

/// Solves `A x = b` for a symmetric positive definite `A`.
pub fn solve(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {n} x {n}, right-hand side has {}",
            b.len()
        )));
    }
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear system".into()));
    }
    if b.iter().all(|&v| v == 0.0) {
        return Ok((
            vec![0.0; n],
            SolveReport {
                method: cfg.method,
                unknowns: n,
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    match cfg.method {
        SolverMethod::DenseDirect => {
            let chol = a.to_dense().cholesky().ok_or(Error::NotPositiveDefinite)?;
            let x: Vec<f64> = chol.solve(&DVector::from_column_slice(b)).iter().copied().collect();
            let residual = relative_residual(a, &x, b);
            Ok((
                x,
                SolveReport {
                    method: cfg.method,
                    unknowns: n,
                    iterations: 1,
                    residual,
                },
            ))
        }
        SolverMethod::ConjugateGradient => conjugate_gradient(a, b, cfg),
    }
}

fn conjugate_gradient(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    let inv_diag: Vec<f64> = if cfg.jacobi {
        let d = a.diagonal();
        if d.iter().any(|&v| v <= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        d.iter().map(|v| 1.0 / v).collect()
    } else {
        vec![1.0; n]
    };
    let nb = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = 1.0;
    for it in 1..=cfg.max_iterations {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r) / nb;
        if res <= cfg.tolerance {
            // confirm with the true residual, recurrences drift
            let true_res = relative_residual(a, &x, b);
            if true_res <= cfg.tolerance {
                return Ok((
                    x,
                    SolveReport {
                        method: cfg.method,
                        unknowns: n,
                        iterations: it,
                        residual: true_res,
                    },
                ));
            }
            let ax = a.matvec(&x);
            r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: res,
    })
}

/// Assembles, eliminates the Dirichlet unknowns and solves. Nonconforming
/// families get the jump penalty, conforming ones do not.
pub fn solve_problem<'a>(
    space: &'a FeSpace<'a>,
    data: &ProblemData,
    cfg: &SolverConfig,
) -> Result<(FeFunction<'a>, SolveReport)> {
    let system = assemble_system(space, data, !space.family().is_conforming())?;
    let reduced = apply_dirichlet(&system);
    let (x, report) = solve(&reduced.matrix, &reduced.rhs, cfg)?;
    Ok((FeFunction::from_global(space, &reduced.extend(&x))?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::from_dense(&DMatrix::identity(3, 3));
        let (x, rep) = solve(&a, &[0.0; 3], &SolverConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        for cfg in [SolverConfig::default(), SolverConfig::dense()] {
            let (x, _) = solve(&a, &[1.0, 0.0], &cfg).unwrap();
            assert!((x[0] - 2.0 / 3.0).abs() < 1e-12 && (x[1] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_matches_dense_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = DMatrix::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
        let a = CsrMatrix::from_dense(&(&m * m.transpose() + DMatrix::identity(20, 20)));
        let b: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (xd, _) = solve(&a, &b, &SolverConfig::dense()).unwrap();
        for jacobi in [false, true] {
            let cfg = SolverConfig {
                jacobi,
                ..Default::default()
            };
            let (xc, _) = solve(&a, &b, &cfg).unwrap();
            let diff: f64 = xc.iter().zip(&xd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(diff / norm(&xd) < 1e-8);
        }
    }

    #[test]
    fn failures() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(matches!(solve(&a, &[1.0, 0.0], &SolverConfig::dense()), Err(Error::NotPositiveDefinite)));
        let i = CsrMatrix::from_dense(&DMatrix::identity(2, 2));
        assert!(matches!(solve(&i, &[f64::NAN, 0.0], &SolverConfig::default()), Err(Error::NonFinite(_))));
        let bad = SolverConfig {
            tolerance: 2.0,
            ..Default::default()
        };
        assert!(solve(&i, &[1.0, 0.0], &bad).is_err());
        let slow = SolverConfig {
            max_iterations: 1,
            jacobi: false,
            ..Default::default()
        };
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        assert!(matches!(solve(&a, &[1.0, 0.0], &slow), Err(Error::NotConverged { .. })));
    }
}
