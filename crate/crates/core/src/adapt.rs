//! Solve, estimate, mark, refine.

use serde::{Deserialize, Serialize};

use crate::assembly::ProblemData;
use crate::elements::{FeSpace, Family};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorMode, EstimatorReport};
use crate::mesh::{refine, Mesh};
use crate::solver::{solve_problem, SolveReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptConfig {
    /// Number of solve-estimate passes, including the last one that is not
    /// followed by refinement.
    pub max_levels: usize,
    /// Share of `sum Theta_K^2` the marked set must carry.
    pub fraction: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            max_levels: 4,
            fraction: 0.5,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_levels == 0 {
            return Err(Error::InvalidData("max_levels must be at least 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidData(format!(
                "marking fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        Ok(())
    }
}

/// Smallest set of largest indicators whose squares reach `fraction` of the
/// total. Ties keep the lower element index first; the result is sorted.
pub fn dorfler_mark(thetas: &[f64], fraction: f64) -> Vec<usize> {
    let total: f64 = thetas.iter().map(|t| t * t).sum();
    if total == 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[b].total_cmp(&thetas[a]).then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if acc >= fraction * total {
            break;
        }
        acc += thetas[k] * thetas[k];
        marked.push(k);
    }
    marked.sort_unstable();
    marked
}

/// Whether element `k` has a vertex on the conduit line.
pub fn touches_conduit(mesh: &Mesh, k: usize) -> bool {
    let tol = 1e-12 * mesh.geometry().half_height;
    mesh.element(k)
        .vertices
        .iter()
        .any(|&v| mesh.vertex(v).y.abs() <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptStep {
    pub level: usize,
    pub elements: usize,
    pub dofs: usize,
    pub theta: f64,
    pub zeta: f64,
    /// Empty on the last level.
    pub marked: Vec<usize>,
    /// Share of marked elements touching `y = 0`; `None` when nothing is marked.
    pub conduit_fraction: Option<f64>,
    pub solver: SolveReport,
    pub report: EstimatorReport,
}

#[derive(Debug, Clone)]
pub struct AdaptRun {
    pub steps: Vec<AdaptStep>,
    pub mesh: Mesh,
}

pub fn adaptive_loop(
    mesh: &Mesh,
    family: Family,
    data: &ProblemData,
    mode: EstimatorMode,
    solver: &SolverConfig,
    cfg: &AdaptConfig,
) -> Result<AdaptRun> {
    cfg.validate()?;
    let mut current = mesh.clone();
    let mut steps = Vec::with_capacity(cfg.max_levels);
    for level in 0..cfg.max_levels {
        let wrap = |e: Error| Error::Level {
            level,
            source: Box::new(e),
        };
        let space = FeSpace::new(&current, family).map_err(wrap)?;
        let (u_h, solve) = solve_problem(&space, data, solver).map_err(wrap)?;
        let report = estimate(&u_h, data, mode).map_err(wrap)?;
        let last = level + 1 == cfg.max_levels;
        let marked = if last {
            Vec::new()
        } else {
            dorfler_mark(&report.thetas(), cfg.fraction)
        };
        let conduit_fraction = (!marked.is_empty()).then(|| {
            marked.iter().filter(|&&k| touches_conduit(&current, k)).count() as f64 / marked.len() as f64
        });
        steps.push(AdaptStep {
            level,
            elements: current.num_elements(),
            dofs: space.num_dofs(),
            theta: report.theta,
            zeta: report.zeta,
            marked: marked.clone(),
            conduit_fraction,
            solver: solve,
            report,
        });
        if last || marked.is_empty() {
            break;
        }
        current = refine(&current, &marked).map_err(wrap)?;
    }
    Ok(AdaptRun { steps, mesh: current })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks_largest_first() {
        // squares 16, 9, 1, 0 sum to 26; 16 alone reaches half
        assert_eq!(dorfler_mark(&[3.0, 4.0, 1.0, 0.0], 0.5), vec![1]);
        assert_eq!(dorfler_mark(&[3.0, 4.0, 1.0, 0.0], 0.9), vec![0, 1]);
        assert_eq!(dorfler_mark(&[3.0, 4.0, 1.0, 0.0], 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn zero_indicators_mark_nothing() {
        assert!(dorfler_mark(&[0.0, 0.0], 0.5).is_empty());
    }

    #[test]
    fn ties_prefer_lower_index() {
        assert_eq!(dorfler_mark(&[1.0, 1.0, 1.0, 1.0], 0.5), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_fraction() {
        let c = AdaptConfig {
            fraction: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
