use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ErrorDistribution, ManufacturedCase, NormKind};
use crate::elements::{FeSpace, Family};
use crate::error::{Error, Result};
use crate::estimator::{alignment_measure, estimate, EstimatorMode};
use crate::mesh::{refine, split_to_triangles, Mesh};
use crate::solver::{solve_problem, SolveReport, SolverConfig};

/// One refinement level of a study. Ratios are `None` when undefined
/// (zero error or zero estimator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub level: usize,
    pub elements: usize,
    pub dofs: usize,
    /// `sqrt(|Omega| / #elements)`.
    pub h: f64,
    pub h_min: f64,
    pub max_aspect_ratio: f64,
    pub error: f64,
    pub theta: f64,
    pub zeta: f64,
    /// `J(u_h, u_h)^(1/2)`.
    pub jump: f64,
    pub m1: Option<f64>,
    pub effectivity: Option<f64>,
    pub reliability: Option<f64>,
    pub efficiency: Option<f64>,
    pub error_rate: Option<f64>,
    pub theta_rate: Option<f64>,
    pub solver: SolveReport,
}

pub const STUDY_CSV_HEADER: &str = "level,elements,dofs,h,h_min,max_aspect_ratio,error,theta,zeta,jump,m1,effectivity,reliability,efficiency,error_rate,theta_rate,iterations";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with the fixed column order of [`STUDY_CSV_HEADER`]; empty cells
/// mark undefined values.
pub fn study_csv(records: &[StudyRecord]) -> String {
    let mut s = String::from(STUDY_CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.level,
            r.elements,
            r.dofs,
            r.h,
            r.h_min,
            r.max_aspect_ratio,
            r.error,
            r.theta,
            r.zeta,
            r.jump,
            opt(r.m1),
            opt(r.effectivity),
            opt(r.reliability),
            opt(r.efficiency),
            opt(r.error_rate),
            opt(r.theta_rate),
            r.solver.iterations
        );
    }
    s
}

pub fn write_study_csv(records: &[StudyRecord], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, study_csv(records))?;
    Ok(())
}

/// `levels` meshes, each a uniform red refinement of the previous one.
/// Triangle meshes are obtained by splitting the rectangle meshes.
pub fn uniform_sequence(base: &Mesh, levels: usize, triangles: bool) -> Result<Vec<Mesh>> {
    let mut rects = vec![base.clone()];
    for _ in 1..levels {
        let last = rects.last().unwrap();
        let all: Vec<usize> = (0..last.num_elements()).collect();
        rects.push(refine(last, &all)?);
    }
    if triangles {
        rects.iter().map(split_to_triangles).collect()
    } else {
        Ok(rects)
    }
}

fn positive_ratio(a: f64, b: f64) -> Option<f64> {
    (a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()).then_some(a / b)
}

/// Solves, estimates and measures one mesh.
pub fn study_level(
    case: &ManufacturedCase,
    family: Family,
    mesh: &Mesh,
    mode: EstimatorMode,
    solver: &SolverConfig,
    level: usize,
) -> Result<StudyRecord> {
    let space = FeSpace::new(mesh, family)?;
    let data = case.data();
    let (u_h, report) = solve_problem(&space, &data, solver)?;
    let est = estimate(&u_h, &data, mode)?;
    let dist = ErrorDistribution::compute(&u_h, Some(case))?;
    let error = dist.global(NormKind::Discrete);
    let grad = |k: usize, x: &crate::mesh::Point| {
        (case.grad_matrix)(x, mesh.element(k).subdomain) - u_h.gradient_at(k, x)
    };
    let m1 = match alignment_measure(mesh, &grad, family.quadrature_degree() + 4) {
        Ok(v) => Some(v),
        Err(Error::ZeroGradient) => None,
        Err(e) => return Err(e),
    };
    let efficiency = (0..mesh.num_elements())
        .into_par_iter()
        .filter_map(|k| {
            let patch = mesh.element_patch(k);
            let zeta: f64 = patch.iter().map(|&j| est.zeta_local[j]).sum();
            positive_ratio(est.elements[k].theta, dist.local(mesh, &patch) + zeta)
        })
        .reduce_with(f64::max);
    let total = (est.theta.powi(2) + est.zeta.powi(2)).sqrt();
    let els = mesh.elements();
    Ok(StudyRecord {
        level,
        elements: mesh.num_elements(),
        dofs: space.num_dofs(),
        h: (mesh.geometry().area() / mesh.num_elements() as f64).sqrt(),
        h_min: els.iter().map(|e| e.anisotropy.h_min()).fold(f64::INFINITY, f64::min),
        max_aspect_ratio: els.iter().map(|e| e.anisotropy.aspect_ratio()).fold(1.0, f64::max),
        error,
        theta: est.theta,
        zeta: est.zeta,
        jump: ErrorDistribution::compute(&u_h, None)?.jump_norm(),
        m1,
        effectivity: positive_ratio(est.theta, error),
        reliability: m1.and_then(|m| positive_ratio(error, m * total)),
        efficiency,
        error_rate: None,
        theta_rate: None,
        solver: report,
    })
}

/// Runs every level and fills in convergence rates
/// `log(e_prev / e) / log(h_prev / h)`.
pub fn run_study(
    case: &ManufacturedCase,
    family: Family,
    meshes: &[Mesh],
    mode: EstimatorMode,
    solver: &SolverConfig,
) -> Result<Vec<StudyRecord>> {
    if meshes.len() < 2 {
        return Err(Error::TooFewLevels(meshes.len()));
    }
    let mut out: Vec<StudyRecord> = Vec::with_capacity(meshes.len());
    for (level, mesh) in meshes.iter().enumerate() {
        let mut r = study_level(case, family, mesh, mode, solver, level).map_err(|e| Error::Level {
            level,
            source: Box::new(e),
        })?;
        if let Some(prev) = out.last() {
            let dh = (prev.h / r.h).ln();
            r.error_rate = positive_ratio(prev.error, r.error).map(|q| q.ln() / dh);
            r.theta_rate = positive_ratio(prev.theta, r.theta).map(|q| q.ln() / dh);
        }
        out.push(r);
    }
    Ok(out)
}
