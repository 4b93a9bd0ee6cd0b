use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::adapt::{adaptive_loop, AdaptStep};
use crate::elements::{FeSpace, Family};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorMode};
use crate::mesh::{aspect_ratio_mesh, build_graded_mesh, Grading, Mesh, MeshDocument, Shape};
use crate::solver::{solve_problem, SolveReport};
use crate::verification::{
    run_study, run_suite, uniform_sequence, ErrorDistribution, ManufacturedCase, NormKind, PropertyReport,
    StudyRecord, STUDY_CSV_HEADER,
};

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_mesh(dir: &Path, mesh: &Mesh) -> Result<PathBuf> {
    let path = dir.join("mesh.json");
    MeshDocument::from_mesh(mesh).write(&path)?;
    Ok(path)
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn cmd_mesh(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    prepare(&cfg.output)?;
    let mesh = cfg.build_mesh()?;
    Ok(vec![write_mesh(&cfg.output, &mesh)?])
}

/// Summary written next to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub family: Family,
    pub elements: usize,
    pub dofs: usize,
    pub solver: SolveReport,
    /// Discrete energy error; present for manufactured problems.
    pub error: Option<f64>,
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
    pub config: RunConfig,
}

fn solve_and_report(cfg: &RunConfig, with_estimate: bool) -> Result<(RunSummary, Vec<PathBuf>)> {
    prepare(&cfg.output)?;
    let mesh = cfg.build_mesh()?;
    let space = FeSpace::new(&mesh, cfg.family)?;
    let data = cfg.problem_data()?;
    let (u_h, solver) = solve_problem(&space, &data, &cfg.solver)?;
    let case = cfg.case()?;
    let error = match &case {
        Some(c) => Some(ErrorDistribution::compute(&u_h, Some(c))?.global(NormKind::Discrete)),
        None => None,
    };
    let mut files = vec![
        write_mesh(&cfg.output, &mesh)?,
        write_json(&cfg.output, "solution.json", &u_h.to_document())?,
    ];
    let mut summary = RunSummary {
        family: cfg.family,
        elements: mesh.num_elements(),
        dofs: space.num_dofs(),
        solver,
        error,
        theta: None,
        zeta: None,
        config: cfg.clone(),
    };
    if with_estimate {
        let report = estimate(&u_h, &data, cfg.mode())?;
        summary.theta = Some(report.theta);
        summary.zeta = Some(report.zeta);
        files.push(write_text(&cfg.output, "estimator.csv", &report.to_csv())?);
        files.push(write_json(&cfg.output, "estimator.json", &report)?);
    }
    files.push(write_json(&cfg.output, "run.json", &summary)?);
    Ok((summary, files))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(RunSummary, Vec<PathBuf>)> {
    solve_and_report(cfg, false)
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<(RunSummary, Vec<PathBuf>)> {
    solve_and_report(cfg, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptSummary {
    pub level: usize,
    pub elements: usize,
    pub dofs: usize,
    pub theta: f64,
    pub zeta: f64,
    pub marked: usize,
    pub conduit_fraction: Option<f64>,
    pub iterations: usize,
}

impl From<&AdaptStep> for AdaptSummary {
    fn from(s: &AdaptStep) -> Self {
        AdaptSummary {
            level: s.level,
            elements: s.elements,
            dofs: s.dofs,
            theta: s.theta,
            zeta: s.zeta,
            marked: s.marked.len(),
            conduit_fraction: s.conduit_fraction,
            iterations: s.solver.iterations,
        }
    }
}

pub const ADAPT_CSV_HEADER: &str = "level,elements,dofs,theta,zeta,marked,conduit_fraction,iterations";

pub fn adapt_csv(steps: &[AdaptSummary]) -> String {
    let mut s = String::from(ADAPT_CSV_HEADER);
    s.push('\n');
    for r in steps {
        let cf = r.conduit_fraction.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.level, r.elements, r.dofs, r.theta, r.zeta, r.marked, cf, r.iterations
        );
    }
    s
}

/// Runs the adaptive loop; writes one estimator report per level, a
/// summary table and the final mesh.
pub fn cmd_adapt(cfg: &RunConfig) -> Result<(Vec<AdaptStep>, Vec<PathBuf>)> {
    prepare(&cfg.output)?;
    let mesh = cfg.build_mesh()?;
    let data = cfg.problem_data()?;
    let run = adaptive_loop(&mesh, cfg.family, &data, cfg.mode(), &cfg.solver, &cfg.adapt)?;
    let mut files = Vec::new();
    for step in &run.steps {
        files.push(write_text(&cfg.output, &format!("estimator-{}.csv", step.level), &step.report.to_csv())?);
        files.push(write_json(&cfg.output, &format!("adapt-{}.json", step.level), step)?);
    }
    let summary: Vec<AdaptSummary> = run.steps.iter().map(AdaptSummary::from).collect();
    files.push(write_text(&cfg.output, "adapt.csv", &adapt_csv(&summary))?);
    files.push(write_json(&cfg.output, "adapt.json", &summary)?);
    files.push(write_mesh(&cfg.output, &run.mesh)?);
    Ok((run.steps, files))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub family: Family,
    pub mode: EstimatorMode,
    pub records: Vec<StudyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStudy {
    pub family: Family,
    pub mode: EstimatorMode,
    pub aspect_ratio: f64,
    pub records: Vec<StudyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub convergence: Vec<ConvergenceStudy>,
    pub sweep: Vec<SweepStudy>,
    pub properties: PropertyReport,
    /// Wall-clock seconds; not written to the CSV files.
    pub elapsed: f64,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.properties.passed
    }

    pub fn failures(&self) -> Vec<String> {
        self.properties.failures()
    }
}

fn with_family(rows: &str, prefix: &str) -> String {
    rows.lines().skip(1).map(|l| format!("{prefix},{l}\n")).collect()
}

pub fn convergence_csv(studies: &[ConvergenceStudy]) -> String {
    let mut s = format!("family,{STUDY_CSV_HEADER}\n");
    for st in studies {
        s += &with_family(&crate::verification::study_csv(&st.records), st.family.name());
    }
    s
}

pub fn sweep_csv(studies: &[SweepStudy]) -> String {
    let mut s = format!("family,aspect_ratio,{STUDY_CSV_HEADER}\n");
    for st in studies {
        let prefix = format!("{},{}", st.family.name(), st.aspect_ratio);
        s += &with_family(&crate::verification::study_csv(&st.records), &prefix);
    }
    s
}

/// Convergence study, anisotropy sweep and property suites.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyOutcome> {
    let start = Instant::now();
    let v = &cfg.verify;
    let params = cfg.case_params();

    let mut convergence = Vec::new();
    if v.convergence.enabled {
        let c = &v.convergence;
        let case = ManufacturedCase::new(c.case, cfg.geometry, params)?;
        let base = build_graded_mesh(cfg.geometry, c.nx, c.ny, Grading::Uniform)?;
        convergence = c
            .families
            .par_iter()
            .map(|&family| {
                let mode = EstimatorMode::for_family(family);
                let meshes = uniform_sequence(&base, c.levels, family.shape() == Shape::Triangle)?;
                let records = run_study(&case, family, &meshes, mode, &cfg.solver)?;
                Ok(ConvergenceStudy { family, mode, records })
            })
            .collect::<Result<_>>()?;
    }

    let mut sweep = Vec::new();
    if v.sweep.enabled {
        let s = &v.sweep;
        let case = ManufacturedCase::new(s.case, cfg.geometry, params)?;
        let jobs: Vec<(Family, f64)> = s
            .families
            .iter()
            .flat_map(|&f| s.aspect_ratios.iter().map(move |&ar| (f, ar)))
            .collect();
        sweep = jobs
            .par_iter()
            .map(|&(family, aspect_ratio)| {
                let mode = EstimatorMode::for_family(family);
                let base = aspect_ratio_mesh(cfg.geometry, s.nx, aspect_ratio)?;
                let meshes = uniform_sequence(&base, s.levels, family.shape() == Shape::Triangle)?;
                let records = run_study(&case, family, &meshes, mode, &cfg.solver)?;
                Ok(SweepStudy {
                    family,
                    mode,
                    aspect_ratio,
                    records,
                })
            })
            .collect::<Result<_>>()?;
    }

    let suites = v
        .suites
        .par_iter()
        .map(|name| run_suite(name, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    let properties = PropertyReport {
        seed: cfg.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    };

    Ok(VerifyOutcome {
        convergence,
        sweep,
        properties,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureList {
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(VerifyOutcome, Vec<PathBuf>)> {
    prepare(&cfg.output)?;
    let out = run_verify(cfg)?;
    let dir = &cfg.output;
    let files = vec![
        write_text(dir, "study.csv", &convergence_csv(&out.convergence))?,
        write_json(dir, "study.json", &out.convergence)?,
        write_text(dir, "sweep.csv", &sweep_csv(&out.sweep))?,
        write_json(dir, "sweep.json", &out.sweep)?,
        write_json(dir, "properties.json", &out.properties)?,
        write_json(
            dir,
            "failures.json",
            &FailureList {
                passed: out.passed(),
                failures: out.failures(),
            },
        )?,
    ];
    Ok((out, files))
}

/// Converts an error into a one-line message including its causes.
pub fn describe(err: &Error) -> String {
    let mut msg = err.to_string();
    let mut source = std::error::Error::source(err);
    while let Some(s) = source {
        let _ = write!(msg, ": {s}");
        source = s.source();
    }
    msg
}
