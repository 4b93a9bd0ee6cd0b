use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adapt::AdaptConfig;
use crate::assembly::{PhysicalInputs, ProblemData};
use crate::elements::Family;
use crate::error::{Error, Result};
use crate::estimator::EstimatorMode;
use crate::mesh::{aspect_ratio_mesh, build_graded_mesh, split_to_triangles, DomainGeometry, Grading, Mesh, Shape};
use crate::solver::SolverConfig;
use crate::verification::{CaseKind, CaseParams, ManufacturedCase, SUITE_NAMES};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "KARST_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub nx: usize,
    /// Layers per half.
    pub ny: usize,
    /// Geometric layer ratio towards the conduit; 1 is uniform.
    pub grading: f64,
    pub triangles: bool,
    /// When set, replaces `ny` and `grading` by a layering whose
    /// conduit-adjacent elements have this aspect ratio.
    pub aspect_ratio: Option<f64>,
    /// Read the mesh from a mesh JSON file instead of generating it.
    pub file: Option<PathBuf>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            nx: 4,
            ny: 4,
            grading: 1.0,
            triangles: false,
            aspect_ratio: None,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManufacturedConfig {
    pub case: CaseKind,
    pub conductivity: f64,
    pub conduit_conductivity: f64,
    pub exchange: f64,
    pub a: Option<f64>,
}

impl Default for ManufacturedConfig {
    fn default() -> Self {
        let p = CaseParams::default();
        ManufacturedConfig {
            case: CaseKind::LayeredCoupled,
            conductivity: p.conductivity,
            conduit_conductivity: p.conduit_conductivity,
            exchange: p.exchange,
            a: p.a,
        }
    }
}

impl ManufacturedConfig {
    pub fn params(&self) -> CaseParams {
        CaseParams {
            conductivity: self.conductivity,
            conduit_conductivity: self.conduit_conductivity,
            exchange: self.exchange,
            a: self.a,
        }
    }
}

/// Physical coefficients with constant sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub permeability: f64,
    pub viscosity: f64,
    pub gravity: f64,
    pub conduit_width: f64,
    pub exchange: f64,
    #[serde(default)]
    pub matrix_source: f64,
    #[serde(default)]
    pub conduit_source: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Manufactured(ManufacturedConfig),
    Physical(PhysicalConfig),
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig::Manufactured(ManufacturedConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub enabled: bool,
    pub case: CaseKind,
    pub families: Vec<Family>,
    pub nx: usize,
    pub ny: usize,
    pub levels: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            enabled: true,
            case: CaseKind::SmoothDecoupled,
            families: vec![Family::P1, Family::Q1],
            nx: 8,
            ny: 8,
            levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub enabled: bool,
    pub case: CaseKind,
    pub families: Vec<Family>,
    pub aspect_ratios: Vec<f64>,
    pub nx: usize,
    pub levels: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            enabled: true,
            case: CaseKind::LayeredCoupled,
            families: vec![Family::P1, Family::Cr1, Family::Q1, Family::Cr2],
            aspect_ratios: vec![1.0, 10.0, 100.0, 1000.0],
            nx: 4,
            levels: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub convergence: ConvergenceConfig,
    pub sweep: SweepConfig,
    /// Property suites to run; empty runs none.
    pub suites: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            convergence: ConvergenceConfig::default(),
            sweep: SweepConfig::default(),
            suites: SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: DomainGeometry,
    pub mesh: MeshConfig,
    pub family: Family,
    pub problem: ProblemConfig,
    /// `None` picks the mode matching the family.
    pub estimator_mode: Option<EstimatorMode>,
    pub solver: SolverConfig,
    pub adapt: AdaptConfig,
    pub verify: VerifyConfig,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: DomainGeometry {
                length: 1.0,
                half_height: 1.0,
            },
            mesh: MeshConfig::default(),
            family: Family::Q1,
            problem: ProblemConfig::default(),
            estimator_mode: None,
            solver: SolverConfig::default(),
            adapt: AdaptConfig::default(),
            verify: VerifyConfig::default(),
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses a JSON document, applies `key=value` overrides and validates.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| config_error("", e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { "" } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry
            .validate()
            .map_err(|e| config_error("geometry", e.to_string()))?;
        let m = &self.mesh;
        if m.nx == 0 {
            return Err(config_error("mesh.nx", "must be at least 1"));
        }
        if m.ny == 0 {
            return Err(config_error("mesh.ny", "must be at least 1"));
        }
        if !(m.grading > 0.0 && m.grading <= 1.0) {
            return Err(config_error("mesh.grading", "must lie in (0, 1]"));
        }
        if let Some(ar) = m.aspect_ratio {
            if !(ar >= 1.0 && ar.is_finite()) {
                return Err(config_error("mesh.aspect_ratio", "must be at least 1"));
            }
        }
        let shape = if m.triangles { Shape::Triangle } else { Shape::Rectangle };
        if m.file.is_none() && self.family.shape() != shape {
            return Err(config_error(
                "family",
                format!("{} needs mesh.triangles = {}", self.family, !m.triangles),
            ));
        }
        if let Some(mode) = self.estimator_mode {
            if mode.is_nonconforming() == self.family.is_conforming() {
                return Err(config_error("estimator_mode", format!("{} does not fit family {}", mode.name(), self.family)));
            }
        }
        match &self.problem {
            ProblemConfig::Manufactured(c) => {
                ManufacturedCase::new(c.case, self.geometry, c.params())
                    .map_err(|e| config_error("problem", e.to_string()))?;
            }
            ProblemConfig::Physical(_) => {
                self.problem_data().map_err(|e| config_error("problem", e.to_string()))?;
            }
        }
        self.solver
            .validate()
            .map_err(|e| config_error("solver", e.to_string()))?;
        self.adapt
            .validate()
            .map_err(|e| config_error("adapt", e.to_string()))?;
        let c = &self.verify.convergence;
        if c.enabled && c.levels < 2 {
            return Err(config_error("verify.convergence.levels", "must be at least 2"));
        }
        if c.nx == 0 || c.ny == 0 {
            return Err(config_error("verify.convergence", "nx and ny must be at least 1"));
        }
        let s = &self.verify.sweep;
        if s.enabled && s.levels < 2 {
            return Err(config_error("verify.sweep.levels", "must be at least 2"));
        }
        if s.nx == 0 {
            return Err(config_error("verify.sweep.nx", "must be at least 1"));
        }
        if let Some(ar) = s.aspect_ratios.iter().find(|&&a| !(a >= 1.0 && a.is_finite())) {
            return Err(config_error("verify.sweep.aspect_ratios", format!("{ar} is below 1")));
        }
        for (i, name) in self.verify.suites.iter().enumerate() {
            if !SUITE_NAMES.contains(&name.as_str()) {
                return Err(config_error(&format!("verify.suites[{i}]"), format!("unknown suite `{name}`")));
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> EstimatorMode {
        self.estimator_mode
            .unwrap_or_else(|| EstimatorMode::for_family(self.family))
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let m = &self.mesh;
        if let Some(path) = &m.file {
            return crate::mesh::MeshDocument::read(path)?.to_mesh();
        }
        let rect = match m.aspect_ratio {
            Some(ar) => aspect_ratio_mesh(self.geometry, m.nx, ar)?,
            None => {
                let grading = if m.grading == 1.0 {
                    Grading::Uniform
                } else {
                    Grading::Geometric { ratio: m.grading }
                };
                build_graded_mesh(self.geometry, m.nx, m.ny, grading)?
            }
        };
        if m.triangles {
            split_to_triangles(&rect)
        } else {
            Ok(rect)
        }
    }

    /// The manufactured case, if the problem is one.
    pub fn case(&self) -> Result<Option<ManufacturedCase>> {
        match &self.problem {
            ProblemConfig::Manufactured(c) => Ok(Some(ManufacturedCase::new(c.case, self.geometry, c.params())?)),
            ProblemConfig::Physical(_) => Ok(None),
        }
    }

    /// Case parameters for verification studies; defaults unless the
    /// problem is manufactured.
    pub fn case_params(&self) -> CaseParams {
        match &self.problem {
            ProblemConfig::Manufactured(c) => c.params(),
            ProblemConfig::Physical(_) => CaseParams::default(),
        }
    }

    pub fn problem_data(&self) -> Result<ProblemData> {
        match &self.problem {
            ProblemConfig::Manufactured(c) => Ok(ManufacturedCase::new(c.case, self.geometry, c.params())?.data()),
            ProblemConfig::Physical(p) => {
                let inputs = PhysicalInputs {
                    permeability: p.permeability,
                    viscosity: p.viscosity,
                    gravity: p.gravity,
                    conduit_width: p.conduit_width,
                };
                let (fm, fc) = (p.matrix_source, p.conduit_source);
                ProblemData::from_physical(&inputs, p.exchange, Arc::new(move |_| fm), Arc::new(move |_| fc))
            }
        }
    }
}

/// Sets a dotted `key=value` path in `root`. The value is parsed as JSON
/// and taken as a string when that fails.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_error(spec, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(config_error(spec, "empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_error(&parts[..i].join("."), "not an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one part")
}

/// Applies the thread cap from [`THREADS_ENV`] once per process.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_error(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c = RunConfig::from_json("{}", &[]).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"mesh": {"nz": 3}}"#, &[]).unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "mesh.nz"), "{err}");
        assert!(RunConfig::from_json(r#"{"colour": 3}"#, &[]).is_err());
        let bad = r#"{"problem": {"type": "manufactured", "extra": 1}}"#;
        assert!(RunConfig::from_json(bad, &[]).is_err());
    }

    #[test]
    fn overrides_set_nested_fields() {
        let c = RunConfig::from_json(
            "{}",
            &["mesh.nx=7".into(), "family=p1".into(), "mesh.triangles=true".into(), "solver.method=dense-direct".into()],
        )
        .unwrap();
        assert_eq!(c.mesh.nx, 7);
        assert_eq!(c.family, Family::P1);
        assert_eq!(c.solver.method, crate::solver::SolverMethod::DenseDirect);
    }

    #[test]
    fn validation_reports_the_path() {
        let err = RunConfig::from_json("{}", &["mesh.grading=1.5".into()]).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "mesh.grading"),
            e => panic!("unexpected {e}"),
        }
        let err = RunConfig::from_json("{}", &["family=p1".into()]).unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "family"));
        let err = RunConfig::from_json(r#"{"verify": {"suites": ["nope"]}}"#, &[]).unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "verify.suites[0]"));
    }

    #[test]
    fn physical_problem() {
        let text = r#"{"problem": {"type": "physical", "permeability": 1e-3, "viscosity": 1e-3,
            "gravity": 9.81, "conduit_width": 0.1, "exchange": 2.0, "conduit_source": 1.0}}"#;
        let c = RunConfig::from_json(text, &[]).unwrap();
        let d = c.problem_data().unwrap();
        assert!((d.conductivity - 9.81).abs() < 1e-12);
        assert!(c.case().unwrap().is_none());
    }

    #[test]
    fn malformed_override() {
        assert!(RunConfig::from_json("{}", &["mesh.nx".into()]).is_err());
        assert!(RunConfig::from_json("{}", &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn default_mesh_has_32_elements() {
        assert_eq!(RunConfig::default().build_mesh().unwrap().num_elements(), 32);
    }
}
