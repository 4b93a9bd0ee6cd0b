//! Solve, estimate, mark and refine on the layered problem.

use karst_fem::adapt::{adaptive_loop, AdaptConfig};
use karst_fem::elements::Family;
use karst_fem::estimator::EstimatorMode;
use karst_fem::mesh::{build_graded_mesh, DomainGeometry, Grading};
use karst_fem::solver::SolverConfig;
use karst_fem::verification::{make_layered_case, CaseParams};

fn main() -> karst_fem::Result<()> {
    let geometry = DomainGeometry::new(1.0, 1.0)?;
    let case = make_layered_case(geometry, CaseParams::default())?;
    let mesh = build_graded_mesh(geometry, 4, 4, Grading::Uniform)?;
    let cfg = AdaptConfig {
        max_levels: 6,
        fraction: 0.5,
    };
    let run = adaptive_loop(
        &mesh,
        Family::Q1,
        &case.data(),
        EstimatorMode::AnisotropicConforming,
        &SolverConfig::default(),
        &cfg,
    )?;
    println!("{:>5} {:>8} {:>6} {:>11} {:>7} {:>9}", "level", "elements", "dofs", "theta", "marked", "at y = 0");
    for s in &run.steps {
        let frac = s.conduit_fraction.map_or("-".to_string(), |f| format!("{:.0}%", 100.0 * f));
        println!(
            "{:>5} {:>8} {:>6} {:>11.4e} {:>7} {:>9}",
            s.level,
            s.elements,
            s.dofs,
            s.theta,
            s.marked.len(),
            frac
        );
    }
    let h_min = run
        .mesh
        .elements()
        .iter()
        .map(|e| e.anisotropy.h_min())
        .fold(f64::INFINITY, f64::min);
    println!("final mesh: {} elements, smallest h_min {h_min:.4}", run.mesh.num_elements());
    Ok(())
}
