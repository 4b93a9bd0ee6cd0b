//! Uniform refinement study on the smooth manufactured case.
//!
//! cargo run --release --example convergence_study -- [family] [levels]

use karst_fem::elements::Family;
use karst_fem::estimator::EstimatorMode;
use karst_fem::mesh::{build_graded_mesh, DomainGeometry, Grading, Shape};
use karst_fem::solver::SolverConfig;
use karst_fem::verification::{run_study, study_csv, uniform_sequence, CaseKind, CaseParams, ManufacturedCase};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: Family = args.first().map(|s| s.parse()).transpose()?.unwrap_or(Family::P1);
    let levels = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(4);

    let geometry = DomainGeometry::new(1.0, 1.0)?;
    let case = ManufacturedCase::new(CaseKind::SmoothDecoupled, geometry, CaseParams::default())?;
    let base = build_graded_mesh(geometry, 8, 8, Grading::Uniform)?;
    let meshes = uniform_sequence(&base, levels, family.shape() == Shape::Triangle)?;
    let records = run_study(&case, family, &meshes, EstimatorMode::for_family(family), &SolverConfig::default())?;

    for r in &records {
        println!(
            "{:>6} elements  error {:.4e}  theta {:.4e}  effectivity {:>6.2}  rates {} / {}",
            r.elements,
            r.error,
            r.theta,
            r.effectivity.unwrap_or(f64::NAN),
            r.error_rate.map_or("-".into(), |v| format!("{v:.3}")),
            r.theta_rate.map_or("-".into(), |v| format!("{v:.3}")),
        );
    }
    print!("\n{}", study_csv(&records));
    Ok(())
}
