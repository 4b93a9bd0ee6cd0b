//! Splits the residual estimator into its contributions and lists the
//! elements with the largest indicators.

use karst_fem::elements::{FeSpace, Family};
use karst_fem::estimator::{estimate, EstimatorMode};
use karst_fem::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading};
use karst_fem::solver::{solve_problem, SolverConfig};
use karst_fem::verification::{make_layered_case, CaseParams};

fn main() -> karst_fem::Result<()> {
    let geometry = DomainGeometry::new(1.0, 1.0)?;
    let case = make_layered_case(geometry, CaseParams::default())?;
    let data = case.data();
    let mesh = split_to_triangles(&build_graded_mesh(geometry, 8, 4, Grading::Geometric { ratio: 0.5 })?)?;

    for (family, mode) in [
        (Family::P1, EstimatorMode::AnisotropicConforming),
        (Family::P1, EstimatorMode::IsotropicConforming),
        (Family::Cr1, EstimatorMode::AnisotropicNonconforming),
    ] {
        let space = FeSpace::new(&mesh, family)?;
        let (u_h, _) = solve_problem(&space, &data, &SolverConfig::default())?;
        let r = estimate(&u_h, &data, mode)?;
        let total = |f: fn(&karst_fem::estimator::LocalIndicator) -> f64| r.elements.iter().map(f).sum::<f64>().sqrt();
        println!(
            "{family} {}: theta {:.4e} zeta {:.3e} | volume {:.3e} flux {:.3e} conduit {:.3e} jump {:.3e}",
            mode.name(),
            r.theta,
            r.zeta,
            total(|l| l.volume),
            total(|l| l.flux),
            total(|l| l.conduit),
            total(|l| l.nonconformity)
        );
        let mut order: Vec<usize> = (0..r.elements.len()).collect();
        order.sort_by(|&a, &b| r.elements[b].theta.total_cmp(&r.elements[a].theta));
        for &k in order.iter().take(3) {
            let c = mesh.centroid(k);
            println!("    K{k:<4} at ({:.3}, {:+.4})  theta_K {:.3e}", c.x, c.y, r.elements[k].theta);
        }
    }
    Ok(())
}
