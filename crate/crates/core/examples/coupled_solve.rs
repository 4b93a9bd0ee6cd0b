//! Solves the layered manufactured problem with every element family and
//! reports the discrete energy error.

use karst_fem::elements::{FeSpace, Family};
use karst_fem::mesh::{build_graded_mesh, split_to_triangles, DomainGeometry, Grading, Shape};
use karst_fem::solver::{solve_problem, SolverConfig};
use karst_fem::verification::{error_norm, make_layered_case, CaseParams, NormKind};

fn main() -> karst_fem::Result<()> {
    let geometry = DomainGeometry::new(1.0, 1.0)?;
    let case = make_layered_case(geometry, CaseParams::default())?;
    let data = case.data();
    let rect = build_graded_mesh(geometry, 8, 4, Grading::Uniform)?;
    let tri = split_to_triangles(&rect)?;

    println!("{:<6} {:>6} {:>10} {:>12}", "family", "dofs", "cg iters", "error");
    for &family in Family::ALL {
        let mesh = if family.shape() == Shape::Triangle { &tri } else { &rect };
        let space = FeSpace::new(mesh, family)?;
        let (u_h, report) = solve_problem(&space, &data, &SolverConfig::default())?;
        let err = error_norm(&u_h, &case, NormKind::Discrete)?;
        println!("{:<6} {:>6} {:>10} {:>12.4e}", family.name(), space.num_dofs(), report.iterations, err);
    }
    Ok(())
}
