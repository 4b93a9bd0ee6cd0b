//! Local efficiency and reliability constants as the conduit layer is
//! stretched from aspect ratio 1 to 1000.

use karst_fem::elements::Family;
use karst_fem::estimator::EstimatorMode;
use karst_fem::mesh::{aspect_ratio_mesh, DomainGeometry, Shape};
use karst_fem::solver::SolverConfig;
use karst_fem::verification::{make_layered_case, run_study, uniform_sequence, CaseParams, ASPECT_RATIOS};

fn main() -> karst_fem::Result<()> {
    let geometry = DomainGeometry::new(1.0, 1.0)?;
    let case = make_layered_case(geometry, CaseParams::default())?;
    for family in [Family::P1, Family::Cr1] {
        println!("{family}");
        for ar in ASPECT_RATIOS {
            let base = aspect_ratio_mesh(geometry, 4, ar)?;
            let meshes = uniform_sequence(&base, 3, family.shape() == Shape::Triangle)?;
            let recs = run_study(&case, family, &meshes, EstimatorMode::for_family(family), &SolverConfig::default())?;
            let fmt = |v: Option<f64>| v.map_or("   -  ".to_string(), |x| format!("{x:6.2}"));
            for r in &recs {
                println!(
                    "  AR {ar:>6}  level {}  m1 {}  efficiency {}  reliability {}",
                    r.level,
                    fmt(r.m1),
                    fmt(r.efficiency),
                    fmt(r.reliability)
                );
            }
        }
    }
    Ok(())
}
