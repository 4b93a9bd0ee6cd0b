use proptest::prelude::*;

use karst_fem::adapt::dorfler_mark;
use karst_fem::elements::{FeSpace, Family};
use karst_fem::estimator::{alignment_measure, estimate, EstimatorMode};
use karst_fem::mesh::{aspect_ratio_mesh, build_graded_mesh, split_to_triangles, DomainGeometry, Grading, Vector};
use karst_fem::solver::{solve_problem, SolverConfig};
use karst_fem::verification::{make_layered_case, CaseKind, CaseParams, ManufacturedCase};

fn geometry() -> DomainGeometry {
    DomainGeometry::new(1.0, 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alignment_measure_within_crude_bounds(
        ar in 1.0f64..1000.0,
        angle in 0.0f64..std::f64::consts::PI,
        triangles in any::<bool>(),
    ) {
        let rect = aspect_ratio_mesh(geometry(), 3, ar).unwrap();
        let mesh = if triangles { split_to_triangles(&rect).unwrap() } else { rect };
        let g = Vector::new(angle.cos(), angle.sin());
        let m1 = alignment_measure(&mesh, &|_, _| g, 2).unwrap();
        let max_ar = mesh.elements().iter().map(|e| e.anisotropy.aspect_ratio()).fold(1.0, f64::max);
        prop_assert!(m1 >= 1.0 - 1e-12, "m1 {m1}");
        prop_assert!(m1 <= max_ar * (1.0 + 1e-12), "m1 {m1} > {max_ar}");
    }

    #[test]
    fn marked_set_is_minimal_and_sufficient(
        thetas in proptest::collection::vec(0.0f64..10.0, 1..60),
        fraction in 0.05f64..1.0,
    ) {
        let marked = dorfler_mark(&thetas, fraction);
        let total: f64 = thetas.iter().map(|t| t * t).sum();
        prop_assume!(total > 0.0);
        let carried: f64 = marked.iter().map(|&k| thetas[k] * thetas[k]).sum();
        prop_assert!(carried >= fraction * total * (1.0 - 1e-12));
        // dropping the smallest marked indicator falls short
        let smallest = marked.iter().map(|&k| thetas[k] * thetas[k]).fold(f64::INFINITY, f64::min);
        prop_assert!(carried - smallest < fraction * total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The solution is linear in the sources, so the estimator is too.
    #[test]
    fn estimator_scales_with_data(scale in 0.01f64..100.0, family_index in 0usize..4) {
        let family = [Family::P1, Family::Q1, Family::Cr1, Family::Cr2][family_index];
        let case = make_layered_case(geometry(), CaseParams::default()).unwrap();
        let rect = build_graded_mesh(geometry(), 3, 2, Grading::Geometric { ratio: 0.5 }).unwrap();
        let mesh = if family.shape() == karst_fem::mesh::Shape::Triangle { split_to_triangles(&rect).unwrap() } else { rect };
        let space = FeSpace::new(&mesh, family).unwrap();
        let mode = EstimatorMode::for_family(family);
        let solver = SolverConfig::dense();
        let base = case.data();
        let scaled = base.scaled(scale);
        let (u1, _) = solve_problem(&space, &base, &solver).unwrap();
        let (u2, _) = solve_problem(&space, &scaled, &solver).unwrap();
        let t1 = estimate(&u1, &base, mode).unwrap();
        let t2 = estimate(&u2, &scaled, mode).unwrap();
        prop_assert!((t2.theta - scale * t1.theta).abs() <= 1e-9 * scale * t1.theta);
        prop_assert!((t2.zeta - scale * t1.zeta).abs() <= 1e-9 * scale * t1.zeta.max(1e-300));
    }
}

#[test]
fn conforming_solution_has_same_theta_in_nonconforming_mode() {
    let case = ManufacturedCase::new(CaseKind::LayeredCoupled, geometry(), CaseParams::default()).unwrap();
    let data = case.data();
    let rect = build_graded_mesh(geometry(), 4, 3, Grading::Geometric { ratio: 0.6 }).unwrap();
    let tri = split_to_triangles(&rect).unwrap();
    for (family, mesh) in [(Family::P1, &tri), (Family::Q1, &rect), (Family::P2, &tri)] {
        let space = FeSpace::new(mesh, family).unwrap();
        let (u_h, _) = solve_problem(&space, &data, &SolverConfig::default()).unwrap();
        for (conf, nc) in [
            (EstimatorMode::AnisotropicConforming, EstimatorMode::AnisotropicNonconforming),
            (EstimatorMode::IsotropicConforming, EstimatorMode::IsotropicNonconforming),
        ] {
            let a = estimate(&u_h, &data, conf).unwrap();
            let b = estimate(&u_h, &data, nc).unwrap();
            assert!((a.theta - b.theta).abs() <= 1e-12 * a.theta, "{family}: {} vs {}", a.theta, b.theta);
        }
    }
}

#[test]
fn refining_reduces_theta_on_the_smooth_case() {
    let case = ManufacturedCase::new(CaseKind::SmoothDecoupled, geometry(), CaseParams::default()).unwrap();
    let data = case.data();
    let base = build_graded_mesh(geometry(), 4, 2, Grading::Uniform).unwrap();
    let meshes = karst_fem::verification::uniform_sequence(&base, 3, false).unwrap();
    let thetas: Vec<f64> = meshes
        .iter()
        .map(|m| {
            let space = FeSpace::new(m, Family::Q2).unwrap();
            let (u_h, _) = solve_problem(&space, &data, &SolverConfig::default()).unwrap();
            estimate(&u_h, &data, EstimatorMode::AnisotropicConforming).unwrap().theta
        })
        .collect();
    assert!(thetas.windows(2).all(|w| w[1] < w[0]), "{thetas:?}");
}
