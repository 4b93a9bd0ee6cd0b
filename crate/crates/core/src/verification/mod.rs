//! Manufactured solutions, error norms, convergence studies and the
//! property suites.

mod cases;
mod norms;
mod properties;
mod study;

pub use cases::{make_layered_case, CaseKind, CaseParams, ManufacturedCase};
pub use norms::{error_norm, local_error_norm, ErrorDistribution, NormKind};
pub use study::{run_study, study_csv, study_level, uniform_sequence, write_study_csv, StudyRecord, STUDY_CSV_HEADER};
pub use properties::{
    alignment_suite, clement_estimate_suite, clement_inclusion_error, clement_inclusion_suite, clement_ratios,
    coercivity_ratio, coercivity_suite, cr_property_suite, galerkin_orthogonality, galerkin_orthogonality_suite,
    inverse_constants, inverse_inequality_suite, max_basis_mean_jump, max_mean_jump, property_suites, run_suite,
    unisolvence_suite, InverseConstants, PropertyReport, SuiteResult, ASPECT_RATIOS, SUITE_NAMES,
};
