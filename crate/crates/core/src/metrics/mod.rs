//! Manufactured problems, true errors and numerical checks of the error
//! identities and inequalities.

mod checks;
mod errors;
mod problems;

pub use checks::{
    floor_for, infsup_gap, jump_bounds, local_efficiency, norm_equivalence, upper_bounds, Check,
    LOCAL_FLOOR, RIESZ_BAND,
};
pub use errors::{endpoint_errors, l2_error_sq, ErrorReport, StepErrorReport};
pub use problems::{ManufacturedProblem, ProblemId};
