//! End-to-end experiments: configuration, runs, sweeps and reports.

mod config;
mod report;
mod run;
mod study;

pub use config::{parse_schedule, Degrees, MeshAction, RunConfig};
pub use report::{
    audit_outcome, write_audit_csv, write_errors_csv, write_local_csv, write_reports,
    write_summary, write_verification_csv, AUDIT_CSV, ERRORS_CSV, ESTIMATORS_CSV, LOCAL_CSV,
    SUMMARY_TXT, VERIFICATION_CSV,
};
pub use run::{
    build_meshes, build_spaces, run_experiment, solve_config, RieszAudit, RunOutput, AUDIT_SEED,
    INFSUP_TOL, TIME_AUDIT_TOL,
};
pub use study::{convergence_study, observed_order, StudyRow, StudyTable, Sweep, SweepKind};
