//! DG(q) in time, hp in space: per-step solves, initial projection, the
//! backward Euler oracle and checkpoint IO.

mod checkpoint;
mod partition;
mod scheme;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use partition::TimePartition;
pub use scheme::{
    backward_euler_oracle, cross_mass, cross_stiffness, project_initial, scheme_residual, solve,
    solve_timestep, source_loads, DiscreteSolution, Discretization, StepCache, Transition,
};
