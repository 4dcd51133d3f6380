//! Radau reconstruction, temporal jumps and data approximations.

mod data;
mod projection;
mod radau;
mod step;

pub use data::{MeshQuadrature, Source, SourceMoments};
pub use projection::{assemble_f_htau, project_patch_data, DataApproximation, PatchProjection};
pub use radau::{combine, jump_factor, radau_coefficients, ModeSamples, TemporalAlgebra, Vg};
pub use step::StepReconstruction;
