//! Discrete spaces and their matrices.

mod hp;
mod mixed;

pub use hp::{HpSpace, FIXED};
pub use mixed::{compatibility, PatchMixedSpace, SaddleFactor, SaddleSolution, SaddleSystem};
