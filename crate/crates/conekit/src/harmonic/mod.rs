//! Homogeneous harmonic 1-forms on cones and the exact ddbar-obstruction
//! machinery on C^2 \ {0}.

pub mod classify;
pub mod expansion;
pub mod forms;
pub mod linalg;
pub mod obstruction;
pub mod ring;

pub use classify::{classify_harmonic_one_forms, verify_harmonic_form01, ClassificationReport,
                   FormType, HomogeneousHarmonicForm};
pub use expansion::{ddbar_residual_expansion, ExpansionResult};
pub use obstruction::{obstruction_dimensions, ObstructionSpace};
