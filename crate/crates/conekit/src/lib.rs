//! conekit: spectral machinery on Riemannian cones.
//!
//! The crate implements, over a metric cone C(L) = (1, oo) x L:
//!
//! * spectral data of built-in links (round spheres, lens quotients) and a
//!   JSON loader for user spectra ([`link_spectrum`]);
//! * the four exceptional (indicial) sets governing solvability of the cone
//!   Laplacian ([`indicial`]);
//! * per-mode radial solvers driven by explicit variation-of-parameters
//!   kernels, weighted norms and 1-form assembly ([`radial`]);
//! * classification of homogeneous harmonic 1-forms and the exact-arithmetic
//!   obstruction computation on C^2 \ {0} ([`harmonic`]);
//! * chart-level tensor calculus: Christoffel symbols, connection
//!   differences, scalar curvature and its linearization ([`geometry`]);
//! * boundary-integral mass computation, the mass formula cross-check and
//!   the scalar-flat expansion coefficients ([`mass`]).

pub mod error;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod indicial;
pub mod link_spectrum;
pub mod mass;
pub mod radial;

pub use error::{ConekitError, Result};
