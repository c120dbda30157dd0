//! Nonnegativity certificates for signomials whose positive support is the
//! vertex set of a simplex, over A-convex regions.
//!
//! The crate covers exact term bookkeeping ([`signomial`]), regions and the
//! moment map ([`geometry`]), AGE/SAGE certificates ([`certificates`]),
//! convex engines ([`solver`]), circuit decompositions ([`decompose`]), the
//! univariate theory ([`univariate`]) and brute-force checks ([`oracle`]).

pub mod certificates;
pub mod decompose;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod signomial;
pub mod solver;
pub mod univariate;

pub use error::{Error, Result};
pub use certificates::{
    age_constrained, age_global, sage_membership, verify_certificate, AgeCertificate, Certificate,
    SageCertificate, SageMode, SageOptions, SageOutcome,
};
pub use decompose::{decompose, verify_decomposition, CircuitPart, DecomposeOptions, Decomposition};
pub use geometry::{ConvexRegion, MomentRegion};
pub use solver::{moment_program, MomentSolution, SolveReport, SolveStatus};
pub use signomial::{ExponentVector, Signomial, SupportPartition, Term};
