//! Finite cochain complexes, deformation retractions, and homological
//! perturbation.
//!
//! Sign convention for a retraction `(ι, π, η)` of `V` onto `W`:
//! `π∘ι = id_W` and `d_V η + η d_V = ι π − id_V`. Side conditions
//! (`ηι = 0`, `πη = 0`, `η² = 0`) are never assumed.

mod complex;
mod json;
mod perturb;
pub mod random;
mod retraction;

pub use complex::{CochainComplex, GradedMap, DIFFERENTIAL_TOL};
pub use json::{to_numeric, ComplexJson, GradedMapJson, HplInput, RetractionJson};
pub use perturb::{
    check_projection_compatibility, one_minus_delta_eta_inverse, perturb, perturb_and_verify, perturb_with,
    CompatibilityReport, InverseStrategy,
};
pub use retraction::{compose_retractions, verify_retraction, Axiom, AxiomCheck, Retraction, RetractionReport};
