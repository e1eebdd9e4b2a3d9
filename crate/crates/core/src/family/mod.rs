//! Families of Dirac-type operators `D_b = [[0, D⁻], [D⁺, 0]]` on
//! `W₀ ⊕ W₁` over a sampled base, with `D⁻ = (D⁺)*`: spectral cutoffs,
//! the determinant line bundle, its canonical section, and the finite
//! model of the expectation map.

pub mod bundle;
pub mod expectation;
pub mod grid;
pub mod operators;
pub mod spectral;
pub mod toy;

pub use bundle::{
    det_line_bundle, det_section, loop_winding, section_value, spectral_flow, transition_value, CocycleReport, DetSection,
    LineBundle, Transition, KERNEL_TOL,
};
pub use grid::{BaseGrid, GridSpec};
pub use operators::{lattice_dirac, FamilyConfig, FamilySpec, Mass, OperatorFamily, Radius};
pub use spectral::{dual_cutoff, spectral_cutoff, CutoffBundle, CutoffFrames, DualCutoffReport, FamilySpectra};
pub use expectation::{expectation_map, expectation_model, verify_transition_identity, ExpectationModel, TransitionCheck};
pub use toy::{cayley, toy_transition_suite, ToyFamily, ToySample};
