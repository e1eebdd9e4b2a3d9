//! Observables of a skew form: classical (`A♭`), quantum (`A♭ + Δ`) and
//! trivial-quantum (`Δ`), truncated to ξ-degree at most `N`, together
//! with the retractions relating them.
//!
//! A monomial with `j` ξ-factors sits in cohomological degree `−j`. Both
//! differentials lower ξ-degree by one, so the truncation is a subcomplex;
//! its cohomology above degree `−N` is that of the full complex.

mod basis;
mod observables;
mod retraction;

pub use basis::TruncatedBasis;
pub use observables::{
    berezin, build_bv, bv_laplacian, classical_differential, classical_map, exp_a_isomorphism, laplacian_map,
    BvComplex, ExpIsomorphism, PairingInverse, Variant,
};
pub use retraction::{
    classical_retraction, kernel_data, lift_retraction, pfaffian_composite, pfaffian_composite_on_top, quantum_retraction,
    splitting_data, splitting_retraction, trivial_quantum_retraction, BvRetraction, GeneratorRetraction, KernelData, LiftedHomotopy,
    QuantumRetraction,
};
