//! Exact sparse algebra `ℂ[x₁..x_n, ξ₁..ξ_m]` with Koszul signs: the `x_i`
//! have ℤ-degree 0 and anti-commute, the `ξ_i` have ℤ-degree −1 and
//! commute, and `x`'s anti-commute with `ξ`'s. All generators are odd.

mod derivation;
mod element;
mod json;
mod monomial;

pub use derivation::{Derivation, Operator, Order, SecondOrder};
pub use element::Element;
pub use json::{ElementJson, TermJson};
pub use monomial::{koszul_sign, Generator, GeneratorSpec, Monomial};
