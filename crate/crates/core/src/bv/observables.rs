use std::collections::BTreeMap;

use serde::Serialize;

use super::basis::TruncatedBasis;
use crate::complexes::{CochainComplex, GradedMap};
use crate::error::{Error, Result};
use crate::graded::{Derivation, Element, Generator, GeneratorSpec, SecondOrder};
use crate::matrix::Matrix;
use crate::pfaffian::SkewForm;
use crate::scalar::Scalar;

/// Which differential the observables carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `A♭`
    Classical,
    /// `A♭ + Δ`
    Quantum,
    /// `Δ`
    TrivialQuantum,
}

/// The inverse of the odd pairing between the `x` and `ξ` generators, as
/// the coefficient matrix of the pairs `(x_i, ξ_j)`. It fixes `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingInverse<S: Scalar> {
    rules: Matrix<S>,
}

impl<S: Scalar> PairingInverse<S> {
    /// `(x_i, ξ_i) → 1`.
    pub fn standard(n: usize) -> Self {
        Self { rules: Matrix::identity(n) }
    }

    pub fn new(rules: Matrix<S>) -> Result<Self> {
        if !rules.is_square() || rules.inverse().is_none() {
            return Err(Error::Invalid("pairing inverse must be an invertible square matrix".into()));
        }
        Ok(Self { rules })
    }

    pub fn rules(&self) -> &Matrix<S> {
        &self.rules
    }

    /// The pairing itself, `⟨x_i, ξ_j⟩` (with `⟨ξ_j, x_i⟩ = −⟨x_i, ξ_j⟩`).
    pub fn pairing(&self) -> Matrix<S> {
        self.rules.inverse().expect("checked at construction").transpose()
    }

    /// Residual of `−(id⊗⟨,⟩)(P⊗v) = v` over all generators `v`, where
    /// `P = Σ R_ij (x_i⊗ξ_j − ξ_j⊗x_i)`.
    pub fn defining_residual(&self) -> f64 {
        let n = self.rules.rows();
        let g = self.pairing();
        // v = x_k: −Σ R_ij x_i ⟨ξ_j, x_k⟩ = Σ R_ij G_kj x_i
        let on_x = self.rules.mul(&g.transpose()).sub(&Matrix::identity(n));
        // v = ξ_k: Σ R_ij ξ_j ⟨x_i, ξ_k⟩ = Σ R_ij G_ik ξ_j
        let on_xi = self.rules.transpose().mul(&g).sub(&Matrix::identity(n));
        on_x.max_abs().max(on_xi.max_abs())
    }

    /// The second-order operator contracting each pair `(x_i, ξ_j)`.
    pub fn laplacian(&self) -> SecondOrder<S> {
        let n = self.rules.rows();
        let spec = GeneratorSpec::square(n);
        let mut rules = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                let c = self.rules[(i, j)].clone();
                if !c.is_zero() {
                    rules.insert((Generator::X(i), Generator::Xi(j)), Element::constant(spec, c));
                }
            }
        }
        SecondOrder::new(spec, rules).expect("same spec")
    }
}

/// `A♭`: the derivation with `ξ_k ↦ −Σ_j A_kj x_j` and `x_i ↦ 0`.
///
/// With this sign, multiplication by `e^A` intertwines `A♭ + Δ` with `Δ`.
pub fn classical_differential<S: Scalar>(a: &SkewForm<S>) -> Derivation<S> {
    let n = a.dim();
    let spec = GeneratorSpec::square(n);
    let rules = (0..n)
        .map(|k| {
            let img = Element::linear(spec, (0..n).map(|j| (Generator::X(j), -a.matrix()[(k, j)].clone())));
            (Generator::Xi(k), img)
        })
        .collect();
    Derivation::new(spec, 1, 0, rules).expect("same spec")
}

/// The BV Laplacian `Σ ∂²/∂x_i∂ξ_i` on `n` pairs of generators.
pub fn bv_laplacian<S: Scalar>(n: usize) -> SecondOrder<S> {
    SecondOrder::bv_laplacian(GeneratorSpec::square(n))
}

/// Truncated observables of a skew form with one of the three differentials.
#[derive(Clone, Debug)]
pub struct BvComplex<S: Scalar> {
    pub form: SkewForm<S>,
    pub variant: Variant,
    pub basis: TruncatedBasis,
    pub complex: CochainComplex<S>,
}

impl<S: Scalar> BvComplex<S> {
    pub fn truncation(&self) -> usize {
        self.basis.truncation()
    }

    /// Cohomology dimensions in degrees above the truncation floor, where
    /// they agree with the untruncated complex.
    pub fn reliable_cohomology(&self) -> BTreeMap<i32, usize> {
        let floor = self.basis.min_degree();
        let dims = self.complex.cohomology_dims();
        if self.truncation() == 0 {
            return dims;
        }
        dims.into_iter().filter(|(k, _)| *k > floor).collect()
    }
}

/// `Δ` as a degree +1 map on a truncated basis.
pub fn laplacian_map<S: Scalar>(basis: &TruncatedBasis) -> GradedMap<S> {
    let delta = SecondOrder::<S>::bv_laplacian(basis.spec());
    basis.matrix_of(basis, 1, |m| delta.apply_monomial(m))
}

/// `A♭` as a degree +1 map on a truncated basis.
pub fn classical_map<S: Scalar>(a: &SkewForm<S>, basis: &TruncatedBasis) -> GradedMap<S> {
    let d = classical_differential(a);
    basis.matrix_of(basis, 1, |m| d.apply_monomial(m))
}

/// Builds the truncated complex and checks `d² = 0`.
pub fn build_bv<S: Scalar>(a: &SkewForm<S>, truncation: usize, variant: Variant) -> Result<BvComplex<S>> {
    let n = a.dim();
    let spec = GeneratorSpec::square(n);
    let basis = TruncatedBasis::new(spec, truncation);
    let classical = classical_differential(a);
    let delta = SecondOrder::<S>::bv_laplacian(spec);
    let complex = basis.complex(|m| match variant {
        Variant::Classical => classical.apply_monomial(m),
        Variant::TrivialQuantum => delta.apply_monomial(m),
        Variant::Quantum => {
            let mut e = classical.apply_monomial(m);
            e.add_scaled(&delta.apply_monomial(m), &S::one());
            e
        }
    })?;
    Ok(BvComplex { form: a.clone(), variant, basis, complex })
}

/// Multiplication by `e^A` from quantum to trivial-quantum observables.
#[derive(Clone, Debug)]
pub struct ExpIsomorphism<S: Scalar> {
    pub map: GradedMap<S>,
    /// `max |E∘(A♭+Δ) − Δ∘E|`.
    pub intertwining_residual: f64,
    /// `max |E∘E⁻¹ − 1|` with `E⁻¹` multiplication by `e^{−A}`.
    pub inverse_residual: f64,
}

impl<S: Scalar> ExpIsomorphism<S> {
    pub fn passed(&self, tol: f64) -> bool {
        if S::EXACT {
            self.intertwining_residual == 0.0 && self.inverse_residual == 0.0
        } else {
            self.intertwining_residual <= tol && self.inverse_residual <= tol
        }
    }
}

pub fn exp_a_isomorphism<S: Scalar>(quantum: &BvComplex<S>, trivial: &BvComplex<S>) -> Result<ExpIsomorphism<S>> {
    if quantum.variant != Variant::Quantum || trivial.variant != Variant::TrivialQuantum {
        return Err(Error::Invalid("expects a quantum and a trivial-quantum complex".into()));
    }
    if quantum.form != trivial.form || quantum.truncation() != trivial.truncation() {
        return Err(Error::Invalid("complexes must share the form and truncation".into()));
    }
    let basis = &quantum.basis;
    let spec = basis.spec();
    let a = quantum.form.to_element_in(spec)?;
    let exp = a.exp_even(None)?;
    let exp_inv = a.neg().exp_even(None)?;
    let map = basis.matrix_of(basis, 0, |m| exp.mul_unchecked(&Element::term(spec, m.clone(), S::one())));
    let inv = basis.matrix_of(basis, 0, |m| exp_inv.mul_unchecked(&Element::term(spec, m.clone(), S::one())));
    let lhs = map.compose(&quantum.complex.differential());
    let rhs = trivial.complex.differential().compose(&map);
    let intertwining_residual = lhs.sub(&rhs).max_abs();
    let id = GradedMap::identity(&quantum.complex);
    let inverse_residual = map.compose(&inv).sub(&id).max_abs().max(inv.compose(&map).sub(&id).max_abs());
    Ok(ExpIsomorphism { map, intertwining_residual, inverse_residual })
}

/// The coefficient of `x₁⋯x_n` of a ξ-free element.
pub fn berezin<S: Scalar>(e: &Element<S>) -> Result<S> {
    if e.has_xi() {
        return Err(Error::Invalid("berezin integral takes a ξ-free element".into()));
    }
    Ok(e.top_coefficient())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfaffian::pfaffian;
    use crate::scalar::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn form(rows: &[&[i64]]) -> SkewForm<Rational> {
        SkewForm::new(Matrix::from_i64_rows(rows)).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let spec = GeneratorSpec::square(1);
        let d = bv_laplacian::<Rational>(1);
        let x_xi = Element::monomial(spec, &[0], &[1], q(1)).unwrap();
        assert_eq!(d.apply(&x_xi).unwrap(), Element::one(spec));
        let x_xi3 = Element::monomial(spec, &[0], &[3], q(1)).unwrap();
        assert_eq!(d.apply(&x_xi3).unwrap(), Element::monomial(spec, &[], &[2], q(3)).unwrap());
        assert!(d.apply(&Element::xi(spec, 0)).unwrap().is_zero());
    }

    #[test]
    fn quantum_small_case() {
        let c = build_bv(&SkewForm::<Rational>::zero(1), 1, Variant::Quantum).unwrap();
        // degree -1 = span{ξ, xξ}, degree 0 = span{1, x}
        let d = c.complex.d(-1);
        let col = c.basis.position(&Monomial::from_parts(c.basis.spec(), &[0], &[1]).unwrap().unwrap().1).unwrap().1;
        let one = c.basis.position(&Monomial::one(c.basis.spec())).unwrap().1;
        assert_eq!(d[(one, col)], q(1));
    }

    use crate::graded::Monomial;

    #[test]
    fn no_xi_means_zero_differential() {
        let c = build_bv(&form(&[&[0, 3], &[-3, 0]]), 0, Variant::Quantum).unwrap();
        assert_eq!(c.complex.dims().values().copied().collect::<Vec<_>>(), vec![4]);
        assert_eq!(c.complex.cohomology_dims()[&0], 4);
    }

    #[test]
    fn classical_rule_and_square() {
        let a = form(&[&[0, 5], &[-5, 0]]);
        let d = classical_differential(&a);
        let spec = GeneratorSpec::square(2);
        assert_eq!(d.image(Generator::Xi(0)).unwrap(), &Element::x(spec, 1).scale(&q(-5)));
        let c = build_bv(&a, 3, Variant::Classical).unwrap();
        assert_eq!(c.complex.square_residual().1, 0.0);
    }

    #[test]
    fn pairing_inverse_defining_equation() {
        assert_eq!(PairingInverse::<Rational>::standard(3).defining_residual(), 0.0);
        let p = PairingInverse::<Rational>::new(Matrix::from_i64_rows(&[&[1, 2], &[0, 1]])).unwrap();
        assert_eq!(p.defining_residual(), 0.0);
        let std: PairingInverse<Rational> = PairingInverse::standard(2);
        let spec = GeneratorSpec::square(2);
        let e = Element::monomial(spec, &[0, 1], &[1, 2], q(1)).unwrap();
        assert_eq!(std.laplacian().apply(&e).unwrap(), bv_laplacian(2).apply(&e).unwrap());
    }

    #[test]
    fn exp_isomorphism_zero_form_is_identity() {
        let a = SkewForm::<Rational>::zero(2);
        let cq = build_bv(&a, 2, Variant::Quantum).unwrap();
        let c0 = build_bv(&a, 2, Variant::TrivialQuantum).unwrap();
        let iso = exp_a_isomorphism(&cq, &c0).unwrap();
        assert!(iso.map.approx_eq(&GradedMap::identity(&cq.complex), 0.0));
        assert!(iso.passed(0.0));
    }

    #[test]
    fn exp_isomorphism_intertwines() {
        let a = form(&[&[0, 1, -2], &[-1, 0, 3], &[2, -3, 0]]);
        let cq = build_bv(&a, 3, Variant::Quantum).unwrap();
        let c0 = build_bv(&a, 3, Variant::TrivialQuantum).unwrap();
        let iso = exp_a_isomorphism(&cq, &c0).unwrap();
        assert!(iso.passed(0.0), "{} {}", iso.intertwining_residual, iso.inverse_residual);
    }

    #[test]
    fn berezin_examples() {
        let spec = GeneratorSpec::new(3, 0);
        assert_eq!(berezin(&Element::monomial(spec, &[0, 1, 2], &[], q(1)).unwrap()).unwrap(), q(1));
        assert_eq!(berezin(&Element::<Rational>::one(spec)).unwrap(), q(0));
        assert!(berezin(&Element::<Rational>::xi(GeneratorSpec::square(1), 0)).is_err());
        let a = form(&[&[0, 2, 1, 0], &[-2, 0, 0, 3], &[-1, 0, 0, 4], &[0, -3, -4, 0]]);
        assert_eq!(berezin(&a.exp()).unwrap(), pfaffian(&a));
    }
}
