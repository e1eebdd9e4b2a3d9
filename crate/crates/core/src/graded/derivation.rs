//! Graded derivations and second-order operators defined by their values
//! on generators (resp. generator pairs).

use std::collections::BTreeMap;

use super::element::Element;
use super::monomial::{koszul_sign, Generator, GeneratorSpec, Monomial};
use crate::error::Result;
use crate::scalar::Scalar;

/// Order of a generator-defined operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// A first-order operator `D` of ℤ-degree `z_degree` and parity `parity`,
/// extended from generators by the graded Leibniz rule
/// `D(ab) = D(a)b + (−1)^{|D||a|+π_Dπ_a} a D(b)`.
#[derive(Clone, Debug)]
pub struct Derivation<S: Scalar> {
    spec: GeneratorSpec,
    z_degree: i32,
    parity: u8,
    rules: BTreeMap<Generator, Element<S>>,
}

impl<S: Scalar> Derivation<S> {
    /// Generators absent from `rules` are sent to zero.
    pub fn new(spec: GeneratorSpec, z_degree: i32, parity: u8, rules: BTreeMap<Generator, Element<S>>) -> Result<Self> {
        for img in rules.values() {
            spec.check_same(&img.spec())?;
        }
        Ok(Self { spec, z_degree, parity: parity % 2, rules })
    }

    pub fn spec(&self) -> GeneratorSpec {
        self.spec
    }

    pub fn z_degree(&self) -> i32 {
        self.z_degree
    }

    pub fn image(&self, g: Generator) -> Option<&Element<S>> {
        self.rules.get(&g)
    }

    fn passes(&self, g: Generator) -> i32 {
        koszul_sign(self.z_degree, self.parity, g.z_degree(), g.parity())
    }

    pub fn apply_monomial(&self, m: &Monomial) -> Element<S> {
        let word = m.word();
        let mut out = Element::zero(self.spec);
        let mut sign = 1;
        for (i, g) in word.iter().enumerate() {
            if let Some(img) = self.rules.get(g) {
                if !img.is_zero() {
                    let prefix = Monomial::from_word(self.spec, &word[..i]);
                    let suffix = Monomial::from_word(self.spec, &word[i + 1..]);
                    let t = img.mul_monomial_left(&prefix).mul_monomial_right(&suffix);
                    out.add_scaled(&t, &S::from_i64(sign as i64));
                }
            }
            sign *= self.passes(*g);
        }
        out
    }

    pub fn apply(&self, e: &Element<S>) -> Result<Element<S>> {
        self.spec.check_same(&e.spec())?;
        let mut out = Element::zero(self.spec);
        for (m, c) in e.terms() {
            out.add_scaled(&self.apply_monomial(m), c);
        }
        Ok(out)
    }
}

/// A second-order operator vanishing on `Sym^{≤1}`:
/// `Δ(g₁⋯g_k) = Σ_{i<j} ε_{ij} Δ(g_i g_j) · g₁⋯ĝ_i⋯ĝ_j⋯g_k`, where `ε_{ij}` is
/// the Koszul sign of moving `g_i g_j` to the front.
#[derive(Clone, Debug)]
pub struct SecondOrder<S: Scalar> {
    spec: GeneratorSpec,
    rules: BTreeMap<(Generator, Generator), Element<S>>,
}

impl<S: Scalar> SecondOrder<S> {
    /// `rules[(a, b)]` is `Δ(a·b)`. A pair given in one order only is
    /// extended to the other by graded symmetry, `Δ(b·a) = ±Δ(a·b)`.
    pub fn new(spec: GeneratorSpec, rules: BTreeMap<(Generator, Generator), Element<S>>) -> Result<Self> {
        for img in rules.values() {
            spec.check_same(&img.spec())?;
        }
        Ok(Self { spec, rules })
    }

    /// The BV Laplacian: `Δ(x_i ξ_i) = 1`, zero on all other pairs.
    pub fn bv_laplacian(spec: GeneratorSpec) -> Self {
        let rules = (0..spec.n.min(spec.m))
            .map(|i| ((Generator::X(i), Generator::Xi(i)), Element::one(spec)))
            .collect();
        Self { spec, rules }
    }

    pub fn spec(&self) -> GeneratorSpec {
        self.spec
    }

    fn pair_value(&self, a: Generator, b: Generator) -> Option<Element<S>> {
        if let Some(v) = self.rules.get(&(a, b)) {
            return Some(v.clone());
        }
        self.rules.get(&(b, a)).map(|v| if a.koszul(b) < 0 { v.neg() } else { v.clone() })
    }

    pub fn apply_monomial(&self, m: &Monomial) -> Element<S> {
        let word = m.word();
        let mut out = Element::zero(self.spec);
        for i in 0..word.len() {
            for j in i + 1..word.len() {
                let Some(v) = self.pair_value(word[i], word[j]) else { continue };
                if v.is_zero() {
                    continue;
                }
                let mut sign = 1;
                for l in 0..i {
                    sign *= word[i].koszul(word[l]);
                }
                for l in 0..j {
                    if l != i {
                        sign *= word[j].koszul(word[l]);
                    }
                }
                let rest: Vec<Generator> =
                    word.iter().enumerate().filter(|&(l, _)| l != i && l != j).map(|(_, g)| *g).collect();
                let rest = Monomial::from_word(self.spec, &rest);
                out.add_scaled(&v.mul_monomial_right(&rest), &S::from_i64(sign as i64));
            }
        }
        out
    }

    pub fn apply(&self, e: &Element<S>) -> Result<Element<S>> {
        self.spec.check_same(&e.spec())?;
        let mut out = Element::zero(self.spec);
        for (m, c) in e.terms() {
            out.add_scaled(&self.apply_monomial(m), c);
        }
        Ok(out)
    }
}

/// Either kind of generator-defined operator.
#[derive(Clone, Debug)]
pub enum Operator<S: Scalar> {
    First(Derivation<S>),
    Second(SecondOrder<S>),
}

impl<S: Scalar> Operator<S> {
    pub fn order(&self) -> Order {
        match self {
            Operator::First(_) => Order::First,
            Operator::Second(_) => Order::Second,
        }
    }

    pub fn apply(&self, e: &Element<S>) -> Result<Element<S>> {
        match self {
            Operator::First(d) => d.apply(e),
            Operator::Second(d) => d.apply(e),
        }
    }

    pub fn apply_monomial(&self, m: &Monomial) -> Element<S> {
        match self {
            Operator::First(d) => d.apply_monomial(m),
            Operator::Second(d) => d.apply_monomial(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type E = Element<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn laplacian_on_low_order_and_unmatched() {
        let s = GeneratorSpec::square(2);
        let lap = SecondOrder::<Rational>::bv_laplacian(s);
        assert!(lap.apply(&E::one(s)).unwrap().is_zero());
        assert!(lap.apply(&E::x(s, 0)).unwrap().is_zero());
        let x1xi2 = E::monomial(s, &[0], &[0, 1], q(1)).unwrap();
        assert!(lap.apply(&x1xi2).unwrap().is_zero());
        let x1xi1 = E::monomial(s, &[0], &[1, 0], q(1)).unwrap();
        assert_eq!(lap.apply(&x1xi1).unwrap(), E::one(s));
    }

    #[test]
    fn laplacian_on_powers() {
        // Δ(x₁ ξ₁³) = 3 ξ₁²
        let s = GeneratorSpec::square(1);
        let lap = SecondOrder::<Rational>::bv_laplacian(s);
        let e = E::monomial(s, &[0], &[3], q(1)).unwrap();
        assert_eq!(lap.apply(&e).unwrap(), E::monomial(s, &[], &[2], q(3)).unwrap());
    }

    #[test]
    fn first_order_leibniz_sign() {
        // d(ξ₁) = x₂ with |d| = 1, even: d(ξ₁ξ₂) = x₂ξ₂ (ξ₂ untouched).
        let s = GeneratorSpec::square(2);
        let rules = BTreeMap::from([(Generator::Xi(0), E::x(s, 1))]);
        let d = Derivation::new(s, 1, 0, rules).unwrap();
        let e = E::monomial(s, &[], &[1, 1], q(1)).unwrap();
        assert_eq!(d.apply(&e).unwrap(), E::monomial(s, &[1], &[0, 1], q(1)).unwrap());
        // d(ξ₂ξ₁) computed with ξ₁ second: passing ξ₂ gives −1, then x₂ moves left past ξ₂: −1.
        let e2 = E::xi(s, 1).mul(&E::xi(s, 0)).unwrap();
        assert_eq!(d.apply(&e2).unwrap(), E::monomial(s, &[1], &[0, 1], q(1)).unwrap());
    }
}
