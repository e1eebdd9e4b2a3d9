use std::collections::BTreeMap;
use std::fmt;

use super::monomial::{Generator, GeneratorSpec, Monomial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse element of `ℂ[x₁..x_n, ξ₁..ξ_m]` in normal form. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Element<S> {
    spec: GeneratorSpec,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> fmt::Debug for Element<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Scalar> fmt::Display for Element<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({})·{}", c.to_repr(), m)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<S: Scalar> Element<S> {
    pub fn zero(spec: GeneratorSpec) -> Self {
        Self { spec, terms: BTreeMap::new() }
    }

    pub fn one(spec: GeneratorSpec) -> Self {
        Self::constant(spec, S::one())
    }

    pub fn constant(spec: GeneratorSpec, c: S) -> Self {
        Self::term(spec, Monomial::one(spec), c)
    }

    pub fn term(spec: GeneratorSpec, m: Monomial, c: S) -> Self {
        let mut e = Self::zero(spec);
        e.add_term(m, c);
        e
    }

    pub fn generator(spec: GeneratorSpec, g: Generator) -> Self {
        Self::term(spec, Monomial::generator(spec, g), S::one())
    }

    pub fn x(spec: GeneratorSpec, i: usize) -> Self {
        Self::generator(spec, Generator::X(i))
    }

    pub fn xi(spec: GeneratorSpec, i: usize) -> Self {
        Self::generator(spec, Generator::Xi(i))
    }

    /// `c · x_{i₁}⋯x_{i_k} ξ^e` for indices in any order (sign applied).
    pub fn monomial(spec: GeneratorSpec, x: &[usize], xi: &[u32], c: S) -> Result<Self> {
        Ok(match Monomial::from_parts(spec, x, xi)? {
            None => Self::zero(spec),
            Some((s, m)) => Self::term(spec, m, if s < 0 { -c } else { c }),
        })
    }

    /// Linear combination `Σ cᵢ gᵢ` of generators.
    pub fn linear(spec: GeneratorSpec, coeffs: impl IntoIterator<Item = (Generator, S)>) -> Self {
        let mut e = Self::zero(spec);
        for (g, c) in coeffs {
            e.add_term(Monomial::generator(spec, g), c);
        }
        e
    }

    pub fn spec(&self) -> GeneratorSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, S)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coefficient(&Monomial::one(self.spec))
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Element<S>, c: &S) {
        debug_assert_eq!(self.spec, other.spec);
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v.clone() * c.clone());
        }
    }

    pub fn add(&self, other: &Element<S>) -> Result<Element<S>> {
        self.spec.check_same(&other.spec)?;
        let mut out = self.clone();
        out.add_scaled(other, &S::one());
        Ok(out)
    }

    pub fn sub(&self, other: &Element<S>) -> Result<Element<S>> {
        self.spec.check_same(&other.spec)?;
        let mut out = self.clone();
        out.add_scaled(other, &-S::one());
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Element<S> {
        let mut out = Self::zero(self.spec);
        out.add_scaled(self, c);
        out
    }

    pub fn neg(&self) -> Element<S> {
        self.scale(&-S::one())
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Element<S>) -> Result<Element<S>> {
        self.spec.check_same(&other.spec)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Element<S>) -> Element<S> {
        let mut out = Self::zero(self.spec);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((s, m)) = ma.mul(mb) {
                    let c = ca.clone() * cb.clone();
                    out.add_term(m, if s < 0 { -c } else { c });
                }
            }
        }
        out
    }

    /// Multiplies on the right by a monomial with coefficient 1.
    pub(crate) fn mul_monomial_right(&self, mono: &Monomial) -> Element<S> {
        let mut out = Self::zero(self.spec);
        for (ma, ca) in &self.terms {
            if let Some((s, m)) = ma.mul(mono) {
                out.add_term(m, if s < 0 { -ca.clone() } else { ca.clone() });
            }
        }
        out
    }

    pub(crate) fn mul_monomial_left(&self, mono: &Monomial) -> Element<S> {
        let mut out = Self::zero(self.spec);
        for (mb, cb) in &self.terms {
            if let Some((s, m)) = mono.mul(mb) {
                out.add_term(m, if s < 0 { -cb.clone() } else { cb.clone() });
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Element<S> {
        let mut acc = Self::one(self.spec);
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Terms with `|x| = x_degree` and `Σ ξ-exponents = xi_degree`.
    pub fn project_degree(&self, x_degree: usize, xi_degree: usize) -> Element<S> {
        self.filter(|m| m.x_degree() == x_degree && m.xi_degree() == xi_degree)
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Element<S> {
        Self {
            spec: self.spec,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Coefficient of `x₁⋯x_n` (the canonical-frame top form).
    pub fn top_coefficient(&self) -> S {
        let all: Vec<usize> = (0..self.spec.n).collect();
        let (_, top) = Monomial::from_parts(self.spec, &all, &vec![0; self.spec.m])
            .expect("valid indices")
            .expect("distinct indices");
        self.coefficient(&top)
    }

    pub fn has_xi(&self) -> bool {
        self.terms.keys().any(Monomial::has_xi)
    }

    /// Parity if homogeneous, `None` for mixed parity or zero.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.terms.keys().map(Monomial::parity);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// ℤ-degree if homogeneous.
    pub fn z_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(Monomial::z_degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// `Σ_k a^k / k!`. Without `order` the input must be nilpotent, i.e.
    /// ξ-free with vanishing constant term; with `order` the series is
    /// cut after `a^order / order!`.
    pub fn exp_even(&self, order: Option<usize>) -> Result<Element<S>> {
        if !self.is_zero() && self.parity() != Some(0) {
            return Err(Error::Invalid("exp_even needs an even element".into()));
        }
        let nilpotent = !self.has_xi() && self.constant_term().is_zero();
        let max_k = match (order, nilpotent) {
            (Some(k), _) => k,
            (None, true) => self.spec.n / 2 + 1,
            (None, false) => {
                return Err(Error::Invalid("exp_even of a non-nilpotent element needs a truncation order".into()))
            }
        };
        let mut out = Self::one(self.spec);
        let mut power = Self::one(self.spec);
        let mut fact = S::one();
        for k in 1..=max_k {
            power = power.mul_unchecked(self);
            if power.is_zero() {
                break;
            }
            fact = fact * S::from_i64(k as i64);
            out.add_scaled(&power, &(S::one() / fact.clone()));
        }
        Ok(out)
    }

    /// Maps coefficients into another scalar type.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Element<T> {
        let mut out = Element::zero(self.spec);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(S::modulus).fold(0.0, f64::max)
    }

    /// Substitutes every generator by an element: the unique algebra
    /// homomorphism with the given images. The images must have the
    /// parity/degree of the generator they replace.
    pub fn substitute(&self, target: GeneratorSpec, image: impl Fn(Generator) -> Element<S>) -> Element<S> {
        let images: BTreeMap<Generator, Element<S>> = self.spec.generators().map(|g| (g, image(g))).collect();
        let mut out = Element::zero(target);
        for (m, c) in &self.terms {
            let mut acc = Element::constant(target, c.clone());
            for g in m.word() {
                acc = acc.mul_unchecked(&images[&g]);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, &S::one());
        }
        out
    }
}

impl<S: Scalar> Element<S> {
    /// Drops coefficients with `|c| <= tol` (numeric clean-up).
    pub fn chop(&self, tol: f64) -> Element<S> {
        let mut out = Element::zero(self.spec);
        for (m, c) in &self.terms {
            if !c.is_negligible(tol) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
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
    fn anticommuting_x() {
        let s = GeneratorSpec::square(2);
        let x1 = E::x(s, 0);
        let x2 = E::x(s, 1);
        let x1x2 = E::monomial(s, &[0, 1], &[0, 0], q(1)).unwrap();
        assert_eq!(x1.mul(&x2).unwrap(), x1x2);
        assert_eq!(x2.mul(&x1).unwrap(), x1x2.neg());
        assert!(x1.mul(&x1).unwrap().is_zero());
    }

    #[test]
    fn commuting_xi() {
        let s = GeneratorSpec::square(2);
        let a = E::xi(s, 0).mul(&E::xi(s, 1)).unwrap();
        let b = E::xi(s, 1).mul(&E::xi(s, 0)).unwrap();
        assert_eq!(a, b);
        let sq = E::xi(s, 0).mul(&E::xi(s, 0)).unwrap();
        assert_eq!(sq.len(), 1);
    }

    #[test]
    fn x_and_xi_anticommute() {
        let s = GeneratorSpec::square(1);
        let a = E::x(s, 0).mul(&E::xi(s, 0)).unwrap();
        let b = E::xi(s, 0).mul(&E::x(s, 0)).unwrap();
        assert_eq!(a, b.neg());
        assert_eq!(a, E::monomial(s, &[0], &[1], q(1)).unwrap());
    }

    #[test]
    fn spec_mismatch_is_structural() {
        let a = E::x(GeneratorSpec::square(1), 0);
        let b = E::x(GeneratorSpec::square(2), 0);
        assert!(matches!(a.mul(&b), Err(Error::Structure(_))));
    }

    #[test]
    fn exp_of_zero_and_square_zero() {
        let s = GeneratorSpec::square(2);
        assert_eq!(E::zero(s).exp_even(None).unwrap(), E::one(s));
        let a = E::monomial(s, &[0, 1], &[0, 0], q(5)).unwrap();
        assert_eq!(a.exp_even(None).unwrap(), E::one(s).add(&a).unwrap());
    }

    #[test]
    fn exp_rejects_non_nilpotent() {
        let s = GeneratorSpec::square(1);
        let a = E::monomial(s, &[0], &[1], q(1)).unwrap();
        assert!(a.exp_even(None).is_err());
        assert!(a.exp_even(Some(3)).is_ok());
        assert!(E::x(s, 0).exp_even(None).is_err()); // odd
        assert!(E::one(s).exp_even(None).is_err()); // unit constant term
    }

    #[test]
    fn substitute_is_homomorphism() {
        let s = GeneratorSpec::square(2);
        // swap x1 <-> x2: x1x2 -> x2x1 = -x1x2
        let e = E::monomial(s, &[0, 1], &[1, 0], q(3)).unwrap();
        let sw = e.substitute(s, |g| match g {
            Generator::X(0) => E::x(s, 1),
            Generator::X(1) => E::x(s, 0),
            other => E::generator(s, other),
        });
        assert_eq!(sw, e.neg());
    }
}
