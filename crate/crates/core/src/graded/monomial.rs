use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator counts: `n` anti-commuting `x` generators (ℤ-degree 0) and `m`
/// commuting `ξ` generators (ℤ-degree −1). Both kinds are odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
}

impl GeneratorSpec {
    pub const MAX_X: usize = 64;

    /// The usual `m = n` shape.
    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn new(n: usize, m: usize) -> Self {
        assert!(n <= Self::MAX_X, "at most {} x generators supported", Self::MAX_X);
        Self { n, m }
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Structure(format!("generator specs differ: {self:?} vs {other:?}")))
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> {
        let (n, m) = (self.n, self.m);
        (0..n).map(Generator::X).chain((0..m).map(Generator::Xi))
    }
}

/// A single generator, 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    X(usize),
    Xi(usize),
}

impl Generator {
    pub fn z_degree(self) -> i32 {
        match self {
            Generator::X(_) => 0,
            Generator::Xi(_) => -1,
        }
    }

    /// ℤ/2 parity; every generator is odd.
    pub fn parity(self) -> u8 {
        1
    }

    /// Koszul sign for moving `self` past `other`: `(−1)^{d₁d₂+π₁π₂}`.
    pub fn koszul(self, other: Generator) -> i32 {
        koszul_sign(self.z_degree(), self.parity(), other.z_degree(), other.parity())
    }
}

/// `(−1)^{d₁d₂+π₁π₂}`.
pub fn koszul_sign(d1: i32, p1: u8, d2: i32, p2: u8) -> i32 {
    if (d1 * d2 + i32::from(p1 * p2)).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Normal-form monomial `x_{i₁}⋯x_{i_k} ξ₁^{e₁}⋯ξ_m^{e_m}` with
/// `i₁ < ⋯ < i_k`; the sign is carried by the coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    x: u64,
    xi: Vec<u32>,
}

impl Monomial {
    pub fn one(spec: GeneratorSpec) -> Self {
        Self { x: 0, xi: vec![0; spec.m] }
    }

    /// Builds from an index set (any order, no repeats) and exponents.
    /// Returns the sign of sorting the `x` indices, or `None` if an index
    /// repeats (the product vanishes).
    pub fn from_parts(spec: GeneratorSpec, x: &[usize], xi: &[u32]) -> Result<Option<(i32, Self)>> {
        if xi.len() != spec.m {
            return Err(Error::Structure(format!("ξ exponent vector has length {}, expected {}", xi.len(), spec.m)));
        }
        let mut mask = 0u64;
        let mut sign = 1;
        for &i in x {
            if i >= spec.n {
                return Err(Error::Structure(format!("x index {i} out of range for n = {}", spec.n)));
            }
            if mask & (1 << i) != 0 {
                return Ok(None);
            }
            // inversions against indices already placed to the left
            if (mask >> i).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mask |= 1 << i;
        }
        Ok(Some((sign, Self { x: mask, xi: xi.to_vec() })))
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (0..64).filter(|i| self.x & (1 << i) != 0).collect()
    }

    pub fn xi_exps(&self) -> &[u32] {
        &self.xi
    }

    pub fn x_degree(&self) -> usize {
        self.x.count_ones() as usize
    }

    pub fn xi_degree(&self) -> usize {
        self.xi.iter().map(|&e| e as usize).sum()
    }

    /// Cohomological ℤ-degree, `−Σ eᵢ`.
    pub fn z_degree(&self) -> i32 {
        -(self.xi_degree() as i32)
    }

    pub fn parity(&self) -> u8 {
        ((self.x_degree() + self.xi_degree()) % 2) as u8
    }

    pub fn has_xi(&self) -> bool {
        self.xi.iter().any(|&e| e > 0)
    }

    pub fn contains_x(&self, i: usize) -> bool {
        self.x & (1 << i) != 0
    }

    /// Generator word in normal order (x's ascending, then ξ's with repetition).
    pub fn word(&self) -> Vec<Generator> {
        let mut w: Vec<Generator> = self.x_indices().into_iter().map(Generator::X).collect();
        for (i, &e) in self.xi.iter().enumerate() {
            for _ in 0..e {
                w.push(Generator::Xi(i));
            }
        }
        w
    }

    /// Product of normal-order words; `None` if it vanishes.
    pub fn mul(&self, other: &Monomial) -> Option<(i32, Monomial)> {
        if self.x & other.x != 0 {
            return None;
        }
        let mut sign = 1;
        // other's x's move left past self's ξ's
        if (other.x_degree() * self.xi_degree()) % 2 == 1 {
            sign = -sign;
        }
        // merge x's: each x_j of `other` passes every x_i of `self` with i > j
        let mut inversions = 0u32;
        let mut rest = other.x;
        while rest != 0 {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            inversions += (self.x >> j).count_ones();
        }
        if inversions % 2 == 1 {
            sign = -sign;
        }
        let xi = self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect();
        Some((sign, Monomial { x: self.x | other.x, xi }))
    }

    /// Monomial of a single generator.
    pub fn generator(spec: GeneratorSpec, g: Generator) -> Self {
        let mut m = Self::one(spec);
        match g {
            Generator::X(i) => m.x = 1 << i,
            Generator::Xi(i) => m.xi[i] = 1,
        }
        m
    }

    /// Product of a normal-order word segment; `word` must come from
    /// [`Monomial::word`] so that no sign arises.
    pub fn from_word(spec: GeneratorSpec, word: &[Generator]) -> Self {
        let mut m = Self::one(spec);
        for g in word {
            match *g {
                Generator::X(i) => m.x |= 1 << i,
                Generator::Xi(i) => m.xi[i] += 1,
            }
        }
        m
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for i in self.x_indices() {
            parts.push(format!("x{}", i + 1));
        }
        for (i, &e) in self.xi.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("ξ{}", i + 1)),
                _ => parts.push(format!("ξ{}^{}", i + 1, e)),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorting_sign() {
        let spec = GeneratorSpec::square(3);
        let (s, m) = Monomial::from_parts(spec, &[2, 0], &[0, 0, 0]).unwrap().unwrap();
        assert_eq!(s, -1);
        assert_eq!(m.x_indices(), vec![0, 2]);
        assert!(Monomial::from_parts(spec, &[1, 1], &[0, 0, 0]).unwrap().is_none());
        let (s, _) = Monomial::from_parts(spec, &[2, 1, 0], &[0, 0, 0]).unwrap().unwrap();
        assert_eq!(s, -1); // three transpositions
    }

    #[test]
    fn koszul_table() {
        use Generator::*;
        assert_eq!(X(0).koszul(X(1)), -1);
        assert_eq!(Xi(0).koszul(Xi(1)), 1);
        assert_eq!(X(0).koszul(Xi(0)), -1);
    }
}
