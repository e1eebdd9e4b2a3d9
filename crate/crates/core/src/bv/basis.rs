use std::collections::{BTreeMap, HashMap};

use crate::complexes::{CochainComplex, GradedMap};
use crate::error::{Error, Result};
use crate::graded::{Element, GeneratorSpec, Monomial};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Monomials of `ℂ[x, ξ]` with total ξ-exponent at most `truncation`,
/// grouped by cohomological degree `−(ξ-count)`.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    spec: GeneratorSpec,
    truncation: usize,
    levels: Vec<Vec<Monomial>>,
    index: Vec<HashMap<Monomial, usize>>,
}

fn exponent_vectors(m: usize, total: u32) -> Vec<Vec<u32>> {
    if m == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in exponent_vectors(m - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl TruncatedBasis {
    pub fn new(spec: GeneratorSpec, truncation: usize) -> Self {
        let masks: Vec<u64> = {
            let mut v: Vec<u64> = (0..1u64 << spec.n).collect();
            v.sort_by_key(|m| (m.count_ones(), *m));
            v
        };
        let mut levels = Vec::with_capacity(truncation + 1);
        let mut index = Vec::with_capacity(truncation + 1);
        for j in 0..=truncation {
            let mut level = Vec::new();
            for xi in exponent_vectors(spec.m, j as u32) {
                for &mask in &masks {
                    let x: Vec<usize> = (0..spec.n).filter(|i| mask & (1 << i) != 0).collect();
                    let (_, mono) = Monomial::from_parts(spec, &x, &xi).expect("in range").expect("distinct");
                    level.push(mono);
                }
            }
            index.push(level.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect());
            levels.push(level);
        }
        Self { spec, truncation, levels, index }
    }

    pub fn spec(&self) -> GeneratorSpec {
        self.spec
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn min_degree(&self) -> i32 {
        -(self.truncation as i32)
    }

    fn level(&self, degree: i32) -> Option<usize> {
        let j = usize::try_from(-degree).ok()?;
        (j <= self.truncation).then_some(j)
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.level(degree).map_or(0, |j| self.levels[j].len())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().rev().map(Vec::len).collect()
    }

    pub fn monomials(&self, degree: i32) -> &[Monomial] {
        self.level(degree).map_or(&[], |j| &self.levels[j])
    }

    pub fn position(&self, m: &Monomial) -> Option<(i32, usize)> {
        let j = m.xi_degree();
        let i = *self.index.get(j)?.get(m)?;
        Some((-(j as i32), i))
    }

    /// Coordinates of a degree-homogeneous element; terms of another degree
    /// or beyond the truncation are an error.
    pub fn coordinates<S: Scalar>(&self, e: &Element<S>, degree: i32) -> Result<Vec<S>> {
        self.spec.check_same(&e.spec())?;
        let mut v = vec![S::zero(); self.dim(degree)];
        for (m, c) in e.terms() {
            match self.position(m) {
                Some((k, i)) if k == degree => v[i] = c.clone(),
                _ => return Err(Error::Invalid(format!("term {m} is not in degree {degree} of the truncation"))),
            }
        }
        Ok(v)
    }

    pub fn element<S: Scalar>(&self, degree: i32, coords: &[S]) -> Element<S> {
        let mut e = Element::zero(self.spec);
        for (m, c) in self.monomials(degree).iter().zip(coords) {
            e.add_term(m.clone(), c.clone());
        }
        e
    }

    /// Matrix of a linear map of fixed degree shift, given on monomials.
    /// Terms falling outside `target` are dropped: this is how maps that
    /// raise ξ-degree are cut at the truncation.
    pub fn matrix_of<S: Scalar>(
        &self,
        target: &TruncatedBasis,
        shift: i32,
        f: impl Fn(&Monomial) -> Element<S>,
    ) -> GradedMap<S> {
        let mut blocks = BTreeMap::new();
        for k in self.min_degree()..=0 {
            let (rows, cols) = (target.dim(k + shift), self.dim(k));
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = Matrix::zeros(rows, cols);
            for (c, mono) in self.monomials(k).iter().enumerate() {
                for (img, v) in f(mono).terms() {
                    if let Some((deg, r)) = target.position(img) {
                        debug_assert_eq!(deg, k + shift, "map is not homogeneous");
                        m[(r, c)] = v.clone();
                    }
                }
            }
            blocks.insert(k, m);
        }
        GradedMap::new(shift, blocks)
    }

    /// The complex with differential given on monomials.
    pub fn complex<S: Scalar>(&self, d: impl Fn(&Monomial) -> Element<S>) -> Result<CochainComplex<S>> {
        let map = self.matrix_of(self, 1, d);
        let diffs = (self.min_degree()..0).map(|k| map.block_or_zero(k, self.dim(k + 1), self.dim(k)).into_owned()).collect();
        CochainComplex::new(self.min_degree(), self.dims(), diffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn dimensions() {
        for n in 0..4 {
            for t in 0..4 {
                let b = TruncatedBasis::new(GeneratorSpec::square(n), t);
                for j in 0..=t {
                    let sym = if n == 0 { usize::from(j == 0) } else { binom(n + j - 1, j) };
                    assert_eq!(b.dim(-(j as i32)), (1 << n) * sym);
                }
                assert_eq!(b.dim(1), 0);
                assert_eq!(b.dim(-(t as i32) - 1), 0);
            }
        }
    }

    #[test]
    fn positions_round_trip() {
        let b = TruncatedBasis::new(GeneratorSpec::square(2), 2);
        for k in -2..=0 {
            for (i, m) in b.monomials(k).iter().enumerate() {
                assert_eq!(b.position(m), Some((k, i)));
            }
        }
    }
}
