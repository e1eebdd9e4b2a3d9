use std::borrow::Cow;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Residual tolerance for `d∘d = 0` in numeric mode (relative to the
/// largest differential entry).
pub const DIFFERENTIAL_TOL: f64 = 1e-10;

/// A linear map between graded spaces of fixed degree. Blocks are keyed
/// by source degree; a missing block is the zero map.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMap<S: Scalar> {
    degree: i32,
    blocks: BTreeMap<i32, Matrix<S>>,
}

impl<S: Scalar> GradedMap<S> {
    pub fn new(degree: i32, blocks: BTreeMap<i32, Matrix<S>>) -> Self {
        Self { degree, blocks }
    }

    /// The zero map; carries no blocks.
    pub fn zero(degree: i32) -> Self {
        Self { degree, blocks: BTreeMap::new() }
    }

    pub fn identity(c: &CochainComplex<S>) -> Self {
        Self { degree: 0, blocks: c.degrees().map(|k| (k, Matrix::identity(c.dim(k)))).collect() }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn blocks(&self) -> &BTreeMap<i32, Matrix<S>> {
        &self.blocks
    }

    pub fn block(&self, k: i32) -> Option<&Matrix<S>> {
        self.blocks.get(&k)
    }

    pub fn set_block(&mut self, k: i32, m: Matrix<S>) {
        self.blocks.insert(k, m);
    }

    /// Block at source degree `k`, or a `rows × cols` zero matrix.
    pub fn block_or_zero(&self, k: i32, rows: usize, cols: usize) -> Cow<'_, Matrix<S>> {
        match self.blocks.get(&k) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::zeros(rows, cols)),
        }
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &GradedMap<S>) -> GradedMap<S> {
        let mut blocks = BTreeMap::new();
        for (&k, r) in &rhs.blocks {
            if let Some(l) = self.blocks.get(&(k + rhs.degree)) {
                blocks.insert(k, l.mul(r));
            }
        }
        GradedMap { degree: self.degree + rhs.degree, blocks }
    }

    fn combine(&self, other: &GradedMap<S>, sign: i64) -> GradedMap<S> {
        assert_eq!(self.degree, other.degree, "adding maps of different degree");
        let mut blocks = self.blocks.clone();
        let s = S::from_i64(sign);
        for (&k, m) in &other.blocks {
            let m = if sign < 0 { m.scale(&s) } else { m.clone() };
            let entry = match blocks.remove(&k) {
                Some(b) => b.add(&m),
                None => m,
            };
            blocks.insert(k, entry);
        }
        GradedMap { degree: self.degree, blocks }
    }

    pub fn add(&self, other: &GradedMap<S>) -> GradedMap<S> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &GradedMap<S>) -> GradedMap<S> {
        self.combine(other, -1)
    }

    pub fn scale(&self, c: &S) -> GradedMap<S> {
        GradedMap { degree: self.degree, blocks: self.blocks.iter().map(|(&k, m)| (k, m.scale(c))).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero_matrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    /// Block-wise equality with missing blocks read as zero.
    pub fn approx_eq(&self, other: &GradedMap<S>, tol: f64) -> bool {
        self.degree == other.degree && self.sub(other).blocks.values().all(|m| m.approx_eq(&Matrix::zeros(m.rows(), m.cols()), tol))
    }

    /// Checks every block has shape `target(k+deg) × source(k)` and lies
    /// in the source's degree range.
    pub fn check_shape(&self, source: &CochainComplex<S>, target: &CochainComplex<S>) -> Result<()> {
        for (&k, m) in &self.blocks {
            let want = (target.dim(k + self.degree), source.dim(k));
            if m.shape() != want {
                return Err(Error::Structure(format!(
                    "block at degree {k} has shape {:?}, expected {want:?}",
                    m.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> GradedMap<T> {
        GradedMap {
            degree: self.degree,
            blocks: self.blocks.iter().map(|(&k, m)| (k, Matrix::from_fn(m.rows(), m.cols(), |i, j| f(&m[(i, j)])))).collect(),
        }
    }
}

/// A bounded cochain complex stored degreewise-dense: spaces `V_k = S^{dim k}`
/// for `k` in `min_degree..min_degree+dims.len()`, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex<S: Scalar> {
    min_degree: i32,
    dims: Vec<usize>,
    /// `diffs[i]: V_{min+i} → V_{min+i+1}`.
    diffs: Vec<Matrix<S>>,
}

impl<S: Scalar> CochainComplex<S> {
    /// `diffs` may omit the final map into the zero space. Shapes and
    /// `d∘d = 0` are checked.
    pub fn new(min_degree: i32, dims: Vec<usize>, mut diffs: Vec<Matrix<S>>) -> Result<Self> {
        if diffs.len() + 1 == dims.len() || (dims.is_empty() && diffs.is_empty()) {
            if let Some(&last) = dims.last() {
                diffs.push(Matrix::zeros(0, last));
            }
        }
        if diffs.len() != dims.len() {
            return Err(Error::Structure(format!("{} spaces but {} differentials", dims.len(), diffs.len())));
        }
        for (i, d) in diffs.iter().enumerate() {
            let rows = dims.get(i + 1).copied().unwrap_or(0);
            if d.shape() != (rows, dims[i]) {
                return Err(Error::Structure(format!(
                    "differential out of degree {} has shape {:?}, expected {:?}",
                    min_degree + i as i32,
                    d.shape(),
                    (rows, dims[i])
                )));
            }
        }
        let c = Self { min_degree, dims, diffs };
        c.check_square_zero()?;
        Ok(c)
    }

    /// All differentials zero.
    pub fn graded_space(min_degree: i32, dims: Vec<usize>) -> Self {
        let diffs = (0..dims.len()).map(|i| Matrix::zeros(dims.get(i + 1).copied().unwrap_or(0), dims[i])).collect();
        Self { min_degree, dims, diffs }
    }

    /// Single space concentrated in `degree`.
    pub fn concentrated(degree: i32, dim: usize) -> Self {
        Self::graded_space(degree, vec![dim])
    }

    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i32 {
        self.min_degree + self.dims.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.min_degree..=self.max_degree()
    }

    pub fn dim(&self, k: i32) -> usize {
        if k < self.min_degree {
            return 0;
        }
        self.dims.get((k - self.min_degree) as usize).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> BTreeMap<i32, usize> {
        self.degrees().map(|k| (k, self.dim(k))).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `d_k: V_k → V_{k+1}` (a zero matrix outside the support).
    pub fn d(&self, k: i32) -> Cow<'_, Matrix<S>> {
        if k >= self.min_degree {
            if let Some(m) = self.diffs.get((k - self.min_degree) as usize) {
                return Cow::Borrowed(m);
            }
        }
        Cow::Owned(Matrix::zeros(self.dim(k + 1), self.dim(k)))
    }

    pub fn differential(&self) -> GradedMap<S> {
        GradedMap::new(1, self.degrees().map(|k| (k, self.d(k).into_owned())).collect())
    }

    /// Same spaces, differential `d + delta`.
    pub fn perturbed(&self, delta: &GradedMap<S>) -> Result<Self> {
        if delta.degree() != 1 {
            return Err(Error::Structure("a perturbation must have degree 1".into()));
        }
        delta.check_shape(self, self)?;
        let diffs = self
            .degrees()
            .map(|k| match delta.block(k) {
                Some(b) => self.d(k).add(b),
                None => self.d(k).into_owned(),
            })
            .collect();
        Self::new(self.min_degree, self.dims.clone(), diffs)
    }

    fn tol(&self) -> f64 {
        DIFFERENTIAL_TOL * self.diffs.iter().map(Matrix::max_abs).fold(1.0, f64::max)
    }

    /// Largest entry of `d_{k+1} d_k` over all degrees.
    pub fn square_residual(&self) -> (i32, f64) {
        let mut worst = (self.min_degree, 0.0);
        for k in self.degrees() {
            let r = self.d(k + 1).mul(&self.d(k)).max_abs();
            if r > worst.1 {
                worst = (k, r);
            }
        }
        worst
    }

    fn check_square_zero(&self) -> Result<()> {
        for k in self.degrees() {
            let dd = self.d(k + 1).mul(&self.d(k));
            let ok = if S::EXACT { dd.is_zero_matrix() } else { dd.max_abs() <= self.tol() };
            if !ok {
                return Err(Error::NotADifferential { degree: k, residual: dd.max_abs() });
            }
        }
        Ok(())
    }

    /// `dim H^k = dim V_k − rank d_k − rank d_{k−1}`.
    pub fn cohomology_dims(&self) -> BTreeMap<i32, usize> {
        let ranks: BTreeMap<i32, usize> = self.degrees().map(|k| (k, self.d(k).rank())).collect();
        self.degrees()
            .map(|k| {
                let out = ranks[&k];
                let inc = ranks.get(&(k - 1)).copied().unwrap_or(0);
                (k, self.dim(k) - out - inc)
            })
            .collect()
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> CochainComplex<T> {
        CochainComplex {
            min_degree: self.min_degree,
            dims: self.dims.clone(),
            diffs: self.diffs.iter().map(|m| Matrix::from_fn(m.rows(), m.cols(), |i, j| f(&m[(i, j)]))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfaffian::SkewForm;
    use crate::scalar::Rational;

    #[test]
    fn zero_differentials_give_dims() {
        let c = CochainComplex::<Rational>::graded_space(-1, vec![2, 3]);
        assert_eq!(c.cohomology_dims(), BTreeMap::from([(-1, 2), (0, 3)]));
    }

    #[test]
    fn identity_is_acyclic() {
        let c = CochainComplex::<Rational>::new(0, vec![1, 1], vec![Matrix::identity(1)]).unwrap();
        assert_eq!(c.cohomology_dims(), BTreeMap::from([(0, 0), (1, 0)]));
    }

    #[test]
    fn skew_map_complex() {
        // rank-nullity oracle: rank 2 form on a 3-dim space
        let a = SkewForm::new(Matrix::<Rational>::from_i64_rows(&[&[0, 1, 2], &[-1, 0, 3], &[-2, -3, 0]])).unwrap();
        let c = CochainComplex::new(0, vec![3, 3], vec![a.matrix().clone()]).unwrap();
        assert_eq!(c.cohomology_dims(), BTreeMap::from([(0, 1), (1, 1)]));
    }

    #[test]
    fn rejects_non_differential() {
        let one = Matrix::<Rational>::identity(1);
        let err = CochainComplex::new(0, vec![1, 1, 1], vec![one.clone(), one]).unwrap_err();
        assert!(matches!(err, Error::NotADifferential { degree: 0, .. }));
    }

    #[test]
    fn compose_and_add() {
        let c = CochainComplex::<Rational>::graded_space(0, vec![2]);
        let id = GradedMap::identity(&c);
        let two = id.add(&id);
        assert_eq!(two.compose(&id), two);
        assert!(two.sub(&id).sub(&id).is_zero());
    }
}
