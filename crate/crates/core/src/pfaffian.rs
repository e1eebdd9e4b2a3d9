//! Pfaffians as top coefficients of `e^A`, Pfaffian homomorphisms for a
//! splitting `W = ker A ⊕ K`, and the skew extension of a linear map.
//!
//! Top-degree values are coefficients against the canonical frame
//! `x₁∧⋯∧x_n` of `Λ^top W∨`.

use crate::error::{Error, Result};
use crate::graded::{Element, GeneratorSpec, Monomial};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Skew-symmetric form on `W = S^n`, read both as `Σ_{i<j} A_ij x_i x_j`
/// in `Λ²W∨` and as the map `W → W∨`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewForm<S: Scalar> {
    matrix: Matrix<S>,
}

impl<S: Scalar> SkewForm<S> {
    /// Validates `Aᵀ = −A` (exactly, or to `1e-12` relative in numeric mode).
    pub fn new(matrix: Matrix<S>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Invalid(format!("skew form must be square, got {:?}", matrix.shape())));
        }
        let tol = 1e-12 * matrix.max_abs().max(1.0);
        let n = matrix.rows();
        for i in 0..n {
            for j in i..n {
                let s = matrix[(i, j)].clone() + matrix[(j, i)].clone();
                if !s.is_negligible(tol) {
                    return Err(Error::Invalid(format!("matrix is not skew at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn zero(n: usize) -> Self {
        Self { matrix: Matrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    /// `Σ_{i<j} A_ij x_i x_j` over `spec`, which must have `n = dim`.
    pub fn to_element_in(&self, spec: GeneratorSpec) -> Result<Element<S>> {
        if spec.n != self.dim() {
            return Err(Error::Structure(format!("form has dim {}, spec has n = {}", self.dim(), spec.n)));
        }
        let mut e = Element::zero(spec);
        let zeros = vec![0; spec.m];
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let a = &self.matrix[(i, j)];
                if !a.is_zero() {
                    let (_, m) = Monomial::from_parts(spec, &[i, j], &zeros)?.expect("distinct");
                    e.add_term(m, a.clone());
                }
            }
        }
        Ok(e)
    }

    /// The form as an element of `Λ²W∨` (no ξ generators).
    pub fn to_element(&self) -> Element<S> {
        self.to_element_in(GeneratorSpec::new(self.dim(), 0)).expect("matching dim")
    }

    /// `e^A` in `Λ*W∨`.
    pub fn exp(&self) -> Element<S> {
        self.to_element().exp_even(None).expect("ξ-free even element")
    }

    /// `A ⊕ A′` on `W ⊕ W′`, generators ordered `W` then `W′`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.direct_sum(&other.matrix) }
    }

    /// `SᵀAS`: the form pulled back along `S: W → W`.
    pub fn pull_back(&self, s: &Matrix<S>) -> Self {
        Self { matrix: s.transpose().mul(&self.matrix).mul(s) }
    }
}

/// Coefficient of `x₁⋯x_n` in `e^A`. For `n = 0` this is `1`.
pub fn pfaffian<S: Scalar>(a: &SkewForm<S>) -> S {
    a.exp().top_coefficient()
}

/// A decomposition `W = ker A ⊕ K`; both parts are stored as column bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting<S: Scalar> {
    kernel: Matrix<S>,
    complement: Matrix<S>,
}

impl<S: Scalar> Splitting<S> {
    /// Checks that `kernel` spans `ker A` and that together with
    /// `complement` it forms a basis of `W`.
    pub fn new(a: &SkewForm<S>, kernel: Matrix<S>, complement: Matrix<S>) -> Result<Self> {
        let n = a.dim();
        if kernel.rows() != n || complement.rows() != n {
            return Err(Error::Structure("splitting bases must live in W".into()));
        }
        let k = n - a.rank();
        if kernel.cols() != k || kernel.rank() != k {
            return Err(Error::Invalid(format!("kernel basis must have {k} independent columns")));
        }
        let tol = 1e-10 * a.matrix().max_abs().max(1.0);
        if a.matrix().mul(&kernel).max_abs() > tol && !(S::EXACT && a.matrix().mul(&kernel).is_zero_matrix()) {
            return Err(Error::Invalid("kernel basis is not annihilated by A".into()));
        }
        let basis = kernel.hstack(&complement);
        if basis.cols() != n || basis.rank() != n {
            return Err(Error::Invalid("kernel and complement do not form a basis".into()));
        }
        Ok(Self { kernel, complement })
    }

    /// Exact null space for the kernel; complement by greedily adding
    /// standard basis vectors.
    pub fn standard(a: &SkewForm<S>) -> Self {
        let kernel = a.matrix().null_space();
        let n = a.dim();
        let candidates = kernel.hstack(&Matrix::identity(n));
        let chosen: Vec<usize> =
            candidates.pivot_columns().into_iter().filter(|&c| c >= kernel.cols()).collect();
        let complement = candidates.select_columns(&chosen);
        Self { kernel, complement }
    }

    pub fn kernel(&self) -> &Matrix<S> {
        &self.kernel
    }

    pub fn complement(&self) -> &Matrix<S> {
        &self.complement
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.cols()
    }

    /// Rows `0..k` of `[ker | K]⁻¹`: the coframe of `(ker A)∨` that
    /// vanishes on `K`, written in the coordinates `x_i`.
    pub fn kernel_coframe(&self) -> Matrix<S> {
        let b = self.kernel.hstack(&self.complement);
        let inv = b.inverse().expect("splitting is a basis");
        let k = self.kernel_dim();
        let n = b.rows();
        Matrix::from_fn(k, n, |a, i| inv[(a, i)].clone())
    }

    /// Image of an element of `Λ*(ker A)∨` (spec `(k, 0)`) in `Λ*W∨`.
    pub fn include(&self, omega: &Element<S>) -> Result<Element<S>> {
        let k = self.kernel_dim();
        omega.spec().check_same(&GeneratorSpec::new(k, 0))?;
        let n = self.kernel.rows();
        let target = GeneratorSpec::new(n, 0);
        let cof = self.kernel_coframe();
        Ok(omega.substitute(target, |g| match g {
            crate::graded::Generator::X(a) => {
                Element::linear(target, (0..n).map(|i| (crate::graded::Generator::X(i), cof[(a, i)].clone())))
            }
            crate::graded::Generator::Xi(_) => unreachable!("spec has no ξ"),
        }))
    }
}

/// `Λ^top(ker A)∨ → Λ^top W∨`: include `omega`, multiply by `e^A`, take the
/// top coefficient. `omega` is written in the splitting's kernel coframe
/// and must be a multiple of `x₁⋯x_k`.
pub fn pfaffian_hom<S: Scalar>(a: &SkewForm<S>, s: &Splitting<S>, omega: &Element<S>) -> Result<S> {
    let k = s.kernel_dim();
    if omega.terms().any(|(m, _)| m.x_degree() != k) {
        return Err(Error::Invalid(format!("omega must have pure top kernel degree {k}")));
    }
    let included = s.include(omega)?;
    Ok(included.mul(&a.exp())?.top_coefficient())
}

/// The generator `x₁⋯x_k` of `Λ^top(ker A)∨` in the kernel coframe.
pub fn kernel_top_form<S: Scalar>(s: &Splitting<S>) -> Element<S> {
    let k = s.kernel_dim();
    let all: Vec<usize> = (0..k).collect();
    Element::monomial(GeneratorSpec::new(k, 0), &all, &[], S::one()).expect("valid")
}

/// `Ť = T ⊕ (−T∨)` on `W₀ ⊕ W₁∨` for `T: W₀ → W₁` (a `dim W₁ × dim W₀`
/// matrix), coordinates ordered `W₀` first. Block form `[[0, Tᵀ], [−T, 0]]`,
/// so that `pf(Ť) = (−1)^{n(n−1)/2} det T` for square `T`.
pub fn skew_extension<S: Scalar>(t: &Matrix<S>) -> SkewForm<S> {
    let (p, q) = t.shape();
    let n = p + q;
    let matrix = Matrix::from_fn(n, n, |i, j| {
        if i < q && j >= q {
            t[(j - q, i)].clone()
        } else if i >= q && j < q {
            -t[(i - q, j)].clone()
        } else {
            S::zero()
        }
    });
    SkewForm { matrix }
}

/// `(−1)^{n(n−1)/2}`.
pub fn reorder_sign(n: usize) -> i64 {
    if (n * n.saturating_sub(1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn form(rows: &[&[i64]]) -> SkewForm<Rational> {
        SkewForm::new(Matrix::from_i64_rows(rows)).unwrap()
    }

    /// Sum over perfect matchings, independent of the exterior algebra.
    fn matching_pfaffian(a: &Matrix<Rational>) -> Rational {
        fn rec(a: &Matrix<Rational>, free: &[usize]) -> Rational {
            if free.is_empty() {
                return q(1);
            }
            let i = free[0];
            let mut total = q(0);
            for (k, &j) in free.iter().enumerate().skip(1) {
                let rest: Vec<usize> = free.iter().copied().filter(|&l| l != i && l != j).collect();
                let sign = if k % 2 == 1 { q(1) } else { q(-1) };
                total = total + sign * a[(i, j)].clone() * rec(a, &rest);
            }
            total
        }
        let n = a.rows();
        if n % 2 == 1 {
            return q(0);
        }
        rec(a, &(0..n).collect::<Vec<_>>())
    }

    #[test]
    fn empty_and_two_by_two() {
        assert_eq!(pfaffian(&SkewForm::<Rational>::zero(0)), q(1));
        assert_eq!(pfaffian(&form(&[&[0, 5], &[-5, 0]])), q(5));
    }

    #[test]
    fn four_by_four_formula() {
        let a = form(&[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]]);
        // A12A34 − A13A24 + A14A23 = 6 − 10 + 12
        assert_eq!(pfaffian(&a), q(8));
        assert_eq!(matching_pfaffian(a.matrix()), q(8));
    }

    #[test]
    fn odd_and_degenerate_vanish() {
        assert_eq!(pfaffian(&form(&[&[0, 1, 2], &[-1, 0, 3], &[-2, -3, 0]])), q(0));
        assert_eq!(pfaffian(&form(&[&[0, 1, 1, 0], &[-1, 0, 0, 1], &[-1, 0, 0, 1], &[0, -1, -1, 0]])), q(0));
    }

    #[test]
    fn rejects_non_skew() {
        assert!(SkewForm::new(Matrix::<Rational>::from_i64_rows(&[&[0, 1], &[1, 0]])).is_err());
        assert!(SkewForm::new(Matrix::<Rational>::from_i64_rows(&[&[1, 0], &[0, 0]])).is_err());
    }

    #[test]
    fn skew_extension_signs() {
        let c = Matrix::<Rational>::from_i64_rows(&[&[7]]);
        assert_eq!(pfaffian(&skew_extension(&c)), q(7));
        assert_eq!(pfaffian(&skew_extension(&Matrix::<Rational>::identity(2))), q(-1));
        let t = Matrix::<Rational>::from_i64_rows(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]);
        assert_eq!(pfaffian(&skew_extension(&t)), q(reorder_sign(3)) * t.det_bareiss());
        let singular = Matrix::<Rational>::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(pfaffian(&skew_extension(&singular)), q(0));
    }

    #[test]
    fn hom_edge_cases() {
        let a = form(&[&[0, 3], &[-3, 0]]);
        let s = Splitting::standard(&a);
        assert_eq!(s.kernel_dim(), 0);
        assert_eq!(pfaffian_hom(&a, &s, &kernel_top_form(&s)).unwrap(), q(3));
        let z = SkewForm::<Rational>::zero(3);
        let s = Splitting::standard(&z);
        assert_eq!(pfaffian_hom(&z, &s, &kernel_top_form(&s)).unwrap(), q(1));
    }

    #[test]
    fn hom_rejects_wrong_degree() {
        let z = SkewForm::<Rational>::zero(2);
        let s = Splitting::standard(&z);
        let one = Element::one(GeneratorSpec::new(2, 0));
        assert!(pfaffian_hom(&z, &s, &one).is_err());
    }

    #[test]
    fn hom_independent_of_complement() {
        // rank 2 on a 3-dim space, kernel spanned by (1, −1, 1)ᵀ·…
        let a = form(&[&[0, 1, 1], &[-1, 0, 1], &[-1, -1, 0]]);
        let s1 = Splitting::standard(&a);
        let k = s1.kernel().clone();
        let comp2 = Matrix::<Rational>::from_i64_rows(&[&[1, 1], &[1, 0], &[0, 1]]);
        let s2 = Splitting::new(&a, k, comp2).unwrap();
        let v1 = pfaffian_hom(&a, &s1, &kernel_top_form(&s1)).unwrap();
        let v2 = pfaffian_hom(&a, &s2, &kernel_top_form(&s2)).unwrap();
        assert_eq!(v1, v2);
        assert_ne!(v1, q(0));
    }
}
