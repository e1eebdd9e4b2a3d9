//! Families with rational spectra, `D⁺(t) = Q₁ diag(σ(t)) Q₀ᵀ` with `Q₀`,
//! `Q₁` rational orthogonal and `σ_i(t)` affine in `t`, so that cutoff
//! frames are columns of `Q₀`, `Q₁` and everything runs in exact
//! arithmetic.

use num_traits::{One, Zero};

use super::bundle::{section_value, transition_value};
use super::expectation::{expectation_model, verify_transition_identity, TransitionCheck};
use super::spectral::CutoffFrames;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

/// `(1 − S)(1 + S)⁻¹`, orthogonal for skew `S`.
pub fn cayley(s: &Matrix<Rational>) -> Result<Matrix<Rational>> {
    let n = s.rows();
    if !s.add(&s.transpose()).is_zero_matrix() {
        return Err(Error::Invalid("Cayley transform needs a skew matrix".into()));
    }
    let id = Matrix::identity(n);
    let inv = id.add(s).inverse().ok_or_else(|| Error::Invalid("1 + S is singular".into()))?;
    Ok(id.sub(s).mul(&inv))
}

fn rotation(s: Rational) -> Matrix<Rational> {
    let z = Rational::zero();
    cayley(&Matrix::from_rows(vec![vec![z.clone(), -s.clone()], vec![s, z]])).expect("1 + S is invertible")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyFamily {
    pub q0: Matrix<Rational>,
    pub q1: Matrix<Rational>,
    /// `σ_i(t) = slopes[i]·t + offsets[i]`.
    pub slopes: Vec<Rational>,
    pub offsets: Vec<Rational>,
}

impl ToyFamily {
    /// Two dimensions, `σ = (t − 1/2, 2)`: the first singular value crosses
    /// zero at `t = 1/2`, the second sits between thresholds 1 and 5.
    pub fn standard() -> Self {
        Self {
            q0: rotation(Rational::from_ratio(1, 2)),
            q1: rotation(Rational::from_ratio(-2, 3)),
            slopes: vec![Rational::one(), Rational::zero()],
            offsets: vec![Rational::from_ratio(-1, 2), Rational::from_i64(2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.slopes.len()
    }

    pub fn singular_values(&self, t: &Rational) -> Vec<Rational> {
        self.slopes.iter().zip(&self.offsets).map(|(a, b)| a * t + b).collect()
    }

    pub fn operator(&self, t: &Rational) -> Matrix<Rational> {
        self.q1.mul(&Matrix::diagonal(&self.singular_values(t))).mul(&self.q0.transpose())
    }

    pub fn in_chart(&self, t: &Rational, threshold: &Rational) -> bool {
        self.singular_values(t).iter().all(|s| &(s * s) != threshold)
    }

    fn indices(&self, t: &Rational, keep: impl Fn(&Rational) -> bool) -> Vec<usize> {
        self.singular_values(t).iter().enumerate().filter(|(_, s)| keep(&(*s * *s))).map(|(i, _)| i).collect()
    }

    /// Frames of `K_λ` at `t`, or `None` outside the chart.
    pub fn frames(&self, t: &Rational, threshold: &Rational) -> Option<CutoffFrames<Rational>> {
        if !self.in_chart(t, threshold) {
            return None;
        }
        let below = self.indices(t, |s2| s2 < threshold);
        let above = self.indices(t, |s2| s2 > threshold);
        Some(CutoffFrames {
            plus: self.q0.select_columns(&below),
            minus: self.q1.select_columns(&below),
            plus_rest: self.q0.select_columns(&above),
            minus_rest: self.q1.select_columns(&above),
        })
    }

    /// Frames of `K_(λ,μ)` at `t`.
    pub fn window(&self, t: &Rational, low: &Rational, high: &Rational) -> (Matrix<Rational>, Matrix<Rational>) {
        let mid = self.indices(t, |s2| s2 > low && s2 < high);
        (self.q0.select_columns(&mid), self.q1.select_columns(&mid))
    }
}

/// Exact comparison of `Φ_λ`, `Φ_μ` and the determinant section at one
/// sample of a toy family.
#[derive(Clone, Debug)]
pub struct ToySample {
    pub t: Rational,
    pub check: TransitionCheck,
    /// `Φ_λ(1) = s_λ` exactly.
    pub partition_matches: bool,
    /// `s_μ = g s_λ` exactly.
    pub equivariant: bool,
}

/// Runs the transition checks at every sample in `U_λ ∩ U_μ`.
pub fn toy_transition_suite(
    family: &ToyFamily,
    samples: &[Rational],
    low: &Rational,
    high: &Rational,
    truncation: usize,
) -> Result<Vec<ToySample>> {
    let mut out = Vec::new();
    for t in samples {
        let (Some(fl), Some(fh)) = (family.frames(t, low), family.frames(t, high)) else { continue };
        let d = family.operator(t);
        let (mp, mm) = family.window(t, low, high);
        let check = verify_transition_identity(&d, &fl, &fh, &mp, &mm, truncation)?;
        let s_low = section_value(&d, &fl)?;
        let g = transition_value(&d, &fl, &fh, &mp, &mm)?;
        let partition_matches = expectation_model(&d, &fl, truncation)?.partition_function() == s_low;
        let equivariant = section_value(&d, &fh)? == g * s_low;
        out.push(ToySample { t: t.clone(), check, partition_matches, equivariant });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> Rational {
        Rational::from_ratio(p, r)
    }

    #[test]
    fn cayley_is_orthogonal() {
        let r = rotation(q(3, 7));
        assert_eq!(r.transpose().mul(&r), Matrix::identity(2));
        assert!(cayley(&Matrix::identity(2)).is_err());
    }

    #[test]
    fn standard_family_windows() {
        let fam = ToyFamily::standard();
        let (l, m) = (q(1, 1), q(5, 1));
        // |t − 1/2| < 1: rank 1 below λ, and K_(λ,μ) has rank (1,1)
        let f = fam.frames(&q(1, 4), &l).unwrap();
        assert_eq!(f.ranks(), (1, 1));
        assert_eq!(fam.window(&q(1, 4), &l, &m).0.cols(), 1);
        // σ₁² = 1 at t = 3/2
        assert!(fam.frames(&q(3, 2), &l).is_none());
        assert_eq!(section_value(&fam.operator(&q(1, 2)), &f).unwrap(), Rational::zero());
    }

    #[test]
    fn transition_identity_is_exact() {
        let fam = ToyFamily::standard();
        let samples: Vec<Rational> = [0, 1, 2, 3, 4, 5].iter().map(|k| q(*k, 4)).collect();
        let out = toy_transition_suite(&fam, &samples, &q(1, 1), &q(5, 1), 2).unwrap();
        assert_eq!(out.len(), samples.len());
        for s in &out {
            assert!(s.check.passed(0.0), "t = {}: {:?}", s.t, s.check);
            assert!(s.partition_matches && s.equivariant);
        }
    }
}
