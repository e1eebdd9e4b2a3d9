use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::complex::{CochainComplex, GradedMap};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Deformation retraction of `big` onto `small`: chain maps `iota`, `pi`
/// with `π∘ι = id` and a degree −1 map `eta` with `dη + ηd = ιπ − id`.
///
/// `exempt` lists degrees where the homotopy identity is not expected,
/// e.g. the lowest degree of a truncated complex, where `η` has no target.
#[derive(Clone, Debug, PartialEq)]
pub struct Retraction<S: Scalar> {
    pub small: CochainComplex<S>,
    pub big: CochainComplex<S>,
    pub iota: GradedMap<S>,
    pub pi: GradedMap<S>,
    pub eta: GradedMap<S>,
    pub exempt: BTreeSet<i32>,
}

impl<S: Scalar> Retraction<S> {
    /// Checks degrees and block shapes (not the axioms).
    pub fn new(
        small: CochainComplex<S>,
        big: CochainComplex<S>,
        iota: GradedMap<S>,
        pi: GradedMap<S>,
        eta: GradedMap<S>,
    ) -> Result<Self> {
        if iota.degree() != 0 || pi.degree() != 0 || eta.degree() != -1 {
            return Err(Error::Structure("ι, π need degree 0 and η degree −1".into()));
        }
        iota.check_shape(&small, &big)?;
        pi.check_shape(&big, &small)?;
        eta.check_shape(&big, &big)?;
        Ok(Self { small, big, iota, pi, eta, exempt: BTreeSet::new() })
    }

    pub fn with_exempt(mut self, degrees: impl IntoIterator<Item = i32>) -> Self {
        self.exempt.extend(degrees);
        self
    }

    /// `W = V`, `ι = π = id`, `η = 0`.
    pub fn identity(c: &CochainComplex<S>) -> Self {
        Self {
            small: c.clone(),
            big: c.clone(),
            iota: GradedMap::identity(c),
            pi: GradedMap::identity(c),
            eta: GradedMap::zero(-1),
            exempt: BTreeSet::new(),
        }
    }

    fn block(&self, map: &GradedMap<S>, k: i32, rows: usize, cols: usize) -> Matrix<S> {
        map.block_or_zero(k, rows, cols).into_owned()
    }

    pub fn iota_block(&self, k: i32) -> Matrix<S> {
        self.block(&self.iota, k, self.big.dim(k), self.small.dim(k))
    }

    pub fn pi_block(&self, k: i32) -> Matrix<S> {
        self.block(&self.pi, k, self.small.dim(k), self.big.dim(k))
    }

    pub fn eta_block(&self, k: i32) -> Matrix<S> {
        self.block(&self.eta, k, self.big.dim(k - 1), self.big.dim(k))
    }

    /// Degrees spanned by either complex.
    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        let lo = self.small.min_degree().min(self.big.min_degree());
        let hi = self.small.max_degree().max(self.big.max_degree());
        lo..=hi
    }

    /// Checks the side conditions `ηι = 0`, `πη = 0`, `η² = 0`.
    pub fn side_conditions(&self) -> [(&'static str, bool); 3] {
        let tol = 1e-10;
        [
            ("eta_iota", self.eta.compose(&self.iota).approx_eq(&GradedMap::zero(-1), tol)),
            ("pi_eta", self.pi.compose(&self.eta).approx_eq(&GradedMap::zero(-1), tol)),
            ("eta_squared", self.eta.compose(&self.eta).approx_eq(&GradedMap::zero(-2), tol)),
        ]
    }
}

/// One axiom checked at one degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub degree: i32,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    SmallDifferential,
    BigDifferential,
    PiIotaIdentity,
    IotaChainMap,
    PiChainMap,
    Homotopy,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::SmallDifferential => "small_differential",
            Axiom::BigDifferential => "big_differential",
            Axiom::PiIotaIdentity => "pi_iota_identity",
            Axiom::IotaChainMap => "iota_chain_map",
            Axiom::PiChainMap => "pi_chain_map",
            Axiom::Homotopy => "homotopy",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetractionReport {
    pub checks: Vec<AxiomCheck>,
    /// Degrees where the homotopy identity was not asserted.
    pub exempt: Vec<i32>,
}

impl RetractionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn axiom_passed(&self, axiom: Axiom) -> bool {
        self.checks.iter().filter(|c| c.axiom == axiom).all(|c| c.passed)
    }
}

fn residual_check<S: Scalar>(axiom: Axiom, degree: i32, diff: &Matrix<S>, tol: f64) -> AxiomCheck {
    let residual = diff.max_abs();
    let passed = if S::EXACT { diff.is_zero_matrix() } else { residual <= tol };
    AxiomCheck { axiom, degree, passed, residual }
}

/// Checks every retraction axiom degree by degree. Failures are recorded,
/// never raised. `tol` is ignored in exact mode.
pub fn verify_retraction<S: Scalar>(r: &Retraction<S>, tol: f64) -> RetractionReport {
    let mut checks = Vec::new();
    let (v, w) = (&r.big, &r.small);
    for k in r.degrees() {
        let dd_w = w.d(k + 1).mul(&w.d(k));
        checks.push(residual_check(Axiom::SmallDifferential, k, &dd_w, tol));
        let dd_v = v.d(k + 1).mul(&v.d(k));
        checks.push(residual_check(Axiom::BigDifferential, k, &dd_v, tol));

        let pi_iota = r.pi_block(k).mul(&r.iota_block(k)).sub(&Matrix::identity(w.dim(k)));
        checks.push(residual_check(Axiom::PiIotaIdentity, k, &pi_iota, tol));

        let iota_chain = v.d(k).mul(&r.iota_block(k)).sub(&r.iota_block(k + 1).mul(&w.d(k)));
        checks.push(residual_check(Axiom::IotaChainMap, k, &iota_chain, tol));

        let pi_chain = w.d(k).mul(&r.pi_block(k)).sub(&r.pi_block(k + 1).mul(&v.d(k)));
        checks.push(residual_check(Axiom::PiChainMap, k, &pi_chain, tol));

        if !r.exempt.contains(&k) {
            let lhs = v.d(k - 1).mul(&r.eta_block(k)).add(&r.eta_block(k + 1).mul(&v.d(k)));
            let rhs = r.iota_block(k).mul(&r.pi_block(k)).sub(&Matrix::identity(v.dim(k)));
            checks.push(residual_check(Axiom::Homotopy, k, &lhs.sub(&rhs), tol));
        }
    }
    RetractionReport { checks, exempt: r.exempt.iter().copied().collect() }
}

/// Composite of `r1: V₁ ⇄ V₂` and `r2: V₂ ⇄ V₃`:
/// `(ι₂ι₁, π₁π₂, η₂ + ι₂η₁π₂)`. Exempt degrees are merged.
pub fn compose_retractions<S: Scalar>(r1: &Retraction<S>, r2: &Retraction<S>) -> Result<Retraction<S>> {
    if r1.big.dims() != r2.small.dims() {
        return Err(Error::Structure("middle complexes differ in dimension".into()));
    }
    let tol = 1e-10 * r1.big.differential().max_abs().max(1.0);
    if !r1.big.differential().approx_eq(&r2.small.differential(), tol) {
        return Err(Error::Structure("middle complexes have different differentials".into()));
    }
    let iota = r2.iota.compose(&r1.iota);
    let pi = r1.pi.compose(&r2.pi);
    let eta = r2.eta.add(&r2.iota.compose(&r1.eta).compose(&r2.pi));
    let mut out = Retraction::new(r1.small.clone(), r2.big.clone(), iota, pi, eta)?;
    out.exempt = r1.exempt.union(&r2.exempt).copied().collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use std::collections::BTreeMap;

    fn acyclic_pair() -> Retraction<Rational> {
        // V = [S →id S] in degrees 0, 1 retracts onto 0.
        let big = CochainComplex::new(0, vec![1, 1], vec![Matrix::identity(1)]).unwrap();
        let small = CochainComplex::graded_space(0, vec![0, 0]);
        let eta = GradedMap::new(-1, BTreeMap::from([(1, Matrix::from_i64_rows(&[&[-1]]))]));
        Retraction::new(small, big, GradedMap::zero(0), GradedMap::zero(0), eta).unwrap()
    }

    #[test]
    fn identity_passes() {
        let c = CochainComplex::<Rational>::new(0, vec![2, 1], vec![Matrix::from_i64_rows(&[&[1, 1]])]).unwrap();
        assert!(verify_retraction(&Retraction::identity(&c), 0.0).passed());
    }

    #[test]
    fn contraction_passes_and_corruption_fails() {
        let r = acyclic_pair();
        assert!(verify_retraction(&r, 0.0).passed());
        let mut bad = r.clone();
        bad.eta = GradedMap::new(-1, BTreeMap::from([(1, Matrix::from_i64_rows(&[&[2]]))]));
        let rep = verify_retraction(&bad, 0.0);
        assert!(!rep.axiom_passed(Axiom::Homotopy));
        assert!(rep.axiom_passed(Axiom::PiIotaIdentity));
    }

    #[test]
    fn compose_with_identity() {
        let r = acyclic_pair();
        let c = compose_retractions(&r, &Retraction::identity(&r.big)).unwrap();
        assert!(verify_retraction(&c, 0.0).passed());
        assert!(c.eta.approx_eq(&r.eta, 0.0));
        let c2 = compose_retractions(&Retraction::identity(&r.small), &r).unwrap();
        assert!(c2.eta.approx_eq(&r.eta, 0.0));
    }

    #[test]
    fn compose_rejects_mismatch() {
        let r = acyclic_pair();
        assert!(compose_retractions(&r, &r).is_err());
    }
}
