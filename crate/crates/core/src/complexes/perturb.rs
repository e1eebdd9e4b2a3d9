use std::collections::BTreeMap;

use serde::Serialize;

use super::complex::GradedMap;
use super::retraction::{verify_retraction, Retraction, RetractionReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// How `(1 − δη)⁻¹` is computed in each degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InverseStrategy {
    /// Gaussian elimination.
    Dense,
    /// `Σ (δη)^j`, only valid when `δη` is nilpotent.
    Series,
    /// Series when `δη` is nilpotent, dense otherwise.
    #[default]
    Auto,
}

/// `δ_{k−1}η_k` as a map `V_k → V_k`.
fn delta_eta<S: Scalar>(r: &Retraction<S>, delta: &GradedMap<S>, k: i32) -> Matrix<S> {
    let v = &r.big;
    let d = delta.block_or_zero(k - 1, v.dim(k), v.dim(k - 1));
    d.mul(&r.eta_block(k))
}

/// Powers of `m` summed until they vanish; `None` if `m` is not nilpotent.
fn geometric_series<S: Scalar>(m: &Matrix<S>, tol: f64) -> Option<Matrix<S>> {
    let n = m.rows();
    let mut sum = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for _ in 0..=n {
        power = power.mul(m);
        let negligible = if S::EXACT { power.is_zero_matrix() } else { power.max_abs() <= tol };
        if negligible {
            return Some(sum);
        }
        sum = sum.add(&power);
    }
    None
}

/// `(1 − δη)⁻¹` on every degree of the big complex.
pub fn one_minus_delta_eta_inverse<S: Scalar>(
    r: &Retraction<S>,
    delta: &GradedMap<S>,
    strategy: InverseStrategy,
) -> Result<BTreeMap<i32, Matrix<S>>> {
    let mut out = BTreeMap::new();
    for k in r.big.degrees() {
        let m = delta_eta(r, delta, k);
        let n = m.rows();
        let tol = 1e-14 * m.max_abs().max(1.0);
        let inv = match strategy {
            InverseStrategy::Dense => Matrix::identity(n).sub(&m).inverse(),
            InverseStrategy::Series => geometric_series(&m, tol),
            InverseStrategy::Auto => geometric_series(&m, tol).or_else(|| Matrix::identity(n).sub(&m).inverse()),
        };
        out.insert(k, inv.ok_or(Error::PerturbationNotSmall(k))?);
    }
    Ok(out)
}

/// Transfers the perturbation `delta` of the big differential across `r`:
///
/// `δ_W = π(1−δη)⁻¹δι`, `ι′ = ι + η(1−δη)⁻¹δι`, `π′ = π + π(1−δη)⁻¹δη`,
/// `η′ = η + η(1−δη)⁻¹δη`.
pub fn perturb_with<S: Scalar>(
    r: &Retraction<S>,
    delta: &GradedMap<S>,
    strategy: InverseStrategy,
) -> Result<Retraction<S>> {
    let big = r.big.perturbed(delta)?;
    let inv = one_minus_delta_eta_inverse(r, delta, strategy)?;
    let v = &r.big;
    let w = &r.small;
    let mut delta_w = BTreeMap::new();
    let mut iota = BTreeMap::new();
    let mut pi = BTreeMap::new();
    let mut eta = BTreeMap::new();
    let zero = |rows, cols| Matrix::zeros(rows, cols);
    for k in r.degrees() {
        let dk = delta.block_or_zero(k, v.dim(k + 1), v.dim(k));
        let dkm = delta.block_or_zero(k - 1, v.dim(k), v.dim(k - 1));
        let inv_k = inv.get(&k).cloned().unwrap_or_else(|| zero(v.dim(k), v.dim(k)));
        let inv_k1 = inv.get(&(k + 1)).cloned().unwrap_or_else(|| zero(v.dim(k + 1), v.dim(k + 1)));

        // (1−δη)⁻¹δι : W_k → V_{k+1}
        let a_iota = inv_k1.mul(&dk).mul(&r.iota_block(k));
        delta_w.insert(k, r.pi_block(k + 1).mul(&a_iota));
        iota.insert(k, r.iota_block(k).add(&r.eta_block(k + 1).mul(&a_iota)));

        // (1−δη)⁻¹δη : V_k → V_k
        let a_eta = inv_k.mul(&dkm).mul(&r.eta_block(k));
        pi.insert(k, r.pi_block(k).add(&r.pi_block(k).mul(&a_eta)));
        eta.insert(k, r.eta_block(k).add(&r.eta_block(k).mul(&a_eta)));
    }
    let small = w.perturbed(&GradedMap::new(1, delta_w.into_iter().filter(|(k, _)| w.degrees().contains(k)).collect()))?;
    let keep = |m: BTreeMap<i32, Matrix<S>>, lo: i32, hi: i32| -> BTreeMap<i32, Matrix<S>> {
        m.into_iter().filter(|(k, _)| (lo..=hi).contains(k)).collect()
    };
    let iota = GradedMap::new(0, keep(iota, w.min_degree(), w.max_degree()));
    let pi = GradedMap::new(0, keep(pi, v.min_degree(), v.max_degree()));
    let eta = GradedMap::new(-1, keep(eta, v.min_degree(), v.max_degree()));
    Ok(Retraction::new(small, big, iota, pi, eta)?.with_exempt(r.exempt.iter().copied()))
}

/// [`perturb_with`] using [`InverseStrategy::Auto`].
pub fn perturb<S: Scalar>(r: &Retraction<S>, delta: &GradedMap<S>) -> Result<Retraction<S>> {
    perturb_with(r, delta, InverseStrategy::Auto)
}

/// Outcome of the projection-compatibility check for a tower
/// `V₁ ⇄ V₂ ⇄ V₃` with perturbations `Δ₂` on `V₂` and `Δ₃` on `V₃`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    /// `η₂Δ₃ι₂ = 0`.
    pub eta2_delta3_iota2: bool,
    /// `η₁Δ₂ι₁ = 0`.
    pub eta1_delta2_iota1: bool,
    /// `Δ₂ = π₂Δ₃ι₂`.
    pub delta2_is_transfer: bool,
    /// Transfer of `Δ₃` to `V₂` equals `Δ₂`.
    pub middle_transfer_matches: bool,
    /// `δ_{3→1} = δ_{2→1}`.
    pub differentials_agree: bool,
    /// `π′₃ = π′₁π′₂`.
    pub projections_agree: bool,
    pub differential_residual: f64,
    pub projection_residual: f64,
}

impl CompatibilityReport {
    pub fn preconditions_hold(&self) -> bool {
        self.eta2_delta3_iota2 && self.eta1_delta2_iota1 && self.delta2_is_transfer
    }

    pub fn conclusions_hold(&self) -> bool {
        self.middle_transfer_matches && self.differentials_agree && self.projections_agree
    }
}

/// For `r1: V₁ ⇄ V₂`, `r2: V₂ ⇄ V₃` compares perturbing in two steps
/// (`Δ₃` across `r2`, `Δ₂` across `r1`) with perturbing the composite by
/// `Δ₃` directly.
pub fn check_projection_compatibility<S: Scalar>(
    r1: &Retraction<S>,
    r2: &Retraction<S>,
    delta2: &GradedMap<S>,
    delta3: &GradedMap<S>,
    tol: f64,
) -> Result<CompatibilityReport> {
    let eta2_delta3_iota2 = r2.eta.compose(delta3).compose(&r2.iota).approx_eq(&GradedMap::zero(0), tol);
    let eta1_delta2_iota1 = r1.eta.compose(delta2).compose(&r1.iota).approx_eq(&GradedMap::zero(0), tol);
    let delta2_is_transfer = delta2.approx_eq(&r2.pi.compose(delta3).compose(&r2.iota), tol);

    let composite = super::retraction::compose_retractions(r1, r2)?;
    let via_composite = perturb(&composite, delta3)?;
    let step2 = perturb(r2, delta3)?;
    let step1 = perturb(r1, delta2)?;

    let d31 = via_composite.small.differential().sub(&r1.small.differential());
    let d21 = step1.small.differential().sub(&r1.small.differential());
    let d2 = step2.small.differential().sub(&r2.small.differential());
    let middle_transfer_matches = d2.approx_eq(delta2, tol);
    let differential_residual = d31.sub(&d21).max_abs();
    let differentials_agree = d31.approx_eq(&d21, tol);
    let pi_chain = step1.pi.compose(&step2.pi);
    let projection_residual = via_composite.pi.sub(&pi_chain).max_abs();
    let projections_agree = via_composite.pi.approx_eq(&pi_chain, tol);
    Ok(CompatibilityReport {
        eta2_delta3_iota2,
        eta1_delta2_iota1,
        delta2_is_transfer,
        middle_transfer_matches,
        differentials_agree,
        projections_agree,
        differential_residual,
        projection_residual,
    })
}

/// Perturbs and verifies in one step.
pub fn perturb_and_verify<S: Scalar>(
    r: &Retraction<S>,
    delta: &GradedMap<S>,
    tol: f64,
) -> Result<(Retraction<S>, RetractionReport)> {
    let p = perturb(r, delta)?;
    let rep = verify_retraction(&p, tol);
    Ok((p, rep))
}
