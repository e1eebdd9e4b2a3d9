use serde::Serialize;

use super::bundle::transition_value;
use super::spectral::{CutoffBundle, CutoffFrames};
use crate::bv::{berezin, classical_differential, laplacian_map, lift_retraction, splitting_data, BvRetraction, TruncatedBasis};
use crate::complexes::{perturb, GradedMap, Retraction};
use crate::error::{Error, Result};
use crate::graded::Element;
use crate::matrix::Matrix;
use crate::pfaffian::{skew_extension, SkewForm};
use crate::scalar::Scalar;

/// `Y = K⁺ ⊕ conj(K⁻)` inside `W = W₀ ⊕ W₁∨`.
fn block_frame<S: Scalar>(plus: &Matrix<S>, minus: &Matrix<S>) -> Matrix<S> {
    plus.direct_sum(&minus.conj())
}

/// Row vector `m ↦ top coefficient of e^A·m` on the degree-0 monomials.
fn top_functional<S: Scalar>(form: &SkewForm<S>, basis: &TruncatedBasis) -> Result<Vec<S>> {
    let exp = form.to_element_in(basis.spec())?.exp_even(None)?;
    Ok(basis.monomials(0).iter().map(|m| exp.mul_unchecked(&Element::term(basis.spec(), m.clone(), S::one())).top_coefficient()).collect())
}

fn row_times<S: Scalar>(row: &[S], m: &Matrix<S>) -> Vec<S> {
    m.transpose().mul_vec(row)
}

fn max_diff<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).modulus()).fold(0.0, f64::max)
}

/// Largest entry of `a − b` in degrees above `floor`.
fn residual_above<S: Scalar>(a: &GradedMap<S>, b: &GradedMap<S>, floor: i32) -> f64 {
    a.sub(b).blocks().iter().filter(|(k, _)| **k > floor).map(|(_, m)| m.max_abs()).fold(0.0, f64::max)
}

/// Multiplication by `e` as a degree-0 map of a truncated basis.
fn multiplication<S: Scalar>(e: &Element<S>, basis: &TruncatedBasis) -> GradedMap<S> {
    basis.matrix_of(basis, 0, |m| e.mul_unchecked(&Element::term(basis.spec(), m.clone(), S::one())))
}

/// The observables of `Ť = skew_extension(D⁺)` on `W` retracted onto those
/// of `K_λ` along `W = Y ⊕ Z` (cutoff and its orthogonal complement),
/// then perturbed by `Δ`.
#[derive(Clone, Debug)]
pub struct ExpectationModel<S: Scalar> {
    pub form: SkewForm<S>,
    /// `ŤD_λ`, the restriction of `Ť` to `K_λ` in the chart frame.
    pub restricted: SkewForm<S>,
    /// Coordinates on `K_λ` of a vector of `W` (zero on `Z`).
    pub coframe: Matrix<S>,
    pub frame: Matrix<S>,
    pub classical: BvRetraction<S>,
    /// `π′_λ` and the rest of the perturbed data.
    pub quantum: Retraction<S>,
    /// `‖G − (Ť − Ȳ ŤD_λ Y*)⁺‖`, comparing the homotopy's inverse on `Z`
    /// with the Moore–Penrose pseudo-inverse of `Ť` with `K_λ` removed.
    pub green_residual: f64,
    /// `Φ_λ` on degree-0 observables, as a row over the big basis.
    pub phi_row: Vec<S>,
}

pub fn expectation_model<S: Scalar>(
    d: &Matrix<S>,
    frames: &CutoffFrames<S>,
    truncation: usize,
) -> Result<ExpectationModel<S>> {
    let form = skew_extension(d);
    let y = block_frame(&frames.plus, &frames.minus);
    let z = block_frame(&frames.plus_rest, &frames.minus_rest);
    let (data, restricted, coframe) = splitting_data(&form, &y, &z)?;
    let classical = lift_retraction(&data, &classical_differential(&form), &classical_differential(&restricted), truncation)?;
    let quantum = perturb(&classical.retraction, &laplacian_map(&classical.big_basis))?;

    let am = form.matrix();
    let green = z.mul(&z.transpose().mul(am).mul(&z).inverse().ok_or_else(|| Error::Invalid("Ť is degenerate on Z".into()))?).mul(&z.transpose());
    let outside = am.sub(&y.conj().mul(restricted.matrix()).mul(&y.adjoint()));
    let green_residual = green.sub(&outside.pseudo_inverse()).max_abs();

    let top = top_functional(&restricted, &classical.small_basis)?;
    let phi_row = row_times(&top, &quantum.pi_block(0));
    Ok(ExpectationModel { form, restricted, coframe, frame: y, classical, quantum, green_residual, phi_row })
}

impl<S: Scalar> ExpectationModel<S> {
    pub fn big_basis(&self) -> &TruncatedBasis {
        &self.classical.big_basis
    }

    /// `Φ_λ(obs)` for a degree-0 observable on `W`.
    pub fn apply(&self, obs: &Element<S>) -> Result<S> {
        let coords = self.big_basis().coordinates(obs, 0)?;
        Ok(self.phi_row.iter().zip(&coords).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    /// `Φ_λ(1)`.
    pub fn partition_function(&self) -> S {
        self.apply(&Element::one(self.big_basis().spec())).expect("1 has degree 0")
    }

    /// The full-space oracle `∫ e^Ť obs` (top coefficient).
    pub fn berezin_oracle(&self, obs: &Element<S>) -> Result<S> {
        let exp = self.form.to_element_in(self.big_basis().spec())?.exp_even(None)?;
        berezin(&exp.mul(obs)?)
    }
}

/// `Φ_λ` at sample `b` of a numeric family.
pub fn expectation_map(
    d: &Matrix<num_complex::Complex64>,
    chart: &CutoffBundle,
    b: usize,
    truncation: usize,
) -> Result<ExpectationModel<num_complex::Complex64>> {
    expectation_model(d, chart.frames(b)?, truncation)
}

/// Residuals of the compatibility of `Φ_λ` and `Φ_μ` at one sample.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionCheck {
    pub transition: String,
    /// `p_μ∘e^{ŤD_(λ,μ)}∘i = g·p_λ` on `Λ^top K_λ∨`.
    pub top_form_residual: f64,
    /// `e^{ŤD_μ}∘ι′ = e^{ŤD_(λ,μ)}∘i∘e^{ŤD_λ}` above the truncation floor.
    pub exp_intertwining_residual: f64,
    /// `π′^λ_μ∘π′_μ = π′_λ` above the truncation floor.
    pub projection_chain_residual: f64,
    /// `g·p_λe^{ŤD_λ}π′_λ = p_μe^{ŤD_μ}π′_μ` on degree-0 observables.
    pub transition_identity_residual: f64,
    /// `Φ_λ(1) − s_λ` and `Φ_μ(1) − s_μ`.
    pub partition_residual: f64,
}

impl TransitionCheck {
    pub fn diagrams_pass(&self, tol: f64) -> [bool; 3] {
        [self.top_form_residual <= tol, self.exp_intertwining_residual <= tol, self.projection_chain_residual <= tol]
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.diagrams_pass(tol).iter().all(|p| *p) && self.transition_identity_residual <= tol && self.partition_residual <= tol
    }
}

/// Compares `Φ_λ` and `Φ_μ` (`λ < μ`) at one sample, with `K_(λ,μ)`
/// spanned by `mid_plus`, `mid_minus`. The tower retraction of the
/// observables of `K_μ` onto those of `K_λ` splits `K_μ` into the image of
/// `K_λ` and of `K_(λ,μ)`.
pub fn verify_transition_identity<S: Scalar>(
    d: &Matrix<S>,
    low: &CutoffFrames<S>,
    high: &CutoffFrames<S>,
    mid_plus: &Matrix<S>,
    mid_minus: &Matrix<S>,
    truncation: usize,
) -> Result<TransitionCheck> {
    let g = transition_value(d, low, high, mid_plus, mid_minus)?;
    let lam = expectation_model(d, low, truncation)?;
    let mu = expectation_model(d, high, truncation)?;
    let floor = -(truncation as i32);

    // tower K_μ → K_λ, in the coordinates of the chart frames
    let y_mid = block_frame(mid_plus, mid_minus);
    let (ty, tz) = (mu.coframe.mul(&lam.frame), mu.coframe.mul(&y_mid));
    let (tdata, tsmall, tcoframe) = splitting_data(&mu.restricted, &ty, &tz)?;
    let tower = lift_retraction(&tdata, &classical_differential(&mu.restricted), &classical_differential(&tsmall), truncation)?;
    let tower_q = perturb(&tower.retraction, &laplacian_map(&tower.big_basis))?;
    let (kl, km) = (&tower.small_basis, &tower.big_basis);

    // ŤD_(λ,μ) on K_μ: Ť on K_(λ,μ), pulled back along the coordinates
    // K_μ → K_(λ,μ) of the split
    let basis = ty.hstack(&tz);
    let inv = basis.inverse().ok_or_else(|| Error::Numerical("tower split is not a basis".into()))?;
    let rl = ty.cols();
    let mid_coords = Matrix::from_fn(tz.cols(), basis.rows(), |i, j| inv[(rl + i, j)].clone());
    let mid_form = y_mid.transpose().mul(lam.form.matrix()).mul(&y_mid);
    let mid_form = mid_coords.transpose().mul(&mid_form).mul(&mid_coords);
    let half = S::from_ratio(1, 2);
    let mid_form = SkewForm::new(mid_form.sub(&mid_form.transpose()).scale(&half))?;
    let exp_mid = mid_form.to_element_in(km.spec())?.exp_even(None)?;
    let exp_mu = mu.restricted.to_element_in(km.spec())?.exp_even(None)?;
    let exp_lam = lam.restricted.to_element_in(kl.spec())?.exp_even(None)?;
    debug_assert_eq!(tcoframe.rows(), rl);

    // top forms
    let all: Vec<usize> = (0..rl).collect();
    let top_l = Element::monomial(kl.spec(), &all, &vec![0; rl], S::one())?;
    let included = top_l.substitute(km.spec(), |gen| tdata.iota.get(&gen).cloned().unwrap_or_else(|| Element::zero(km.spec())));
    let top_form_residual = (exp_mid.mul(&included)?.top_coefficient() - g.clone()).modulus();

    let lhs = multiplication(&exp_mu, km).compose(&tower_q.iota);
    let rhs = multiplication(&exp_mid, km).compose(&tower.retraction.iota).compose(&multiplication(&exp_lam, kl));
    let exp_intertwining_residual = residual_above(&lhs, &rhs, floor);

    let chain = tower_q.pi.compose(&mu.quantum.pi);
    let projection_chain_residual = residual_above(&chain, &lam.quantum.pi, floor);

    let scaled: Vec<S> = lam.phi_row.iter().map(|v| g.clone() * v.clone()).collect();
    let transition_identity_residual = max_diff(&scaled, &mu.phi_row);

    let (sl, sh) = (super::bundle::section_value(d, low)?, super::bundle::section_value(d, high)?);
    let partition_residual =
        (lam.partition_function() - sl).modulus().max((mu.partition_function() - sh).modulus());
    Ok(TransitionCheck {
        transition: g.to_repr(),
        top_form_residual,
        exp_intertwining_residual,
        projection_chain_residual,
        transition_identity_residual,
        partition_residual,
    })
}
