use std::collections::BTreeMap;

use super::basis::TruncatedBasis;
use super::observables::{classical_differential, laplacian_map};
use crate::complexes::{compose_retractions, perturb, CochainComplex, GradedMap, Retraction};
use crate::error::{Error, Result};
use crate::graded::{Derivation, Element, Generator, GeneratorSpec, Monomial, SecondOrder};
use crate::matrix::Matrix;
use crate::pfaffian::SkewForm;
use crate::scalar::Scalar;

/// A retraction between the generator spaces of two free algebras, given
/// on generators: `iota` on the small generators, `pi` and `eta` on the big
/// ones (generators missing from `eta` go to zero). All maps are linear.
#[derive(Clone, Debug)]
pub struct GeneratorRetraction<S: Scalar> {
    pub big: GeneratorSpec,
    pub small: GeneratorSpec,
    pub iota: BTreeMap<Generator, Element<S>>,
    pub pi: BTreeMap<Generator, Element<S>>,
    pub eta: BTreeMap<Generator, Element<S>>,
}

/// A retraction between truncated observable complexes, with the bases
/// used for its matrices.
#[derive(Clone, Debug)]
pub struct BvRetraction<S: Scalar> {
    pub retraction: Retraction<S>,
    pub big_basis: TruncatedBasis,
    pub small_basis: TruncatedBasis,
}

/// `Σ_c layers[c]` is `∏ (a_g + b_g)` split by the number `c` of `b`
/// factors used, following the word of `m`.
fn split_by_count<S: Scalar>(
    spec: GeneratorSpec,
    m: &Monomial,
    kept: &BTreeMap<Generator, Element<S>>,
    moved: &BTreeMap<Generator, Element<S>>,
) -> Vec<Element<S>> {
    let mut layers = vec![Element::one(spec)];
    for g in m.word() {
        let mut next = vec![Element::zero(spec); layers.len() + 1];
        for (c, layer) in layers.iter().enumerate() {
            if layer.is_zero() {
                continue;
            }
            next[c].add_scaled(&layer.mul_unchecked(&kept[&g]), &S::one());
            next[c + 1].add_scaled(&layer.mul_unchecked(&moved[&g]), &S::one());
        }
        layers = next;
    }
    layers
}

/// `η̃ = η_D ∘ N⁺` on the free algebra of the big generators, where `η_D`
/// is the derivation extending the generator homotopy and `N⁺` inverts
/// the count of factors in the complement of `ιπ`.
pub struct LiftedHomotopy<S: Scalar> {
    spec: GeneratorSpec,
    kept: BTreeMap<Generator, Element<S>>,
    moved: BTreeMap<Generator, Element<S>>,
    eta_d: Derivation<S>,
}

impl<S: Scalar> LiftedHomotopy<S> {
    pub fn new(data: &GeneratorRetraction<S>) -> Result<Self> {
        let iota_of = |g: Generator| data.iota.get(&g).cloned().unwrap_or_else(|| Element::zero(data.big));
        let pi_of = |g: Generator| data.pi.get(&g).cloned().unwrap_or_else(|| Element::zero(data.small));
        let kept: BTreeMap<Generator, Element<S>> =
            data.big.generators().map(|g| (g, pi_of(g).substitute(data.big, iota_of))).collect();
        let moved = data
            .big
            .generators()
            .map(|g| (g, Element::generator(data.big, g).sub(&kept[&g]).expect("same spec")))
            .collect();
        let eta_d = Derivation::new(data.big, -1, 0, data.eta.clone())?;
        Ok(Self { spec: data.big, kept, moved, eta_d })
    }

    pub fn apply_monomial(&self, m: &Monomial) -> Element<S> {
        let layers = split_by_count(self.spec, m, &self.kept, &self.moved);
        let mut rest = Element::zero(self.spec);
        for (c, layer) in layers.iter().enumerate().skip(1) {
            rest.add_scaled(layer, &S::from_ratio(1, c as i64));
        }
        self.eta_d.apply(&rest).expect("same spec")
    }

    pub fn apply(&self, e: &Element<S>) -> Element<S> {
        let mut out = Element::zero(self.spec);
        for (m, c) in e.terms() {
            out.add_scaled(&self.apply_monomial(m), c);
        }
        out
    }
}

/// Extends a generator-level retraction to the truncated free algebras:
/// `ι`, `π` as algebra maps, and `η̃ = η_D ∘ N⁺` where `η_D` is the
/// derivation extending `eta` and `N⁺` inverts the count of factors in
/// the complement of `ιπ` (zero on the image of `ιπ`).
///
/// The generator data must satisfy `πι = 1`, `dη + ηd = ιπ − 1`, `ηι = 0`,
/// `πη = 0`; the lifted homotopy then holds above the truncation floor.
pub fn lift_retraction<S: Scalar>(
    data: &GeneratorRetraction<S>,
    big_differential: &Derivation<S>,
    small_differential: &Derivation<S>,
    truncation: usize,
) -> Result<BvRetraction<S>> {
    data.big.check_same(&big_differential.spec())?;
    data.small.check_same(&small_differential.spec())?;
    let big_basis = TruncatedBasis::new(data.big, truncation);
    let small_basis = TruncatedBasis::new(data.small, truncation);
    let big = big_basis.complex(|m| big_differential.apply_monomial(m))?;
    let small = small_basis.complex(|m| small_differential.apply_monomial(m))?;

    let iota_of = |g: Generator| data.iota.get(&g).cloned().unwrap_or_else(|| Element::zero(data.big));
    let pi_of = |g: Generator| data.pi.get(&g).cloned().unwrap_or_else(|| Element::zero(data.small));

    let iota = small_basis.matrix_of(&big_basis, 0, |m| Element::term(data.small, m.clone(), S::one()).substitute(data.big, iota_of));
    let pi = big_basis.matrix_of(&small_basis, 0, |m| Element::term(data.big, m.clone(), S::one()).substitute(data.small, pi_of));

    let homotopy = LiftedHomotopy::new(data)?;
    let eta = big_basis.matrix_of(&big_basis, -1, |m| homotopy.apply_monomial(m));
    let floor = big_basis.min_degree();
    let retraction = Retraction::new(small, big, iota, pi, eta)?.with_exempt([floor]);
    Ok(BvRetraction { retraction, big_basis, small_basis })
}

/// Kernel data of a skew form with respect to a metric: a kernel basis
/// `K` (columns) and the coframe `C = (K*MK)⁻¹K*M`, which vanishes on the
/// metric-orthogonal complement of `ker A`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelData<S: Scalar> {
    pub kernel: Matrix<S>,
    pub coframe: Matrix<S>,
}

fn check_metric<S: Scalar>(m: &Matrix<S>, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::Invalid(format!("metric must be {n}×{n}")));
    }
    if !m.approx_eq(&m.adjoint(), 1e-12 * m.max_abs().max(1.0)) {
        return Err(Error::Invalid("metric must be Hermitian".into()));
    }
    for k in 1..=n {
        let idx: Vec<usize> = (0..k).collect();
        if m.submatrix(&idx, &idx).det().to_complex().re <= 0.0 {
            return Err(Error::Invalid("metric must be positive definite".into()));
        }
    }
    Ok(())
}

pub fn kernel_data<S: Scalar>(a: &SkewForm<S>, metric: Option<&Matrix<S>>) -> Result<KernelData<S>> {
    let n = a.dim();
    let kernel = a.matrix().null_space();
    let coframe = match metric {
        None => {
            let g = kernel.adjoint().mul(&kernel);
            g.inverse().expect("independent columns").mul(&kernel.adjoint())
        }
        Some(m) => {
            check_metric(m, n)?;
            let km = kernel.adjoint().mul(m);
            km.mul(&kernel).inverse().expect("positive definite").mul(&km)
        }
    };
    Ok(KernelData { kernel, coframe })
}

/// Generator-level data for a splitting `W = Y ⊕ Z` (bases as columns)
/// with `A(Y, Z) = 0` and `A` invertible on `Z`: the observables of `A`
/// retract onto those of its restriction `YᵀAY`. The homotopy inverts `A`
/// on `Z`: `x ↦ −Z(ZᵀAZ)⁻¹Zᵀ` in coefficient vectors.
pub fn splitting_data<S: Scalar>(
    a: &SkewForm<S>,
    y: &Matrix<S>,
    z: &Matrix<S>,
) -> Result<(GeneratorRetraction<S>, SkewForm<S>, Matrix<S>)> {
    let n = a.dim();
    if y.rows() != n || z.rows() != n || y.cols() + z.cols() != n {
        return Err(Error::Structure("splitting bases must together span W".into()));
    }
    let am = a.matrix();
    let scale = am.max_abs().max(1.0);
    let cross = y.transpose().mul(am).mul(z);
    let paired = if S::EXACT { !cross.is_zero_matrix() } else { cross.max_abs() > 1e-9 * scale };
    if paired {
        return Err(Error::Invalid("A pairs the two summands".into()));
    }
    let basis = y.hstack(z);
    let inv = basis.inverse().ok_or_else(|| Error::Invalid("Y and Z do not form a basis".into()))?;
    let r = y.cols();
    let coframe = Matrix::from_fn(r, n, |i, j| inv[(i, j)].clone());
    let green = z
        .mul(&z.transpose().mul(am).mul(z).inverse().ok_or_else(|| Error::Invalid("A is degenerate on Z".into()))?)
        .mul(&z.transpose());
    let restricted = y.transpose().mul(am).mul(y);
    let half = S::from_ratio(1, 2);
    let restricted = SkewForm::new(restricted.sub(&restricted.transpose()).scale(&half))?;

    let big = GeneratorSpec::square(n);
    let small = GeneratorSpec::square(r);
    let (c, k) = (&coframe, y);
    let mut data = GeneratorRetraction { big, small, iota: BTreeMap::new(), pi: BTreeMap::new(), eta: BTreeMap::new() };
    for a_ in 0..r {
        data.iota.insert(Generator::X(a_), Element::linear(big, (0..n).map(|i| (Generator::X(i), c[(a_, i)].clone()))));
        data.iota.insert(Generator::Xi(a_), Element::linear(big, (0..n).map(|i| (Generator::Xi(i), k[(i, a_)].clone()))));
    }
    for i in 0..n {
        data.pi.insert(Generator::X(i), Element::linear(small, (0..r).map(|a_| (Generator::X(a_), k[(i, a_)].clone()))));
        data.pi.insert(Generator::Xi(i), Element::linear(small, (0..r).map(|a_| (Generator::Xi(a_), c[(a_, i)].clone()))));
        let img = Element::linear(big, (0..n).map(|l| (Generator::Xi(l), -green[(l, i)].clone())));
        if !img.is_zero() {
            data.eta.insert(Generator::X(i), img);
        }
    }
    Ok((data, restricted, coframe))
}

/// Lift of [`splitting_data`] to the truncated classical observables.
pub fn splitting_retraction<S: Scalar>(
    a: &SkewForm<S>,
    y: &Matrix<S>,
    z: &Matrix<S>,
    truncation: usize,
) -> Result<(BvRetraction<S>, SkewForm<S>)> {
    let (data, restricted, _) = splitting_data(a, y, z)?;
    let lifted = lift_retraction(&data, &classical_differential(a), &classical_differential(&restricted), truncation)?;
    Ok((lifted, restricted))
}

/// The retraction of the classical observables onto the observables of
/// `ker A` with zero differential, placed via the metric-orthogonal
/// complement (standard metric by default).
pub fn classical_retraction<S: Scalar>(
    a: &SkewForm<S>,
    truncation: usize,
    metric: Option<&Matrix<S>>,
) -> Result<(BvRetraction<S>, KernelData<S>)> {
    let kd = kernel_data(a, metric)?;
    let complement = kd.coframe.null_space();
    let (lifted, _) = splitting_retraction(a, &kd.kernel, &complement, truncation)?;
    Ok((lifted, kd))
}

/// The retraction of the trivial-quantum observables on `r` pairs of
/// generators onto `Λ^top` (the line of `x₁⋯x_r`) in degree 0, with
/// homotopy `−m_ω E⁻¹`, `ω = Σ x_iξ_i`, `E = r − |x| + |ξ|`.
pub fn trivial_quantum_retraction<S: Scalar>(r: usize, truncation: usize) -> Result<BvRetraction<S>> {
    let spec = GeneratorSpec::square(r);
    let basis = TruncatedBasis::new(spec, truncation);
    let big = CochainComplex::new(
        basis.min_degree(),
        basis.dims(),
        (basis.min_degree()..0)
            .map(|k| laplacian_map::<S>(&basis).block_or_zero(k, basis.dim(k + 1), basis.dim(k)).into_owned())
            .collect(),
    )?;
    let small_basis = TruncatedBasis::new(GeneratorSpec::square(0), 0);
    let small = CochainComplex::concentrated(0, 1);
    let all: Vec<usize> = (0..r).collect();
    let (_, top) = Monomial::from_parts(spec, &all, &vec![0; r])?.expect("distinct");
    let top_pos = basis.position(&top).expect("degree 0").1;
    let mut iota_block = Matrix::zeros(basis.dim(0), 1);
    iota_block[(top_pos, 0)] = S::one();
    let mut pi_block = Matrix::zeros(1, basis.dim(0));
    pi_block[(0, top_pos)] = S::one();
    let iota = GradedMap::new(0, BTreeMap::from([(0, iota_block)]));
    let pi = GradedMap::new(0, BTreeMap::from([(0, pi_block)]));

    let omega = Element::linear(spec, []);
    let omega = (0..r).fold(omega, |acc, i| {
        let t = Element::monomial(spec, &[i], &unit(r, i), S::one()).expect("valid");
        acc.add(&t).expect("same spec")
    });
    let eta = basis.matrix_of(&basis, -1, |m| {
        let e = r as i64 - m.x_degree() as i64 + m.xi_degree() as i64;
        if e == 0 {
            return Element::zero(spec);
        }
        omega.mul_unchecked(&Element::term(spec, m.clone(), S::one())).scale(&S::from_ratio(-1, e))
    });
    let retraction = Retraction::new(small, big, iota, pi, eta)?.with_exempt([basis.min_degree()]);
    Ok(BvRetraction { retraction, big_basis: basis, small_basis })
}

fn unit(r: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; r];
    v[i] = 1;
    v
}

/// The stages of the quantum retraction.
#[derive(Clone, Debug)]
pub struct QuantumRetraction<S: Scalar> {
    pub classical: BvRetraction<S>,
    pub kernel: KernelData<S>,
    /// The classical retraction perturbed by `Δ`.
    pub perturbed: Retraction<S>,
    /// Onto the top form of the kernel observables.
    pub trivial: BvRetraction<S>,
    /// Quantum observables onto the one-dimensional space in degree 0.
    pub composite: Retraction<S>,
}

/// Perturbs the classical retraction by `Δ` and follows it with the
/// trivial-quantum retraction of the kernel observables.
pub fn quantum_retraction<S: Scalar>(
    a: &SkewForm<S>,
    truncation: usize,
    metric: Option<&Matrix<S>>,
) -> Result<QuantumRetraction<S>> {
    let n = a.dim();
    if truncation < n {
        return Err(Error::TruncationTooLow { truncation, n });
    }
    let (classical, kernel) = classical_retraction(a, truncation, metric)?;
    let delta = laplacian_map(&classical.big_basis);
    let perturbed = perturb(&classical.retraction, &delta)?;
    let trivial = trivial_quantum_retraction(kernel.kernel.cols(), truncation)?;
    let composite = compose_retractions(&trivial.retraction, &perturbed)?;
    Ok(QuantumRetraction { classical, kernel, perturbed, trivial, composite })
}

/// `π′∘(·e^A)∘ι″` applied to the generator of the kernel top form: the
/// quantum inclusion, multiplication by `e^A`, then the trivial-quantum
/// projection onto `Λ^top W∨`.
pub fn pfaffian_composite<S: Scalar>(q: &QuantumRetraction<S>, a: &SkewForm<S>) -> Result<S> {
    let basis = &q.classical.big_basis;
    let spec = basis.spec();
    let col = q.composite.iota_block(0).column(0);
    let included = basis.element(0, &col);
    let multiplied = a.to_element_in(spec)?.exp_even(None)?.mul(&included)?;
    let top = trivial_quantum_retraction::<S>(a.dim(), 0)?;
    let coords = top.big_basis.coordinates(&multiplied.map_scalars(|c| c.clone()), 0)?;
    let out = top.retraction.pi_block(0).mul_vec(&coords);
    Ok(out[0].clone())
}

/// [`pfaffian_composite`] without building the retraction matrices: the
/// perturbed inclusion is evaluated on the kernel top form alone as
/// `Σ_j (η̃Δ)^j ι(x₁⋯x_k)`, which terminates since each step lowers the
/// polynomial degree by two.
pub fn pfaffian_composite_on_top<S: Scalar>(a: &SkewForm<S>, metric: Option<&Matrix<S>>) -> Result<S> {
    let n = a.dim();
    let kd = kernel_data(a, metric)?;
    let complement = kd.coframe.null_space();
    let (data, _, _) = splitting_data(a, &kd.kernel, &complement)?;
    let k = kd.kernel.cols();
    let all: Vec<usize> = (0..k).collect();
    let top = Element::monomial(data.small, &all, &vec![0; k], S::one())?;
    let iota_of = |g: Generator| data.iota.get(&g).cloned().unwrap_or_else(|| Element::zero(data.big));
    let homotopy = LiftedHomotopy::new(&data)?;
    let delta = SecondOrder::<S>::bv_laplacian(data.big);
    let mut term = top.substitute(data.big, iota_of);
    let mut included = term.clone();
    for _ in 0..=n {
        term = homotopy.apply(&delta.apply(&term)?);
        if term.is_zero() {
            let multiplied = a.to_element_in(data.big)?.exp_even(None)?.mul(&included)?;
            let trivial = trivial_quantum_retraction::<S>(n, 0)?;
            let coords = trivial.big_basis.coordinates(&multiplied, 0)?;
            return Ok(trivial.retraction.pi_block(0).mul_vec(&coords)[0].clone());
        }
        included.add_scaled(&term, &S::one());
    }
    Err(Error::PerturbationNotSmall(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::verify_retraction;
    use crate::pfaffian::{pfaffian_hom, kernel_top_form, Splitting};
    use crate::scalar::Rational;

    fn form(rows: &[&[i64]]) -> SkewForm<Rational> {
        SkewForm::new(Matrix::from_i64_rows(rows)).unwrap()
    }

    fn rank2_on_4() -> SkewForm<Rational> {
        // u∧v with u = (1,2,0,-1), v = (0,1,3,1)
        let u = [1, 2, 0, -1];
        let v = [0, 1, 3, 1];
        let m = Matrix::from_fn(4, 4, |i, j| Rational::from_i64(u[i] * v[j] - u[j] * v[i]));
        SkewForm::new(m).unwrap()
    }

    #[test]
    fn omega_commutator_is_euler() {
        // [Δ, m_ω] = Δ m_ω + m_ω Δ acts on monomials by r − |x| + |ξ|.
        let r = 2;
        let spec = GeneratorSpec::square(r);
        let delta = SecondOrder::<Rational>::bv_laplacian(spec);
        let omega = Element::monomial(spec, &[0], &[1, 0], Rational::from_i64(1))
            .unwrap()
            .add(&Element::monomial(spec, &[1], &[0, 1], Rational::from_i64(1)).unwrap())
            .unwrap();
        let basis = TruncatedBasis::new(spec, 3);
        for k in -2..=0 {
            for m in basis.monomials(k) {
                let e = Element::term(spec, m.clone(), Rational::from_i64(1));
                let lhs = delta
                    .apply(&omega.mul(&e).unwrap())
                    .unwrap()
                    .add(&omega.mul(&delta.apply(&e).unwrap()).unwrap())
                    .unwrap();
                let weight = r as i64 - m.x_degree() as i64 + m.xi_degree() as i64;
                assert_eq!(lhs, e.scale(&Rational::from_i64(weight)), "{m}");
            }
        }
    }

    #[test]
    fn classical_retraction_cases() {
        for a in [
            SkewForm::zero(2),
            form(&[&[0, 3], &[-3, 0]]),
            form(&[&[0, 1, -2], &[-1, 0, 3], &[2, -3, 0]]),
            rank2_on_4(),
        ] {
            for t in 0..=3 {
                let (r, kd) = classical_retraction(&a, t, None).unwrap();
                let rep = verify_retraction(&r.retraction, 0.0);
                assert!(rep.passed(), "{:?}", rep.failures());
                assert!(r.retraction.side_conditions().iter().all(|(_, ok)| *ok));
                assert_eq!(kd.coframe.mul(&kd.kernel), Matrix::identity(kd.kernel.cols()));
            }
        }
    }

    #[test]
    fn classical_retraction_with_metric() {
        let a = form(&[&[0, 1, -2], &[-1, 0, 3], &[2, -3, 0]]);
        let m = Matrix::from_i64_rows(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, 1]]);
        let (r, _) = classical_retraction(&a, 2, Some(&m)).unwrap();
        assert!(verify_retraction(&r.retraction, 0.0).passed());
        let bad = Matrix::from_i64_rows(&[&[1, 2, 0], &[2, 1, 0], &[0, 0, 1]]);
        assert!(classical_retraction(&a, 2, Some(&bad)).is_err());
    }

    #[test]
    fn zero_form_gives_identity_data() {
        let (r, _) = classical_retraction(&SkewForm::<Rational>::zero(2), 2, None).unwrap();
        let id = GradedMap::identity(&r.retraction.big);
        assert!(r.retraction.iota.approx_eq(&id, 0.0));
        assert!(r.retraction.eta.is_zero());
    }

    #[test]
    fn composite_on_top_matches_matrices() {
        let a = rank2_on_4();
        let q = quantum_retraction(&a, 4, None).unwrap();
        assert_eq!(pfaffian_composite_on_top(&a, None).unwrap(), pfaffian_composite(&q, &a).unwrap());
    }

    #[test]
    fn trivial_quantum_retraction_verifies() {
        for r in 0..=3 {
            let t = trivial_quantum_retraction::<Rational>(r, 3).unwrap();
            let rep = verify_retraction(&t.retraction, 0.0);
            assert!(rep.passed(), "r={r} {:?}", rep.failures());
        }
    }

    #[test]
    fn quantum_retraction_and_pfaffian() {
        for a in [form(&[&[0, 3], &[-3, 0]]), form(&[&[0, 1, -2], &[-1, 0, 3], &[2, -3, 0]]), SkewForm::zero(2)] {
            let n = a.dim();
            let q = quantum_retraction(&a, n, None).unwrap();
            let rep = verify_retraction(&q.composite, 0.0);
            assert!(rep.passed(), "{:?}", rep.failures());
            let split = Splitting::new(&a, q.kernel.kernel.clone(), q.kernel.coframe.null_space()).unwrap();
            let expected = pfaffian_hom(&a, &split, &kernel_top_form(&split)).unwrap();
            assert_eq!(pfaffian_composite(&q, &a).unwrap(), expected);
            assert_eq!(pfaffian_composite_on_top(&a, None).unwrap(), expected);
        }
        assert!(matches!(
            quantum_retraction(&SkewForm::<Rational>::zero(3), 2, None),
            Err(Error::TruncationTooLow { .. })
        ));
    }
}
