use bvdet_core::bv::{bv_laplacian, classical_differential};
use bvdet_core::complexes::random::{nilpotent_instance, random_invertible, Shape};
use bvdet_core::complexes::{perturb, verify_retraction};
use bvdet_core::graded::{koszul_sign, Element, Generator, GeneratorSpec, Monomial};
use bvdet_core::pfaffian::{pfaffian, pfaffian_hom, kernel_top_form, Splitting};
use bvdet_core::suite::{pfaffian_by_expansion, random_skew, random_skew_with_kernel};
use bvdet_core::{Matrix, Rational, Scalar};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random element with integer coefficients and bounded polynomial degree.
fn element(spec: GeneratorSpec, terms: &[(u64, u8, i64)]) -> Element<Rational> {
    let mut e = Element::zero(spec);
    for &(mask, xi_bits, c) in terms {
        let x: Vec<usize> = (0..spec.n).filter(|i| mask >> i & 1 == 1).collect();
        let xi: Vec<u32> = (0..spec.m).map(|j| u32::from(xi_bits >> j & 1)).collect();
        if let Some((sign, m)) = Monomial::from_parts(spec, &x, &xi).unwrap() {
            e.add_term(m, Rational::from_i64(i64::from(sign) * c));
        }
    }
    e
}

fn terms() -> impl Strategy<Value = Vec<(u64, u8, i64)>> {
    prop::collection::vec((0u64..16, 0u8..16, -3i64..=3), 0..5)
}

fn homogeneous(spec: GeneratorSpec, mask: u64, xi_bits: u8, c: i64) -> Element<Rational> {
    element(spec, &[(mask, xi_bits, c)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(a in terms(), b in terms(), c in terms()) {
        let spec = GeneratorSpec::square(4);
        let (a, b, c) = (element(spec, &a), element(spec, &b), element(spec, &c));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn product_is_graded_commutative(m1 in 0u64..16, e1 in 0u8..16, m2 in 0u64..16, e2 in 0u8..16) {
        let spec = GeneratorSpec::square(4);
        let a = homogeneous(spec, m1, e1, 1);
        let b = homogeneous(spec, m2, e2, 1);
        prop_assume!(!a.is_zero() && !b.is_zero());
        let sign = koszul_sign(a.z_degree().unwrap(), a.parity().unwrap(), b.z_degree().unwrap(), b.parity().unwrap());
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap().scale(&Rational::from_i64(i64::from(sign)));
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn odd_generators_square_to_zero(i in 0usize..4) {
        let spec = GeneratorSpec::square(4);
        let x = Element::<Rational>::generator(spec, Generator::X(i));
        prop_assert!(x.mul(&x).unwrap().is_zero());
    }

    #[test]
    fn differentials_square_to_zero(seed in any::<u64>(), t in terms()) {
        let a = random_skew(&mut rng(seed), 4);
        let spec = GeneratorSpec::square(4);
        let e = element(spec, &t);
        let flat = classical_differential(&a);
        let delta = bv_laplacian::<Rational>(4);
        prop_assert!(flat.apply(&flat.apply(&e).unwrap()).unwrap().is_zero());
        prop_assert!(delta.apply(&delta.apply(&e).unwrap()).unwrap().is_zero());
        let mixed = flat.apply(&delta.apply(&e).unwrap()).unwrap().add(&delta.apply(&flat.apply(&e).unwrap()).unwrap()).unwrap();
        prop_assert!(mixed.is_zero());
    }

    #[test]
    fn pfaffian_squares_to_determinant(seed in any::<u64>(), n in 0usize..=8) {
        let a = random_skew(&mut rng(seed), n);
        let pf = pfaffian(&a);
        prop_assert_eq!(pf.clone() * pf.clone(), a.matrix().det());
        prop_assert_eq!(pf, pfaffian_by_expansion(a.matrix()));
    }

    #[test]
    fn pfaffian_is_congruence_covariant(seed in any::<u64>(), half in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_skew(&mut r, 2 * half);
        let p = random_invertible(&mut r, 2 * half);
        prop_assert_eq!(pfaffian(&a.pull_back(&p)), p.det() * pfaffian(&a));
    }

    #[test]
    fn pfaffian_hom_ignores_complement(seed in any::<u64>(), m in 1usize..=2, k in 1usize..=2) {
        let mut r = rng(seed);
        let a = random_skew_with_kernel(&mut r, m, k);
        let standard = Splitting::standard(&a);
        let kernel = standard.kernel().clone();
        let n = a.dim();
        // shear the complement by kernel directions: still a complement
        let shear = Matrix::<Rational>::from_fn(kernel.cols(), n - k, |i, j| Rational::from_i64(((seed >> (i + 3 * j)) & 3) as i64 - 1));
        let other = Splitting::new(&a, kernel.clone(), standard.complement().add(&kernel.mul(&shear))).unwrap();
        let omega = kernel_top_form(&standard);
        let v1 = pfaffian_hom(&a, &standard, &omega).unwrap();
        let v2 = pfaffian_hom(&a, &other, &omega).unwrap();
        prop_assert!(!v1.is_zero());
        prop_assert_eq!(v1, v2);
    }

    #[test]
    fn perturbed_nilpotent_retractions_verify(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s0 = Shape::random(&mut r, 0, 3, 8);
        let s1 = Shape::random(&mut r, 0, 3, 8);
        let (base, delta) = nilpotent_instance(&mut r, &s0, &s1);
        let p = perturb(&base, &delta).unwrap();
        prop_assert!(verify_retraction(&p, 0.0).passed());
    }
}
