//! Seeded random retractions and perturbations over the rationals.
//!
//! A random complex is assembled in an adapted basis `V_k = H_k ⊕ B_k ⊕ C_k`
//! with `d: C_k → B_{k+1}` invertible, then conjugated degreewise by a random
//! automorphism. The adapted-basis homotopy inverts `d` on `B`, so the
//! retraction onto `H` satisfies the side conditions.

use std::collections::BTreeMap;

use rand::Rng;

use super::complex::{CochainComplex, GradedMap};
use super::retraction::Retraction;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

/// Random rational in `{−r..r}/{1..den}`.
pub fn small_rational<R: Rng>(rng: &mut R, r: i64, den: i64) -> Rational {
    Rational::from_ratio(rng.gen_range(-r..=r), rng.gen_range(1..=den))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> Matrix<Rational> {
    Matrix::from_fn(rows, cols, |_, _| {
        if rng.gen_bool(density) {
            small_rational(rng, 3, 2)
        } else {
            Rational::from_i64(0)
        }
    })
}

/// Unit upper-triangular times unit lower-triangular: always invertible,
/// with an exact inverse of small height.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> Matrix<Rational> {
    let mut u = Matrix::identity(n);
    let mut l = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            if i < j && rng.gen_bool(0.6) {
                u[(i, j)] = small_rational(rng, 2, 1);
            } else if i > j && rng.gen_bool(0.6) {
                l[(i, j)] = small_rational(rng, 2, 1);
            }
        }
    }
    let p: Vec<usize> = {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        idx
    };
    let perm = Matrix::from_fn(n, n, |i, j| if p[i] == j { Rational::from_i64(1) } else { Rational::from_i64(0) });
    perm.mul(&u).mul(&l)
}

/// Adapted-basis shape: `(h_k, b_k, c_k)` per degree with `c_k = b_{k+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub min_degree: i32,
    pub h: Vec<usize>,
    /// `b[i]` is the rank of `d` into degree `min+i`; `b[0] = 0`.
    pub b: Vec<usize>,
}

impl Shape {
    pub fn dims(&self) -> Vec<usize> {
        (0..self.h.len()).map(|i| self.h[i] + self.b[i] + self.c(i)).collect()
    }

    pub fn c(&self, i: usize) -> usize {
        self.b.get(i + 1).copied().unwrap_or(0)
    }

    pub fn random<R: Rng>(rng: &mut R, min_degree: i32, len: usize, max_total: usize) -> Self {
        loop {
            let h: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=2)).collect();
            let mut b: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=2)).collect();
            b[0] = 0;
            let s = Shape { min_degree, h, b };
            let total: usize = s.dims().iter().sum();
            if total > 0 && total <= max_total {
                return s;
            }
        }
    }

    /// Another shape with the same `dims`, chosen at random.
    pub fn reshuffle<R: Rng>(&self, rng: &mut R) -> Self {
        let dims = self.dims();
        let len = dims.len();
        let mut b = vec![0; len];
        for i in 1..len {
            // need b[i] + c(i−1)-constraint: b[i] ≤ dims[i−1] − b[i−1], and ≤ dims[i]
            let cap = (dims[i - 1] - b[i - 1]).min(dims[i]);
            b[i] = rng.gen_range(0..=cap);
        }
        let h = (0..len).map(|i| dims[i] - b[i] - b.get(i + 1).copied().unwrap_or(0)).collect();
        Shape { min_degree: self.min_degree, h, b }
    }
}

/// Adapted-basis retraction before conjugation.
struct Adapted {
    d: Vec<Matrix<Rational>>,
    iota: Vec<Matrix<Rational>>,
    pi: Vec<Matrix<Rational>>,
    eta: Vec<Matrix<Rational>>,
}

fn adapted<R: Rng>(rng: &mut R, s: &Shape) -> Adapted {
    let dims = s.dims();
    let len = dims.len();
    let zero = Rational::from_i64(0);
    let mut d = Vec::new();
    let mut iota = Vec::new();
    let mut pi = Vec::new();
    let mut eta = Vec::new();
    for i in 0..len {
        let (h, b, c) = (s.h[i], s.b[i], s.c(i));
        // d_i: C_i → B_{i+1}; coordinates of V_{i+1} are (H, B, C)
        let next = dims.get(i + 1).copied().unwrap_or(0);
        let mut di = Matrix::zeros(next, dims[i]);
        let m = random_invertible(rng, c);
        let hn = s.h.get(i + 1).copied().unwrap_or(0);
        for r in 0..c {
            for q in 0..c {
                di[(hn + r, h + b + q)] = m[(r, q)].clone();
            }
        }
        d.push(di);
        iota.push(Matrix::from_fn(dims[i], h, |r, q| if r == q { Rational::from_i64(1) } else { zero.clone() }));
        pi.push(Matrix::from_fn(h, dims[i], |r, q| if r == q { Rational::from_i64(1) } else { zero.clone() }));
        // η_i: B_i → C_{i−1} by −(d_{i−1}|_C)⁻¹
        let prev = if i == 0 { 0 } else { dims[i - 1] };
        let mut ei = Matrix::zeros(prev, dims[i]);
        if b > 0 {
            let dprev: &Matrix<Rational> = &d[i - 1];
            let hp = s.h[i - 1] + s.b[i - 1];
            let block = Matrix::from_fn(b, b, |r, q| dprev[(h + r, hp + q)].clone());
            let inv = block.inverse().expect("invertible block").neg();
            for r in 0..b {
                for q in 0..b {
                    ei[(hp + r, h + q)] = inv[(r, q)].clone();
                }
            }
        }
        eta.push(ei);
    }
    Adapted { d, iota, pi, eta }
}

/// Random retraction onto cohomology with zero small differential,
/// conjugated into a generic basis. Side conditions hold.
pub fn random_retraction<R: Rng>(rng: &mut R, s: &Shape) -> Retraction<Rational> {
    let a = adapted(rng, s);
    let dims = s.dims();
    let len = dims.len();
    let p: Vec<Matrix<Rational>> = dims.iter().map(|&n| random_invertible(rng, n)).collect();
    let pinv: Vec<Matrix<Rational>> = p.iter().map(|m| m.inverse().expect("invertible")).collect();
    let k0 = s.min_degree;
    let deg = |i: usize| k0 + i as i32;
    let mut diffs = Vec::new();
    let mut iota = BTreeMap::new();
    let mut pi = BTreeMap::new();
    let mut eta = BTreeMap::new();
    for i in 0..len {
        let di = if i + 1 < len { p[i + 1].mul(&a.d[i]).mul(&pinv[i]) } else { Matrix::zeros(0, dims[i]) };
        diffs.push(di);
        iota.insert(deg(i), p[i].mul(&a.iota[i]));
        pi.insert(deg(i), a.pi[i].mul(&pinv[i]));
        if i > 0 {
            eta.insert(deg(i), p[i - 1].mul(&a.eta[i]).mul(&pinv[i]));
        }
    }
    let big = CochainComplex::new(k0, dims, diffs).expect("square-zero by construction");
    let small = CochainComplex::graded_space(k0, s.h.clone());
    Retraction::new(small, big, GradedMap::new(0, iota), GradedMap::new(0, pi), GradedMap::new(-1, eta))
        .expect("consistent shapes")
}

/// Breaks the side conditions without breaking the axioms:
/// `ι ↦ ι + d s`, `η ↦ η + s π` for a random degree −1 map `s: W → V`.
pub fn twist_retraction<R: Rng>(rng: &mut R, r: &Retraction<Rational>) -> Retraction<Rational> {
    let mut s_blocks = BTreeMap::new();
    for k in r.small.degrees() {
        s_blocks.insert(k, random_matrix(rng, r.big.dim(k - 1), r.small.dim(k), 0.7));
    }
    let s = GradedMap::new(-1, s_blocks);
    let ds = r.big.differential().compose(&s);
    let mut out = r.clone();
    out.iota = r.iota.add(&ds);
    out.eta = r.eta.add(&s.compose(&r.pi));
    out
}

/// `δ = d′ − d` where `d′` is the differential of an independent random
/// complex of a reshuffled shape, so cohomology may change. `(1 − δη)` is
/// usually, not always, invertible.
pub fn random_perturbation<R: Rng>(rng: &mut R, r: &Retraction<Rational>, s: &Shape) -> GradedMap<Rational> {
    let s2 = s.reshuffle(rng);
    let other = random_retraction(rng, &s2);
    let target = other.big.differential();
    let mine = r.big.differential();
    target.sub(&mine)
}

/// A two-layer instance `V = V⁰ ⊕ V¹` where `δ: V¹ → V⁰` is
/// `d₀s − s d₁ + ι₀ f π₁`, so `δη` is nilpotent. Everything is conjugated
/// by a random automorphism afterwards.
pub fn nilpotent_instance<R: Rng>(
    rng: &mut R,
    s0: &Shape,
    s1: &Shape,
) -> (Retraction<Rational>, GradedMap<Rational>) {
    assert_eq!(s0.min_degree, s1.min_degree);
    assert_eq!(s0.h.len(), s1.h.len());
    let r0 = random_retraction(rng, s0);
    let r1 = random_retraction(rng, s1);
    let k0 = s0.min_degree;
    let len = s0.h.len();
    let top = k0 + len as i32 - 1;
    let mut sm = BTreeMap::new();
    let mut f = BTreeMap::new();
    for k in k0..=top {
        sm.insert(k, random_matrix(rng, r0.big.dim(k), r1.big.dim(k), 0.5));
        if k < top {
            f.insert(k, random_matrix(rng, r0.small.dim(k + 1), r1.small.dim(k), 0.7));
        }
    }
    let sm = GradedMap::new(0, sm);
    let f = GradedMap::new(1, f);
    let cross = r0
        .big
        .differential()
        .compose(&sm)
        .sub(&sm.compose(&r1.big.differential()))
        .add(&r0.iota.compose(&f).compose(&r1.pi));
    let sum = direct_sum(&r0, &r1);
    // δ in block form [[0, cross], [0, 0]]
    let mut blocks = BTreeMap::new();
    for k in k0..top {
        let c = cross.block_or_zero(k, r0.big.dim(k + 1), r1.big.dim(k)).into_owned();
        let (n0, n1) = (r0.big.dim(k), r1.big.dim(k));
        let (m0, m1) = (r0.big.dim(k + 1), r1.big.dim(k + 1));
        let mut b = Matrix::zeros(m0 + m1, n0 + n1);
        for i in 0..m0 {
            for j in 0..n1 {
                b[(i, n0 + j)] = c[(i, j)].clone();
            }
        }
        blocks.insert(k, b);
    }
    let delta = GradedMap::new(1, blocks);
    conjugate(rng, &sum, &delta)
}

/// Degreewise direct sum of two retractions.
pub fn direct_sum<S: Scalar>(a: &Retraction<S>, b: &Retraction<S>) -> Retraction<S> {
    fn sum_complex<S: Scalar>(x: &CochainComplex<S>, y: &CochainComplex<S>) -> CochainComplex<S> {
        let lo = x.min_degree().min(y.min_degree());
        let hi = x.max_degree().max(y.max_degree());
        let dims: Vec<usize> = (lo..=hi).map(|k| x.dim(k) + y.dim(k)).collect();
        let diffs = (lo..=hi).map(|k| x.d(k).direct_sum(&y.d(k))).collect();
        CochainComplex::new(lo, dims, diffs).expect("sum of complexes")
    }
    fn sum_map<S: Scalar>(
        f: &GradedMap<S>,
        g: &GradedMap<S>,
        src: (&CochainComplex<S>, &CochainComplex<S>),
        dst: (&CochainComplex<S>, &CochainComplex<S>),
        degrees: std::ops::RangeInclusive<i32>,
    ) -> GradedMap<S> {
        let d = f.degree();
        let blocks = degrees
            .map(|k| {
                let a = f.block_or_zero(k, dst.0.dim(k + d), src.0.dim(k));
                let b = g.block_or_zero(k, dst.1.dim(k + d), src.1.dim(k));
                (k, a.direct_sum(&b))
            })
            .collect();
        GradedMap::new(d, blocks)
    }
    let small = sum_complex(&a.small, &b.small);
    let big = sum_complex(&a.big, &b.big);
    let iota = sum_map(&a.iota, &b.iota, (&a.small, &b.small), (&a.big, &b.big), small.degrees());
    let pi = sum_map(&a.pi, &b.pi, (&a.big, &b.big), (&a.small, &b.small), big.degrees());
    let eta = sum_map(&a.eta, &b.eta, (&a.big, &b.big), (&a.big, &b.big), big.degrees());
    Retraction::new(small, big, iota, pi, eta).expect("sum of retractions")
}

/// Conjugates the big side of `r` and the perturbation by a random
/// degreewise automorphism `P`: `d ↦ PdP⁻¹`, `ι ↦ Pι`, `π ↦ πP⁻¹`.
pub fn conjugate<R: Rng>(
    rng: &mut R,
    r: &Retraction<Rational>,
    delta: &GradedMap<Rational>,
) -> (Retraction<Rational>, GradedMap<Rational>) {
    let big = &r.big;
    let p: BTreeMap<i32, Matrix<Rational>> = big.degrees().map(|k| (k, random_invertible(rng, big.dim(k)))).collect();
    let pinv: BTreeMap<i32, Matrix<Rational>> = p.iter().map(|(&k, m)| (k, m.inverse().expect("invertible"))).collect();
    let pm = GradedMap::new(0, p);
    let pim = GradedMap::new(0, pinv);
    let d = pm.compose(&big.differential()).compose(&pim);
    let diffs = big.degrees().map(|k| d.block_or_zero(k, big.dim(k + 1), big.dim(k)).into_owned()).collect();
    let new_big = CochainComplex::new(big.min_degree(), big.degrees().map(|k| big.dim(k)).collect(), diffs)
        .expect("conjugate of a complex");
    let out = Retraction::new(
        r.small.clone(),
        new_big,
        pm.compose(&r.iota),
        r.pi.compose(&pim),
        pm.compose(&r.eta).compose(&pim),
    )
    .expect("shapes preserved")
    .with_exempt(r.exempt.iter().copied());
    (out, pm.compose(delta).compose(&pim))
}

/// `P(d + ιΔπ)P⁻¹ − d` with `P = 1 + (1 − ιπ)M(1 − ιπ)`: a perturbation of
/// the big differential that transfers across `r` to exactly `delta`, with
/// `ηΔ′ι = 0` since `Pι = ι` and `πP = π`.
pub fn lift_perturbation<R: Rng>(rng: &mut R, r: &Retraction<Rational>, delta: &GradedMap<Rational>) -> GradedMap<Rational> {
    let big = &r.big;
    let id = GradedMap::identity(big);
    let q = id.sub(&r.iota.compose(&r.pi));
    let d = big.differential();
    let target = d.add(&r.iota.compose(delta).compose(&r.pi));
    loop {
        let m = GradedMap::new(0, big.degrees().map(|k| (k, random_matrix(rng, big.dim(k), big.dim(k), 0.5))).collect());
        let p = id.add(&q.compose(&m).compose(&q));
        let inv: Option<BTreeMap<i32, Matrix<Rational>>> =
            big.degrees().map(|k| p.block_or_zero(k, big.dim(k), big.dim(k)).inverse().map(|b| (k, b))).collect();
        if let Some(inv) = inv {
            return p.compose(&target).compose(&GradedMap::new(0, inv)).sub(&d);
        }
    }
}

/// A tower `V₁ ⇄ V₂ ⇄ V₃` with perturbations `Δ₂` of `V₂` and `Δ₃` of `V₃`
/// such that `η₂Δ₃ι₂ = 0`, `η₁Δ₂ι₁ = 0` and `Δ₂ = π₂Δ₃ι₂`.
#[derive(Clone, Debug)]
pub struct Tower {
    pub lower: Retraction<Rational>,
    pub upper: Retraction<Rational>,
    pub delta_middle: GradedMap<Rational>,
    pub delta_top: GradedMap<Rational>,
}

/// `V₂ ⇄ V₃` is the identity plus a contractible summand, conjugated by a
/// random automorphism; `V₁ ⇄ V₂` is [`random_retraction`]. The bottom
/// perturbation is a random square-zero map on `V₁`, lifted twice with
/// [`lift_perturbation`].
pub fn tower_instance<R: Rng>(rng: &mut R, min_degree: i32, len: usize, max_total: usize) -> Tower {
    let s1 = Shape::random(rng, min_degree, len, max_total / 2);
    let lower = random_retraction(rng, &s1);
    let mut b: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=1)).collect();
    b[0] = 0;
    let contractible = random_retraction(rng, &Shape { min_degree, h: vec![0; len], b });
    let sum = direct_sum(&Retraction::identity(&lower.big), &contractible);
    let (upper, _) = conjugate(rng, &sum, &GradedMap::zero(1));
    let bottom_shape = Shape { min_degree, h: s1.h.clone(), b: vec![0; len] }.reshuffle(rng);
    let bottom = random_retraction(rng, &bottom_shape).big.differential();
    let delta_middle = lift_perturbation(rng, &lower, &bottom);
    let delta_top = lift_perturbation(rng, &upper, &delta_middle);
    Tower { lower, upper, delta_middle, delta_top }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{check_projection_compatibility, perturb, verify_retraction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_retractions_are_valid_and_special() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = Shape::random(&mut rng, -1, 4, 16);
            let r = random_retraction(&mut rng, &s);
            assert!(verify_retraction(&r, 0.0).passed());
            assert!(r.side_conditions().iter().all(|(_, ok)| *ok));
            assert_eq!(r.big.cohomology_dims(), r.small.dims());
        }
    }

    #[test]
    fn twisted_retraction_still_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = Shape { min_degree: 0, h: vec![1, 1, 0], b: vec![0, 1, 1] };
        let r = random_retraction(&mut rng, &s);
        let t = twist_retraction(&mut rng, &r);
        assert!(verify_retraction(&t, 0.0).passed());
    }

    #[test]
    fn nilpotent_instance_perturbs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = Shape { min_degree: -1, h: vec![1, 1, 1], b: vec![0, 1, 1] };
        let s1 = Shape { min_degree: -1, h: vec![1, 2, 0], b: vec![0, 1, 0] };
        let (r, delta) = nilpotent_instance(&mut rng, &s0, &s1);
        assert!(verify_retraction(&r, 0.0).passed());
        let p = perturb(&r, &delta).unwrap();
        assert!(verify_retraction(&p, 0.0).passed());
    }

    #[test]
    fn tower_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let t = tower_instance(&mut rng, -1, 3, 20);
            let rep = check_projection_compatibility(&t.lower, &t.upper, &t.delta_middle, &t.delta_top, 0.0).unwrap();
            assert!(rep.preconditions_hold(), "{rep:?}");
            assert!(rep.conclusions_hold(), "{rep:?}");
            assert!(t.upper.big.perturbed(&t.delta_top).is_ok());
        }
    }
}
