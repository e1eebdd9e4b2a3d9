use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::operators::OperatorFamily;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

fn to_na(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (columns).
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: Matrix<Complex64>,
}

impl HermitianSpectrum {
    /// Number of eigenvalues below `t`.
    pub fn count_below(&self, t: f64) -> usize {
        self.values.iter().take_while(|v| **v < t).count()
    }

    /// Eigenvectors with index in `range`.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix<Complex64> {
        self.vectors.select_columns(&range.collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub fn hermitian_eigen(m: &Matrix<Complex64>) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::Structure("eigendecomposition of a non-square matrix".into()));
    }
    if m.rows() == 0 {
        return Ok(HermitianSpectrum { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(to_na(m), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(m.rows(), m.rows(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianSpectrum { values, vectors })
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix<Complex64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Smallest singular value of a square matrix (0 for the empty matrix's
/// nonexistent kernel is not meaningful, so it reports `∞`).
pub fn sigma_min(m: &Matrix<Complex64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(f64::INFINITY)
}

/// Eigenvalues of a general square matrix.
///
/// Unshifted QR can stall on matrices whose eigenvalues share a modulus
/// (permutations, say), so failures are retried on `M + cI` for a few
/// fixed generic `c`.
pub fn eigenvalues(m: &Matrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    let scale = m.max_abs().max(1.0);
    for c in [Complex64::new(0.0, 0.0), Complex64::new(0.1234, 0.0567), Complex64::new(-0.0789, 0.3141)] {
        let c = c * scale;
        let shifted = to_na(m) + DMatrix::from_diagonal_element(m.rows(), m.rows(), c);
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 100_000) {
            let (_, t) = schur.unpack();
            return Ok((0..m.rows()).map(|i| t[(i, i)] - c).collect());
        }
    }
    Err(Error::Numerical("Schur decomposition did not converge".into()))
}

/// Orthonormalizes the columns; fails if they are (numerically) dependent.
pub fn gram_schmidt(m: &Matrix<Complex64>) -> Result<Matrix<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(m.cols());
    for mut v in m.columns() {
        // twice for stability
        for _ in 0..2 {
            for u in &cols {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::Numerical("frame collapsed under projection".into()));
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(Matrix::from_columns(m.rows(), &cols))
}

/// `‖M*M − 1‖_max` for a frame `M`.
pub fn orthonormality_defect(m: &Matrix<Complex64>) -> f64 {
    m.adjoint().mul(m).sub(&Matrix::identity(m.cols())).max_abs()
}

/// Minimum distance kept between an eigenvalue of `D²` and a threshold.
pub fn gap_margin(threshold: f64) -> f64 {
    (1e-6 * threshold).max(1e-9)
}

/// Per-sample spectral data of `D_b²`, computed once per family.
#[derive(Clone, Debug)]
pub struct FamilySpectra {
    /// Of `D⁻D⁺` on `W₀`.
    pub plus: Vec<HermitianSpectrum>,
    /// Of `D⁺D⁻` on `W₁`.
    pub minus: Vec<HermitianSpectrum>,
    pub sigma_min: Vec<f64>,
    /// Operator norm of `D⁺`.
    pub norm: Vec<f64>,
}

impl FamilySpectra {
    pub fn new(family: &OperatorFamily) -> Result<Self> {
        let mut out = Self { plus: vec![], minus: vec![], sigma_min: vec![], norm: vec![] };
        for b in 0..family.len() {
            let d = family.plus(b);
            let dm = family.minus(b);
            out.plus.push(hermitian_eigen(&dm.mul(d))?);
            out.minus.push(hermitian_eigen(&d.mul(&dm))?);
            let sv = singular_values(d);
            let (p, q) = family.dims();
            // a non-square D⁺ always has a kernel on one side
            out.sigma_min.push(if p == q { sv.last().copied().unwrap_or(f64::INFINITY) } else { 0.0 });
            out.norm.push(sv.first().copied().unwrap_or(0.0));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    /// `λ ∉ spec(D_b²)` with the gap margin.
    pub fn in_chart(&self, b: usize, threshold: f64) -> bool {
        let m = gap_margin(threshold);
        self.plus[b].values.iter().chain(&self.minus[b].values).all(|v| (v - threshold).abs() >= m)
    }

    /// `(rk K_λ⁺, rk K_λ⁻)` at `b`.
    pub fn ranks(&self, b: usize, threshold: f64) -> (usize, usize) {
        (self.plus[b].count_below(threshold), self.minus[b].count_below(threshold))
    }
}

/// Orthonormal frames of `K_λ⁺ ⊂ W₀`, `K_λ⁻ ⊂ W₁` and of their orthogonal
/// complements, as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffFrames<S: Scalar> {
    pub plus: Matrix<S>,
    pub minus: Matrix<S>,
    pub plus_rest: Matrix<S>,
    pub minus_rest: Matrix<S>,
}

impl<S: Scalar> CutoffFrames<S> {
    pub fn ranks(&self) -> (usize, usize) {
        (self.plus.cols(), self.minus.cols())
    }

    /// The whole space as its own cutoff.
    pub fn full(p: usize, q: usize) -> Self {
        Self {
            plus: Matrix::identity(p),
            minus: Matrix::identity(q),
            plus_rest: Matrix::zeros(p, 0),
            minus_rest: Matrix::zeros(q, 0),
        }
    }
}

/// `K_λ` over the chart `U_λ`.
#[derive(Clone, Debug)]
pub struct CutoffBundle {
    pub threshold: f64,
    /// `Some` exactly on `U_λ`.
    pub frames: Vec<Option<CutoffFrames<Complex64>>>,
    /// Connected components of `U_λ` along which frames were propagated.
    pub components: Vec<Vec<usize>>,
    /// Worst `‖P² − P‖` and `‖P* − P‖` of `P_{[0,λ)}` over the chart.
    pub projector_residual: f64,
    /// Worst deviation of a frame from orthonormality.
    pub frame_defect: f64,
    /// Grid edges inside `U_λ` whose endpoints have different ranks.
    pub rank_jumps: usize,
}

impl CutoffBundle {
    pub fn contains(&self, b: usize) -> bool {
        self.frames[b].is_some()
    }

    pub fn frames(&self, b: usize) -> Result<&CutoffFrames<Complex64>> {
        self.frames[b].as_ref().ok_or(Error::OutsideChart(b))
    }

    pub fn ranks(&self, b: usize) -> Option<(usize, usize)> {
        self.frames[b].as_ref().map(CutoffFrames::ranks)
    }

    pub fn is_empty(&self) -> bool {
        self.frames.iter().all(Option::is_none)
    }

    /// Ranks per component (constant on each).
    pub fn component_ranks(&self) -> Vec<(usize, usize)> {
        self.components.iter().map(|c| self.ranks(c[0]).expect("member")).collect()
    }
}

fn projector_residual(e: &Matrix<Complex64>) -> f64 {
    let p = e.mul(&e.adjoint());
    p.mul(&p).sub(&p).max_abs().max(p.adjoint().sub(&p).max_abs())
}

/// Eigenbasis frames at `b`, with the cutoff part aligned to `previous`
/// by projecting and re-orthonormalizing.
fn frames_at(
    spectra: &FamilySpectra,
    b: usize,
    threshold: f64,
    previous: Option<&CutoffFrames<Complex64>>,
) -> Result<CutoffFrames<Complex64>> {
    let (sp, sm) = (&spectra.plus[b], &spectra.minus[b]);
    let (rp, rm) = spectra.ranks(b, threshold);
    let mut plus = sp.columns(0..rp);
    let mut minus = sm.columns(0..rm);
    if let Some(prev) = previous {
        plus = gram_schmidt(&plus.mul(&plus.adjoint()).mul(&prev.plus))?;
        minus = gram_schmidt(&minus.mul(&minus.adjoint()).mul(&prev.minus))?;
    }
    Ok(CutoffFrames { plus, minus, plus_rest: sp.columns(rp..sp.dim()), minus_rest: sm.columns(rm..sm.dim()) })
}

/// Whether a frame can be carried from `a` to `b` without collapsing.
fn transportable(spectra: &FamilySpectra, threshold: f64, a: usize, b: usize) -> bool {
    let (ra, rb) = (spectra.ranks(a, threshold), spectra.ranks(b, threshold));
    if ra != rb {
        return false;
    }
    let overlap = |x: &HermitianSpectrum, y: &HermitianSpectrum, r: usize| {
        r == 0 || {
            let m = x.columns(0..r).adjoint().mul(&y.columns(0..r));
            sigma_min(&m) > 0.5
        }
    };
    overlap(&spectra.plus[a], &spectra.plus[b], ra.0) && overlap(&spectra.minus[a], &spectra.minus[b], ra.1)
}

/// `K_λ` on `U_λ`, frames propagated along grid adjacency from the first
/// sample of each component.
pub fn spectral_cutoff(family: &OperatorFamily, spectra: &FamilySpectra, threshold: f64) -> Result<CutoffBundle> {
    let n = family.len();
    let member: Vec<bool> = (0..n).map(|b| spectra.in_chart(b, threshold)).collect();
    let mut rank_jumps = 0;
    for b in 0..n {
        for &nb in family.grid.neighbours(b) {
            if b < nb && member[b] && member[nb] && spectra.ranks(b, threshold) != spectra.ranks(nb, threshold) {
                rank_jumps += 1;
            }
        }
    }
    let comps = family.grid.components(&member, |a, b| transportable(spectra, threshold, a, b));
    let mut frames: Vec<Option<CutoffFrames<Complex64>>> = vec![None; n];
    let mut components = Vec::with_capacity(comps.len());
    let (mut projector, mut defect) = (0.0f64, 0.0f64);
    for comp in comps {
        for &(b, parent) in &comp {
            let prev = parent.map(|p| frames[p].as_ref().expect("parent first"));
            let f = frames_at(spectra, b, threshold, prev)?;
            projector = projector.max(projector_residual(&f.plus)).max(projector_residual(&f.minus));
            defect = defect.max(orthonormality_defect(&f.plus)).max(orthonormality_defect(&f.minus));
            frames[b] = Some(f);
        }
        components.push(comp.into_iter().map(|c| c.0).collect());
    }
    Ok(CutoffBundle { threshold, frames, components, projector_residual: projector, frame_defect: defect, rank_jumps })
}

/// Checks of the dual cutoff `H_λ` built from `D!`, the transpose family
/// on `W∨`.
#[derive(Clone, Debug, Serialize)]
pub struct DualCutoffReport {
    pub threshold: f64,
    pub samples_checked: usize,
    /// Smallest `|det Hᵀ K|` of the evaluation pairing over both blocks.
    pub min_pairing_det: f64,
    /// Largest gap between the sorted spectra of `D²` and `(D!)²`.
    pub spectrum_gap: f64,
}

impl DualCutoffReport {
    pub fn passed(&self, det_tol: f64, spectrum_tol: f64) -> bool {
        self.min_pairing_det > det_tol && self.spectrum_gap <= spectrum_tol
    }
}

/// Builds `H_λ` from an independent eigendecomposition of `(D!)²` and pairs
/// it with `K_λ` by evaluation `W∨ ⊗ W → ℂ`.
pub fn dual_cutoff(family: &OperatorFamily, spectra: &FamilySpectra, threshold: f64) -> Result<DualCutoffReport> {
    let mut report = DualCutoffReport { threshold, samples_checked: 0, min_pairing_det: f64::INFINITY, spectrum_gap: 0.0 };
    for b in 0..family.len() {
        if !spectra.in_chart(b, threshold) {
            continue;
        }
        let d_dual = family.plus(b).transpose();
        let dual_minus = d_dual.adjoint();
        // (D!)² on W₀∨ and on W₁∨
        let h0 = hermitian_eigen(&d_dual.mul(&dual_minus))?;
        let h1 = hermitian_eigen(&dual_minus.mul(&d_dual))?;
        let mut ours: Vec<f64> = spectra.plus[b].values.iter().chain(&spectra.minus[b].values).copied().collect();
        let mut theirs: Vec<f64> = h0.values.iter().chain(&h1.values).copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            report.spectrum_gap = report.spectrum_gap.max((x - y).abs());
        }
        let (rp, rm) = spectra.ranks(b, threshold);
        let pairs = [(h0.columns(0..h0.count_below(threshold)), spectra.plus[b].columns(0..rp)),
            (h1.columns(0..h1.count_below(threshold)), spectra.minus[b].columns(0..rm))];
        for (h, k) in pairs {
            if h.cols() != k.cols() {
                return Err(Error::Numerical(format!("dual cutoff rank {} differs from {} at sample {b}", h.cols(), k.cols())));
            }
            report.min_pairing_det = report.min_pairing_det.min(h.transpose().mul(&k).det().norm());
        }
        report.samples_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::grid::{BaseGrid, GridSpec};
    use super::super::operators::{FamilySpec, Radius};
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let m = Matrix::from_rows(vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]);
        let s = hermitian_eigen(&m).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-12 && (s.values[1] - 3.0).abs() < 1e-12);
        assert!(orthonormality_defect(&s.vectors) < 1e-12);
        let back = s.vectors.mul(&Matrix::diagonal(&[c(1.0, 0.0), c(3.0, 0.0)])).mul(&s.vectors.adjoint());
        assert!(back.approx_eq(&m, 1e-12));
    }

    #[test]
    fn general_eigenvalues() {
        let m = Matrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12 && (ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn cosine_cutoff_ranks() {
        let grid = BaseGrid::new(GridSpec::Circle { n: 64 }).unwrap();
        let fam = OperatorFamily::build(grid, &FamilySpec::Scalar { radius: Radius::Cos, winding: 0 }).unwrap();
        let spectra = FamilySpectra::new(&fam).unwrap();
        let cut = spectral_cutoff(&fam, &spectra, 0.5).unwrap();
        for b in 0..64 {
            let t = fam.grid.point(b)[0];
            let c2 = t.cos().powi(2);
            let expected = if (c2 - 0.5).abs() < 1e-6 {
                None
            } else if c2 < 0.5 {
                Some((1, 1))
            } else {
                Some((0, 0))
            };
            assert_eq!(cut.ranks(b), expected);
        }
        assert_eq!(cut.rank_jumps, 0);
        assert!(cut.projector_residual < 1e-12);
        // below every nonzero eigenvalue of a kernel-free family
        let phase = OperatorFamily::build(BaseGrid::new(GridSpec::Circle { n: 8 }).unwrap(), &FamilySpec::Scalar { radius: Radius::One, winding: 1 }).unwrap();
        let ps = FamilySpectra::new(&phase).unwrap();
        let tiny = spectral_cutoff(&phase, &ps, 1e-3).unwrap();
        assert!((0..8).all(|b| tiny.ranks(b) == Some((0, 0))));
    }

    #[test]
    fn propagated_frames_vary_continuously() {
        let grid = BaseGrid::new(GridSpec::Circle { n: 128 }).unwrap();
        let fam = OperatorFamily::build(grid, &FamilySpec::LatticeDirac { sites: 4, mass: super::super::operators::Mass::Named("cos".into()) }).unwrap();
        let spectra = FamilySpectra::new(&fam).unwrap();
        let cut = spectral_cutoff(&fam, &spectra, 1.1).unwrap();
        for comp in &cut.components {
            for w in comp.windows(2) {
                let (a, b) = (cut.frames(w[0]).unwrap(), cut.frames(w[1]).unwrap());
                if fam.grid.neighbours(w[0]).contains(&w[1]) {
                    assert!(a.plus.sub(&b.plus).max_abs() < 0.5);
                }
            }
        }
        assert!(cut.frame_defect < 1e-10);
    }

    #[test]
    fn dual_cutoff_pairs() {
        let grid = BaseGrid::new(GridSpec::Circle { n: 32 }).unwrap();
        let fam = OperatorFamily::build(grid, &FamilySpec::LatticeDirac { sites: 3, mass: super::super::operators::Mass::Constant(0.3) }).unwrap();
        let spectra = FamilySpectra::new(&fam).unwrap();
        let rep = dual_cutoff(&fam, &spectra, 1.5).unwrap();
        assert_eq!(rep.samples_checked, 32);
        assert!(rep.passed(1e-10, 1e-10), "{rep:?}");
    }
}
