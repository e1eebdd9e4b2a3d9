use num_complex::Complex64;
use serde::Serialize;

use super::grid::GridSpec;
use super::operators::OperatorFamily;
use super::spectral::{eigenvalues, spectral_cutoff, CutoffBundle, CutoffFrames, FamilySpectra};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pfaffian;
use crate::scalar::Scalar;

/// Below this `σ_min(D⁺)` a sample counts as having kernel.
pub const KERNEL_TOL: f64 = 1e-8;

fn reorder_sign<S: Scalar>(k: usize) -> S {
    S::from_i64(pfaffian::reorder_sign(k))
}

/// `s_λ = (−1)^{r(r−1)/2} det(F* D⁺ E)` in the frames of a chart.
pub fn section_value<S: Scalar>(d: &Matrix<S>, frames: &CutoffFrames<S>) -> Result<S> {
    let (rp, rm) = frames.ranks();
    if rp != rm {
        return Err(Error::NonzeroIndex { plus: rp, minus: rm });
    }
    Ok(reorder_sign::<S>(rp) * frames.minus.adjoint().mul(d).mul(&frames.plus).det())
}

/// `g_{λμ}` at one sample: `ε·det(D⁺ on K_{(λ,μ)})` in the frames
/// `mid_plus`, `mid_minus` of `K_{(λ,μ)}`, times the sign of moving the
/// `K_{(λ,μ)}⁺` factor past `Λ^top K_λ⁻`, times the comparison of
/// `[E_λ, E′]`, `[F_λ, F′]` with the frames of `K_μ`.
pub fn transition_value<S: Scalar>(
    d: &Matrix<S>,
    low: &CutoffFrames<S>,
    high: &CutoffFrames<S>,
    mid_plus: &Matrix<S>,
    mid_minus: &Matrix<S>,
) -> Result<S> {
    let q = mid_plus.cols();
    if mid_minus.cols() != q {
        return Err(Error::Structure("K_(λ,μ)⁺ and K_(λ,μ)⁻ differ in rank".into()));
    }
    let (rl, rh) = (low.ranks(), high.ranks());
    if rl.0 + q != rh.0 || rl.1 + q != rh.1 {
        return Err(Error::Structure("ranks of K_λ ⊕ K_(λ,μ) and K_μ disagree".into()));
    }
    let u_plus = high.plus.adjoint().mul(&low.plus.hstack(mid_plus));
    let u_minus = high.minus.adjoint().mul(&low.minus.hstack(mid_minus));
    let det_plus = u_plus.det();
    if det_plus.is_negligible(1e-12) {
        return Err(Error::Numerical("frames of K_μ do not span K_λ ⊕ K_(λ,μ)".into()));
    }
    let koszul = if (rl.1 * q) % 2 == 0 { S::one() } else { -S::one() };
    let block = mid_minus.adjoint().mul(d).mul(mid_plus).det();
    Ok(reorder_sign::<S>(q) * koszul * block * u_minus.det() / det_plus)
}

/// Transition scalars between two charts, `None` off the overlap.
#[derive(Clone, Debug)]
pub struct Transition {
    pub low: usize,
    pub high: usize,
    pub values: Vec<Option<Complex64>>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CocycleReport {
    /// Number of (sample, triple of charts) checked.
    pub triple_overlaps: usize,
    /// Worst `|g_{λμ}g_{μν}/g_{λν} − 1|`.
    pub max_residual: f64,
}

/// `Det(D)` glued from the `Det(K_λ)`.
#[derive(Clone, Debug)]
pub struct LineBundle {
    /// Ascending.
    pub thresholds: Vec<f64>,
    pub charts: Vec<CutoffBundle>,
    /// One entry per pair of charts `low < high`.
    pub transitions: Vec<Transition>,
    pub cocycle: CocycleReport,
    pub min_transition_modulus: f64,
}

fn mid_frames(spectra: &FamilySpectra, b: usize, low: f64, high: f64) -> (Matrix<Complex64>, Matrix<Complex64>) {
    let (lo, hi) = (spectra.ranks(b, low), spectra.ranks(b, high));
    (spectra.plus[b].columns(lo.0..hi.0), spectra.minus[b].columns(lo.1..hi.1))
}

impl LineBundle {
    pub fn transition(&self, low: usize, high: usize) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.low == low && t.high == high)
    }

    /// `g_{λ_i λ_j}(b)` for either order of `i`, `j`.
    pub fn g(&self, i: usize, j: usize, b: usize) -> Option<Complex64> {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.charts[i].contains(b).then_some(Complex64::new(1.0, 0.0)),
            std::cmp::Ordering::Less => self.transition(i, j)?.values[b],
            std::cmp::Ordering::Greater => self.transition(j, i)?.values[b].map(|v| 1.0 / v),
        }
    }

    pub fn ensure_cocycle(&self, tol: f64) -> Result<()> {
        if self.cocycle.max_residual > tol {
            return Err(Error::Cocycle(self.cocycle.max_residual));
        }
        Ok(())
    }

    /// Charts containing `b`, lowest threshold first.
    pub fn charts_at(&self, b: usize) -> Vec<usize> {
        (0..self.charts.len()).filter(|&i| self.charts[i].contains(b)).collect()
    }
}

/// Builds the charts, transition scalars on every pairwise overlap and the
/// cocycle residuals on every triple overlap.
pub fn det_line_bundle(family: &OperatorFamily, spectra: &FamilySpectra, thresholds: &[f64]) -> Result<LineBundle> {
    let mut thresholds = thresholds.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    if thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::Invalid("thresholds must be positive and finite".into()));
    }
    let charts = thresholds.iter().map(|&t| spectral_cutoff(family, spectra, t)).collect::<Result<Vec<_>>>()?;
    if let Some(b) = (0..family.len()).find(|&b| charts.iter().all(|c| !c.contains(b))) {
        return Err(Error::Invalid(format!("no chart contains sample {b}")));
    }
    let mut transitions = Vec::new();
    let mut min_modulus = f64::INFINITY;
    for i in 0..charts.len() {
        for j in i + 1..charts.len() {
            let mut values = vec![None; family.len()];
            for (b, slot) in values.iter_mut().enumerate() {
                let (Some(lo), Some(hi)) = (&charts[i].frames[b], &charts[j].frames[b]) else { continue };
                let (mp, mm) = mid_frames(spectra, b, thresholds[i], thresholds[j]);
                let g = transition_value(family.plus(b), lo, hi, &mp, &mm)?;
                min_modulus = min_modulus.min(g.norm());
                *slot = Some(g);
            }
            transitions.push(Transition { low: i, high: j, values });
        }
    }
    let mut bundle =
        LineBundle { thresholds, charts, transitions, cocycle: CocycleReport::default(), min_transition_modulus: min_modulus };
    let mut report = CocycleReport::default();
    for b in 0..family.len() {
        let here = bundle.charts_at(b);
        for (x, &i) in here.iter().enumerate() {
            for (y, &j) in here.iter().enumerate().skip(x + 1) {
                for &k in &here[y + 1..] {
                    let (gij, gjk, gik) = (bundle.g(i, j, b).unwrap(), bundle.g(j, k, b).unwrap(), bundle.g(i, k, b).unwrap());
                    report.max_residual = report.max_residual.max((gij * gjk / gik - 1.0).norm());
                    report.triple_overlaps += 1;
                }
            }
        }
    }
    bundle.cocycle = report;
    Ok(bundle)
}

/// The determinant section and its checks.
#[derive(Clone, Debug)]
pub struct DetSection {
    /// `s_λ(b)` per chart, `None` off the chart.
    pub values: Vec<Vec<Option<Complex64>>>,
    /// Each sample's value carried to the frame of the whole space, where
    /// it is `(−1)^{p(p−1)/2} det D⁺_b`.
    pub global: Vec<Complex64>,
    /// Worst `|s_μ − g_{λμ}s_λ| / max(1, |s_μ|)` over overlaps.
    pub equivariance_residual: f64,
    pub zeros: Vec<usize>,
    /// Samples with `σ_min(D⁺) ≤ KERNEL_TOL`.
    pub kernel_samples: Vec<usize>,
    /// Phase winding around a circle grid; `None` on other grids or when
    /// the section vanishes somewhere.
    pub winding: Option<i64>,
}

impl DetSection {
    pub fn zeros_match(&self) -> bool {
        self.zeros == self.kernel_samples
    }
}

/// Total phase change of a closed sampled loop, in turns.
pub fn loop_winding(values: &[Complex64]) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for k in 0..n {
        total += (values[(k + 1) % n] / values[k]).arg();
    }
    total / std::f64::consts::TAU
}

pub fn det_section(family: &OperatorFamily, spectra: &FamilySpectra, bundle: &LineBundle) -> Result<DetSection> {
    let (p, q) = family.dims();
    if p != q {
        return Err(Error::NonzeroIndex { plus: p, minus: q });
    }
    let n = family.len();
    let mut values = Vec::with_capacity(bundle.charts.len());
    for chart in &bundle.charts {
        let mut vals = vec![None; n];
        for (b, slot) in vals.iter_mut().enumerate() {
            if let Some(f) = &chart.frames[b] {
                *slot = Some(section_value(family.plus(b), f)?);
            }
        }
        values.push(vals);
    }
    let mut residual: f64 = 0.0;
    for t in &bundle.transitions {
        for b in 0..n {
            if let Some(g) = t.values[b] {
                let (sl, sh) = (values[t.low][b].expect("in chart"), values[t.high][b].expect("in chart"));
                residual = residual.max((sh - g * sl).norm() / sh.norm().max(1.0));
            }
        }
    }
    let full = CutoffFrames::full(p, q);
    let mut global = Vec::with_capacity(n);
    for b in 0..n {
        let i = bundle.charts_at(b)[0];
        let frames = bundle.charts[i].frames(b)?;
        let g = transition_value(family.plus(b), frames, &full, &frames.plus_rest, &frames.minus_rest)?;
        global.push(g * values[i][b].expect("in chart"));
    }
    let zeros: Vec<usize> =
        (0..n).filter(|&b| global[b].norm() <= KERNEL_TOL * spectra.norm[b].max(1.0).powi(p as i32 - 1)).collect();
    let kernel_samples = (0..n).filter(|&b| spectra.sigma_min[b] <= KERNEL_TOL).collect();
    let winding = match family.grid.spec {
        GridSpec::Circle { .. } if zeros.is_empty() => Some(loop_winding(&global).round() as i64),
        _ => None,
    };
    Ok(DetSection { values, global, equivariance_residual: residual, zeros, kernel_samples, winding })
}

/// Net number of eigenvalues of `D⁺` crossing the negative real axis
/// counterclockwise around a circle grid, following each eigenvalue by
/// nearest-neighbour matching between consecutive samples.
pub fn spectral_flow(family: &OperatorFamily) -> Result<Option<i64>> {
    let GridSpec::Circle { n } = family.grid.spec else { return Ok(None) };
    let eigs = (0..n).map(|b| eigenvalues(family.plus(b))).collect::<Result<Vec<_>>>()?;
    let mut flow = 0i64;
    for k in 0..n {
        let (from, to) = (&eigs[k], &eigs[(k + 1) % n]);
        let mut pairs: Vec<(f64, usize, usize)> =
            from.iter().enumerate().flat_map(|(i, a)| to.iter().enumerate().map(move |(j, b)| ((a - b).norm(), i, j))).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (mut used_a, mut used_b) = (vec![false; from.len()], vec![false; to.len()]);
        for (_, i, j) in pairs {
            if used_a[i] || used_b[j] {
                continue;
            }
            used_a[i] = true;
            used_b[j] = true;
            let (a, b) = (from[i], to[j]);
            if (a.im >= 0.0) == (b.im >= 0.0) {
                continue;
            }
            let t = a.im / (a.im - b.im);
            if a.re + t * (b.re - a.re) < 0.0 {
                flow += if a.im >= 0.0 { 1 } else { -1 };
            }
        }
    }
    Ok(Some(flow))
}

#[cfg(test)]
mod tests {
    use super::super::grid::{BaseGrid, GridSpec};
    use super::super::operators::{FamilySpec, Mass, Radius};
    use super::*;

    fn family(n: usize, spec: FamilySpec) -> (OperatorFamily, FamilySpectra) {
        let fam = OperatorFamily::build(BaseGrid::new(GridSpec::Circle { n }).unwrap(), &spec).unwrap();
        let sp = FamilySpectra::new(&fam).unwrap();
        (fam, sp)
    }

    #[test]
    fn one_by_one_transition_is_the_entry() {
        // λ = 1/4 < |d|² = 1 < μ = 4: K_λ = 0, K_μ = K_(λ,μ) = ℂ ⊕ ℂ
        let d = Matrix::from_rows(vec![vec![Complex64::new(0.0, 1.0)]]);
        let low = CutoffFrames { plus: Matrix::zeros(1, 0), minus: Matrix::zeros(1, 0), plus_rest: Matrix::identity(1), minus_rest: Matrix::identity(1) };
        let high = CutoffFrames::full(1, 1);
        let g = transition_value(&d, &low, &high, &Matrix::identity(1), &Matrix::identity(1)).unwrap();
        assert_eq!(g, Complex64::new(0.0, 1.0));
    }

    #[test]
    fn single_chart_has_no_transitions() {
        let (fam, sp) = family(16, FamilySpec::Scalar { radius: Radius::One, winding: 1 });
        let lb = det_line_bundle(&fam, &sp, &[2.0]).unwrap();
        assert!(lb.transitions.is_empty());
        assert_eq!(lb.cocycle.triple_overlaps, 0);
        let s = det_section(&fam, &sp, &lb).unwrap();
        assert!(s.global.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert_eq!(s.winding, Some(1));
        assert_eq!(spectral_flow(&fam).unwrap(), Some(1));
    }

    #[test]
    fn cosine_family_vanishes_at_kernel() {
        let (fam, sp) = family(64, FamilySpec::Scalar { radius: Radius::Cos, winding: 0 });
        let lb = det_line_bundle(&fam, &sp, &[0.25, 0.5, 2.0]).unwrap();
        lb.ensure_cocycle(1e-12).unwrap();
        let s = det_section(&fam, &sp, &lb).unwrap();
        assert_eq!(s.kernel_samples, vec![16, 48]);
        assert!(s.zeros_match());
        assert!(s.equivariance_residual < 1e-12);
        assert_eq!(s.winding, None);
    }

    #[test]
    fn identity_family_is_constant() {
        let grid = BaseGrid::new(GridSpec::Interval { n: 5 }).unwrap();
        let fam = OperatorFamily::new(grid, vec![Matrix::identity(3); 5]).unwrap();
        let sp = FamilySpectra::new(&fam).unwrap();
        let lb = det_line_bundle(&fam, &sp, &[0.5, 2.0]).unwrap();
        let s = det_section(&fam, &sp, &lb).unwrap();
        // rank 0 below 1/2, rank 3 below 2
        assert!(s.values[0].iter().all(|v| *v == Some(Complex64::new(1.0, 0.0))));
        assert!(s.values[1].iter().all(|v| (v.unwrap() - Complex64::new(-1.0, 0.0)).norm() < 1e-12));
        assert!(s.equivariance_residual < 1e-12);
    }

    #[test]
    fn lattice_dirac_winds_once() {
        let (fam, sp) = family(128, FamilySpec::LatticeDirac { sites: 4, mass: Mass::Named("cos".into()) });
        let lb = det_line_bundle(&fam, &sp, &[0.3, 1.1, 2.5]).unwrap();
        assert!(lb.cocycle.triple_overlaps > 0);
        lb.ensure_cocycle(1e-9).unwrap();
        let s = det_section(&fam, &sp, &lb).unwrap();
        assert!(s.equivariance_residual < 1e-9, "{}", s.equivariance_residual);
        assert!(s.zeros.is_empty() && s.zeros_match());
        // global value is ± det D⁺
        for b in (0..128).step_by(17) {
            let det = fam.plus(b).det();
            assert!((s.global[b] - det).norm() < 1e-9 * det.norm().max(1.0), "sample {b}");
        }
        assert_eq!(s.winding, Some(1));
        assert_eq!(spectral_flow(&fam).unwrap(), Some(1));
    }

    #[test]
    fn unequal_dims_refuse_section() {
        let grid = BaseGrid::new(GridSpec::Interval { n: 3 }).unwrap();
        let d = Matrix::from_rows(vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]);
        let fam = OperatorFamily::new(grid, vec![d; 3]).unwrap();
        let sp = FamilySpectra::new(&fam).unwrap();
        let lb = det_line_bundle(&fam, &sp, &[0.5, 2.0]).unwrap();
        lb.ensure_cocycle(1e-12).unwrap();
        assert!(matches!(det_section(&fam, &sp, &lb), Err(Error::NonzeroIndex { .. })));
    }
}
