use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{BaseGrid, GridSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Mass profile `m(θ)` of the lattice family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mass {
    Constant(f64),
    /// `"cos"` or `"sin"`.
    Named(String),
}

impl Mass {
    fn at(&self, theta: f64) -> Result<f64> {
        match self {
            Mass::Constant(m) => Ok(*m),
            Mass::Named(s) if s == "cos" => Ok(theta.cos()),
            Mass::Named(s) if s == "sin" => Ok(theta.sin()),
            Mass::Named(s) => Err(Error::Parse(format!("unknown mass profile {s:?}"))),
        }
    }
}

/// Modulus profile of the scalar family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radius {
    One,
    Cos,
}

/// How `D⁺_b` is produced at each sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `D⁺_θ = r(θ)e^{iwθ}` on `ℂ`.
    Scalar { radius: Radius, #[serde(default)] winding: i64 },
    /// `D⁺_θ = (T_θ − 1) + m(θ)` on a periodic chain of `sites` sites,
    /// where `T_θ` shifts forward and picks up `e^{iθ}` across the seam.
    LatticeDirac { sites: usize, mass: Mass },
    /// One `p × q` matrix per sample, entries as `[re, im]`.
    Explicit { samples: Vec<Vec<Vec<[f64; 2]>>> },
}

/// Run configuration for the determinant bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub grid: GridSpec,
    pub family: FamilySpec,
    pub thresholds: Vec<f64>,
}

impl FamilyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.thresholds.is_empty() || cfg.thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::Invalid("thresholds must be positive and finite".into()));
        }
        Ok(cfg)
    }
}

/// `D⁺_b` at every sample of a grid. `D⁻_b` is the adjoint.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    pub grid: BaseGrid,
    plus: Vec<Matrix<Complex64>>,
}

/// The angle a sample stands for: its first coordinate, or `2πt` on an
/// interval.
fn angle(grid: &BaseGrid, b: usize) -> f64 {
    match grid.spec {
        GridSpec::Interval { .. } => std::f64::consts::TAU * grid.point(b)[0],
        _ => grid.point(b)[0],
    }
}

pub fn lattice_dirac(sites: usize, theta: f64, mass: f64) -> Matrix<Complex64> {
    let mut m = Matrix::identity(sites).scale(&Complex64::new(mass - 1.0, 0.0));
    for j in 0..sites {
        let next = (j + 1) % sites;
        let hop = if next == 0 { Complex64::from_polar(1.0, theta) } else { Complex64::new(1.0, 0.0) };
        m[(j, next)] += hop;
    }
    m
}

impl OperatorFamily {
    pub fn new(grid: BaseGrid, plus: Vec<Matrix<Complex64>>) -> Result<Self> {
        if plus.len() != grid.len() {
            return Err(Error::Invalid(format!("{} operators for {} samples", plus.len(), grid.len())));
        }
        if let Some(first) = plus.first() {
            if plus.iter().any(|m| m.shape() != first.shape()) {
                return Err(Error::Invalid("operator shape varies across samples".into()));
            }
        }
        Ok(Self { grid, plus })
    }

    pub fn build(grid: BaseGrid, spec: &FamilySpec) -> Result<Self> {
        let plus = match spec {
            FamilySpec::Scalar { radius, winding } => (0..grid.len())
                .map(|b| {
                    let t = angle(&grid, b);
                    let r = match radius {
                        Radius::One => 1.0,
                        Radius::Cos => t.cos(),
                    };
                    Matrix::from_rows(vec![vec![Complex64::from_polar(r, *winding as f64 * t)]])
                })
                .collect(),
            FamilySpec::LatticeDirac { sites, mass } => {
                if *sites == 0 {
                    return Err(Error::Invalid("lattice needs at least one site".into()));
                }
                let mut out = Vec::with_capacity(grid.len());
                for b in 0..grid.len() {
                    let last = *grid.point(b).last().expect("nonempty point");
                    let m = match grid.spec {
                        GridSpec::Interval { .. } => mass.at(std::f64::consts::TAU * last)?,
                        _ => mass.at(last)?,
                    };
                    out.push(lattice_dirac(*sites, angle(&grid, b), m));
                }
                out
            }
            FamilySpec::Explicit { samples } => samples
                .iter()
                .map(|rows| {
                    Matrix::from_rows(
                        rows.iter().map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect(),
                    )
                })
                .collect(),
        };
        Self::new(grid, plus)
    }

    pub fn from_config(cfg: &FamilyConfig) -> Result<Self> {
        Self::build(BaseGrid::new(cfg.grid)?, &cfg.family)
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    /// `D⁺_b : W₀ → W₁` as a `dim W₁ × dim W₀` matrix.
    pub fn plus(&self, b: usize) -> &Matrix<Complex64> {
        &self.plus[b]
    }

    pub fn minus(&self, b: usize) -> Matrix<Complex64> {
        self.plus[b].adjoint()
    }

    /// `(dim W₀, dim W₁)`.
    pub fn dims(&self) -> (usize, usize) {
        self.plus.first().map_or((0, 0), |m| (m.cols(), m.rows()))
    }

    /// Largest `‖D⁺_b − D⁺_{b'}‖` over grid edges.
    pub fn max_edge_jump(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in 0..self.len() {
            for &nb in self.grid.neighbours(b) {
                worst = worst.max(self.plus[b].sub(&self.plus[nb]).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_lattice_config() {
        let text = r#"{"grid":{"type":"circle","n":16},"family":{"kind":"lattice_dirac","sites":4,"mass":"cos"},"thresholds":[0.3,1.1]}"#;
        let cfg = FamilyConfig::from_json(text).unwrap();
        let fam = OperatorFamily::from_config(&cfg).unwrap();
        assert_eq!(fam.dims(), (4, 4));
        // θ = 0: mass 1, D = T
        let d = fam.plus(0);
        assert_eq!(d[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(d[(0, 0)], Complex64::new(0.0, 0.0));
        assert!(fam.max_edge_jump() < 1.0);
    }

    #[test]
    fn parse_explicit_and_constant_mass() {
        let text = r#"{"grid":{"type":"interval","n":2},"family":{"kind":"explicit","samples":[[[[1,0]]],[[[0,1]]]]},"thresholds":[1]}"#;
        let fam = OperatorFamily::from_config(&FamilyConfig::from_json(text).unwrap()).unwrap();
        assert_eq!(fam.plus(1)[(0, 0)], Complex64::new(0.0, 1.0));
        let m: Mass = serde_json::from_str("0.5").unwrap();
        assert_eq!(m.at(1.0).unwrap(), 0.5);
        assert!(FamilyConfig::from_json(r#"{"grid":{"type":"circle","n":4},"family":{"kind":"scalar","radius":"one"},"thresholds":[]}"#).is_err());
    }

    #[test]
    fn seam_phase() {
        let d = lattice_dirac(3, 1.0, 0.0);
        assert!((d[(2, 0)] - Complex64::from_polar(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(d[(1, 1)], Complex64::new(-1.0, 0.0));
    }
}
