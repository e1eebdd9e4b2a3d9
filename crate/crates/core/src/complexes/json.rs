//! JSON forms of complexes, graded maps and retraction/perturbation input.
//!
//! Matrices are arrays of rows; entries are numbers or `"p/q"` strings.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::complex::{CochainComplex, GradedMap};
use super::retraction::Retraction;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{rational_from_json, Rational, Scalar};

pub type MatrixJson = Vec<Vec<serde_json::Value>>;

fn parse_matrix(rows: &MatrixJson, shape: (usize, usize), what: &str) -> Result<Matrix<Rational>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        // empty matrices may be written as [] regardless of column count
        if !(shape.0 == 0 && rows.is_empty()) && !(shape.1 == 0 && rows.iter().all(Vec::is_empty) && rows.len() == shape.0) {
            return Err(Error::Parse(format!("{what}: expected a {}x{} matrix", shape.0, shape.1)));
        }
    }
    let mut m = Matrix::zeros(shape.0, shape.1);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = rational_from_json(v)?;
        }
    }
    Ok(m)
}

fn matrix_to_json<S: Scalar>(m: &Matrix<S>) -> MatrixJson {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| serde_json::Value::String(x.to_repr())).collect()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub min_degree: i32,
    pub dims: Vec<usize>,
    /// `d[i]: V_{min+i} → V_{min+i+1}`; the final map may be omitted.
    #[serde(default)]
    pub d: Vec<MatrixJson>,
}

impl ComplexJson {
    pub fn parse(&self) -> Result<CochainComplex<Rational>> {
        let mut diffs = Vec::new();
        for (i, m) in self.d.iter().enumerate() {
            let rows = self.dims.get(i + 1).copied().unwrap_or(0);
            let cols = *self.dims.get(i).ok_or_else(|| Error::Parse("more differentials than spaces".into()))?;
            diffs.push(parse_matrix(m, (rows, cols), &format!("d[{i}]"))?);
        }
        if diffs.is_empty() && self.dims.len() > 1 {
            return CochainComplex::new(
                self.min_degree,
                self.dims.clone(),
                (0..self.dims.len()).map(|i| Matrix::zeros(self.dims.get(i + 1).copied().unwrap_or(0), self.dims[i])).collect(),
            );
        }
        CochainComplex::new(self.min_degree, self.dims.clone(), diffs)
    }

    pub fn from_complex<S: Scalar>(c: &CochainComplex<S>) -> Self {
        Self {
            min_degree: c.min_degree(),
            dims: c.degrees().map(|k| c.dim(k)).collect(),
            d: c.degrees().filter(|&k| k < c.max_degree()).map(|k| matrix_to_json(&c.d(k))).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedMapJson {
    /// Blocks keyed by source degree (as strings, since JSON keys are strings).
    pub blocks: BTreeMap<String, MatrixJson>,
}

impl GradedMapJson {
    pub fn parse(
        &self,
        degree: i32,
        source: &CochainComplex<Rational>,
        target: &CochainComplex<Rational>,
        what: &str,
    ) -> Result<GradedMap<Rational>> {
        let mut blocks = BTreeMap::new();
        for (key, m) in &self.blocks {
            let k: i32 = key.parse().map_err(|_| Error::Parse(format!("{what}: bad degree key {key:?}")))?;
            let shape = (target.dim(k + degree), source.dim(k));
            blocks.insert(k, parse_matrix(m, shape, &format!("{what}[{k}]"))?);
        }
        Ok(GradedMap::new(degree, blocks))
    }

    pub fn from_map<S: Scalar>(m: &GradedMap<S>) -> Self {
        Self { blocks: m.blocks().iter().map(|(k, b)| (k.to_string(), matrix_to_json(b))).collect() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RetractionJson {
    pub small: ComplexJson,
    pub big: ComplexJson,
    pub iota: GradedMapJson,
    pub pi: GradedMapJson,
    pub eta: GradedMapJson,
    /// Degrees where the homotopy identity is not asserted.
    #[serde(default)]
    pub exempt: Vec<i32>,
}

impl RetractionJson {
    pub fn parse(&self) -> Result<Retraction<Rational>> {
        let small = self.small.parse()?;
        let big = self.big.parse()?;
        let iota = self.iota.parse(0, &small, &big, "iota")?;
        let pi = self.pi.parse(0, &big, &small, "pi")?;
        let eta = self.eta.parse(-1, &big, &big, "eta")?;
        Ok(Retraction::new(small, big, iota, pi, eta)?.with_exempt(self.exempt.iter().copied()))
    }

    pub fn from_retraction<S: Scalar>(r: &Retraction<S>) -> Self {
        Self {
            small: ComplexJson::from_complex(&r.small),
            big: ComplexJson::from_complex(&r.big),
            iota: GradedMapJson::from_map(&r.iota),
            pi: GradedMapJson::from_map(&r.pi),
            eta: GradedMapJson::from_map(&r.eta),
            exempt: r.exempt.iter().copied().collect(),
        }
    }
}

/// Input of the `hpl-check` command: a retraction and an optional
/// perturbation of the big differential.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HplInput {
    pub retraction: RetractionJson,
    #[serde(default)]
    pub perturbation: Option<GradedMapJson>,
}

impl HplInput {
    pub fn parse(&self) -> Result<(Retraction<Rational>, GradedMap<Rational>)> {
        let r = self.retraction.parse()?;
        let delta = match &self.perturbation {
            Some(p) => p.parse(1, &r.big, &r.big, "perturbation")?,
            None => GradedMap::zero(1),
        };
        Ok((r, delta))
    }
}

/// Rational data lifted to double-precision complex scalars.
pub fn to_numeric(r: &Retraction<Rational>) -> Retraction<Complex64> {
    let f = |q: &Rational| q.to_complex();
    Retraction {
        small: r.small.map_scalars(f),
        big: r.big.map_scalars(f),
        iota: r.iota.map_scalars(f),
        pi: r.pi.map_scalars(f),
        eta: r.eta.map_scalars(f),
        exempt: r.exempt.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::verify_retraction;

    #[test]
    fn parse_contraction() {
        let j = r#"{
            "retraction": {
                "small": {"min_degree": 0, "dims": [0, 0]},
                "big": {"min_degree": 0, "dims": [1, 1], "d": [[["1"]]]},
                "iota": {"blocks": {}},
                "pi": {"blocks": {}},
                "eta": {"blocks": {"1": [[-1]]}}
            }
        }"#;
        let input: HplInput = serde_json::from_str(j).unwrap();
        let (r, delta) = input.parse().unwrap();
        assert!(delta.is_zero());
        assert!(verify_retraction(&r, 0.0).passed());
        let back: RetractionJson = serde_json::from_str(&serde_json::to_string(&RetractionJson::from_retraction(&r)).unwrap()).unwrap();
        assert_eq!(back.parse().unwrap(), r);
    }

    #[test]
    fn rejects_bad_shape() {
        let j = r#"{"min_degree": 0, "dims": [1, 1], "d": [[["1", "2"]]]}"#;
        let c: ComplexJson = serde_json::from_str(j).unwrap();
        assert!(c.parse().is_err());
    }
}
