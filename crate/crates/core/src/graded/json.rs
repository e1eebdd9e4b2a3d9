//! JSON form of an [`Element`]:
//! `{"spec":{"n":..,"m":..},"terms":[{"x":[1-based..],"xi":[exps..],"c":"p/q"}]}`.

use serde::{Deserialize, Serialize};

use super::element::Element;
use super::monomial::{GeneratorSpec, Monomial};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    /// 1-based `x` indices.
    pub x: Vec<usize>,
    /// ξ exponents; may be shorter than `m` (missing entries are zero).
    #[serde(default)]
    pub xi: Vec<u32>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub spec: GeneratorSpec,
    pub terms: Vec<TermJson>,
}

impl<S: Scalar> Element<S> {
    pub fn to_json(&self) -> ElementJson {
        let terms = self
            .terms()
            .map(|(m, c): (&Monomial, &S)| TermJson {
                x: m.x_indices().into_iter().map(|i| i + 1).collect(),
                xi: m.xi_exps().to_vec(),
                c: c.to_repr(),
            })
            .collect();
        ElementJson { spec: self.spec(), terms }
    }
}

impl Element<Rational> {
    pub fn from_json(j: &ElementJson) -> Result<Self> {
        let spec = j.spec;
        let mut out = Element::zero(spec);
        for t in &j.terms {
            if t.x.iter().any(|&i| i == 0) {
                return Err(Error::Parse("x indices are 1-based".into()));
            }
            if t.xi.len() > spec.m {
                return Err(Error::Parse(format!("ξ exponent vector longer than m = {}", spec.m)));
            }
            let x: Vec<usize> = t.x.iter().map(|i| i - 1).collect();
            let mut xi = t.xi.clone();
            xi.resize(spec.m, 0);
            let c = parse_rational(&t.c)?;
            let e = Element::monomial(spec, &x, &xi, c).map_err(|e| Error::Parse(e.to_string()))?;
            out.add_scaled(&e, &Rational::from_i64(1));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = GeneratorSpec::square(3);
        let e = Element::monomial(s, &[2, 0], &[1, 0, 2], Rational::from_ratio(-3, 4)).unwrap();
        let e = e.add(&Element::one(s)).unwrap();
        let j = serde_json::to_string(&e.to_json()).unwrap();
        let back = Element::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn rejects_zero_index() {
        let j = r#"{"spec":{"n":1,"m":1},"terms":[{"x":[0],"xi":[0],"c":"1"}]}"#;
        assert!(Element::from_json(&serde_json::from_str(j).unwrap()).is_err());
    }
}
