use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{GridFunction, GridSpec};
use crate::error::{Error, Result};

/// The zero-order coefficient `M` of `psi_uv + M psi = 0` or
/// `psi_{z zbar} + M psi = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub m: GridFunction,
}

impl CoefficientField {
    pub fn new(m: GridFunction) -> Result<Self> {
        if let Some(k) = m.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(m.spec.location_of(k)));
        }
        Ok(CoefficientField { m })
    }

    pub fn constant(spec: GridSpec, c: f64) -> Result<Self> {
        CoefficientField::new(GridFunction::constant(spec, c)?)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.m.spec
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.m.at(i, j)
    }
}

/// Where `M` comes from.
///
/// Text forms: `const:<c>`, `poly:<c0,c1,...>` (graded monomials
/// `1, u, v, u^2, uv, v^2, u^3, ...`), `csv:<path>` or a bare path to a CSV
/// file with header `u,v,value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CoefficientSource {
    Const(f64),
    Poly(Vec<f64>),
    Csv(PathBuf),
}

impl CoefficientSource {
    pub fn build(&self, spec: GridSpec) -> Result<CoefficientField> {
        match self {
            CoefficientSource::Const(c) => CoefficientField::constant(spec, *c),
            CoefficientSource::Poly(coeffs) => {
                CoefficientField::new(GridFunction::from_fn(spec, |u, v| eval_poly(coeffs, u, v))?)
            }
            CoefficientSource::Csv(path) => {
                let f = std::fs::File::open(path)?;
                CoefficientField::new(GridFunction::read_csv(spec, f)?)
            }
        }
    }
}

/// Graded-lexicographic polynomial in `(u, v)`.
pub fn eval_poly(coeffs: &[f64], u: f64, v: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = 0;
    let mut deg = 0;
    while k < coeffs.len() {
        for a in (0..=deg).rev() {
            if k >= coeffs.len() {
                break;
            }
            let b = deg - a;
            sum += coeffs[k] * u.powi(a as i32) * v.powi(b as i32);
            k += 1;
        }
        deg += 1;
    }
    sum
}

impl FromStr for CoefficientSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number '{t}': {e}")))
        };
        if let Some(rest) = s.strip_prefix("const:") {
            Ok(CoefficientSource::Const(num(rest)?))
        } else if let Some(rest) = s.strip_prefix("poly:") {
            let coeffs = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if coeffs.is_empty() {
                return Err(Error::Parse("empty polynomial".into()));
            }
            Ok(CoefficientSource::Poly(coeffs))
        } else if let Some(rest) = s.strip_prefix("csv:") {
            Ok(CoefficientSource::Csv(PathBuf::from(rest)))
        } else if s.ends_with(".csv") {
            Ok(CoefficientSource::Csv(PathBuf::from(s)))
        } else {
            Err(Error::Parse(format!("unknown coefficient source '{s}'")))
        }
    }
}

impl TryFrom<String> for CoefficientSource {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CoefficientSource> for String {
    fn from(c: CoefficientSource) -> String {
        match c {
            CoefficientSource::Const(x) => format!("const:{x}"),
            CoefficientSource::Poly(cs) => format!(
                "poly:{}",
                cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            ),
            CoefficientSource::Csv(p) => format!("csv:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(
            "const:1.5".parse::<CoefficientSource>().unwrap(),
            CoefficientSource::Const(1.5)
        );
        assert_eq!(
            "poly:1,0,2".parse::<CoefficientSource>().unwrap(),
            CoefficientSource::Poly(vec![1.0, 0.0, 2.0])
        );
        assert!(matches!(
            "data/m.csv".parse::<CoefficientSource>().unwrap(),
            CoefficientSource::Csv(_)
        ));
        assert!("banana".parse::<CoefficientSource>().is_err());
        assert!("const:x".parse::<CoefficientSource>().is_err());
    }

    #[test]
    fn graded_monomials() {
        // 1 + 2u + 3v + 4u^2 + 5uv + 6v^2 + 7u^3
        let c = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let (u, v) = (0.5, -2.0);
        let expect = 1.0 + 2.0 * u + 3.0 * v + 4.0 * u * u + 5.0 * u * v + 6.0 * v * v + 7.0 * u * u * u;
        assert!((eval_poly(&c, u, v) - expect).abs() < 1e-12);
    }

    #[test]
    fn string_round_trip() {
        let s = CoefficientSource::Poly(vec![0.25, -1.0]);
        let t: String = s.clone().into();
        assert_eq!(t.parse::<CoefficientSource>().unwrap(), s);
    }
}
