//! Closed-form building blocks used as boundary data for the generating PDEs.
//!
//! A term is `coeff * exp(a u + b v) * trig(c u + d v)` with `trig` one of
//! `1`, `sin`, `cos`. Sums of such terms cover the exponential and
//! trigonometric solution families of constant-coefficient equations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    #[default]
    One,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(default = "one")]
    pub coeff: f64,
    /// Exponential rates `[a, b]`.
    #[serde(default)]
    pub exp: [f64; 2],
    #[serde(default)]
    pub trig: Trig,
    /// Trigonometric frequencies `[c, d]`.
    #[serde(default)]
    pub freq: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl Term {
    pub fn exp(coeff: f64, a: f64, b: f64) -> Self {
        Term {
            coeff,
            exp: [a, b],
            trig: Trig::One,
            freq: [0.0, 0.0],
        }
    }

    pub fn sin(coeff: f64, c: f64, d: f64) -> Self {
        Term {
            coeff,
            exp: [0.0, 0.0],
            trig: Trig::Sin,
            freq: [c, d],
        }
    }

    pub fn cos(coeff: f64, c: f64, d: f64) -> Self {
        Term {
            coeff,
            exp: [0.0, 0.0],
            trig: Trig::Cos,
            freq: [c, d],
        }
    }

    pub fn with_exp(mut self, a: f64, b: f64) -> Self {
        self.exp = [a, b];
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.coeff *= s;
        self
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let e = (self.exp[0] * u + self.exp[1] * v).exp();
        let phase = self.freq[0] * u + self.freq[1] * v;
        let t = match self.trig {
            Trig::One => 1.0,
            Trig::Sin => phase.sin(),
            Trig::Cos => phase.cos(),
        };
        self.coeff * e * t
    }
}

/// Evaluates a sum of terms.
pub fn eval_sum(terms: &[Term], u: f64, v: f64) -> f64 {
    terms.iter().map(|t| t.eval(u, v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_shapes() {
        let t = Term::sin(2.0, 1.0, 1.0);
        assert!((t.eval(0.3, 0.2) - 2.0 * 0.5f64.sin()).abs() < 1e-15);
        let e = Term::exp(1.0, 1.0, -1.0);
        assert!((e.eval(0.5, 0.5) - 1.0).abs() < 1e-15);
        let p = Term::cos(1.0, 0.0, 1.25).with_exp(0.75, 0.0);
        assert!((p.eval(1.0, 0.0) - 0.75f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn serde_defaults() {
        let t: Term = serde_json::from_str(r#"{"trig":"sin","freq":[1,2]}"#).unwrap();
        assert_eq!(t.coeff, 1.0);
        assert_eq!(t.exp, [0.0, 0.0]);
        assert!((t.eval(0.1, 0.1) - 0.3f64.sin()).abs() < 1e-15);
    }
}
