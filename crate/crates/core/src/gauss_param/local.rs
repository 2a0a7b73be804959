//! Degree-4 tensor-product Lagrange interpolation on a 5x5 block of nodes.
//!
//! Gives a smooth local model of grid data that can be evaluated (with
//! exact polynomial derivatives) at arbitrary points near the block centre.

use crate::error::{Error, Result};
use crate::pde::GridSpec;

/// Half-width of the stencil: nodes `c-2..=c+2` in each direction.
pub const HALF_WIDTH: usize = 2;
const WIDTH: usize = 2 * HALF_WIDTH + 1;

/// Monomial coefficients of the Lagrange basis on the nodes -2..=2,
/// `BASIS[a][k]` being the coefficient of `s^k` in the a-th polynomial.
fn basis() -> [[f64; WIDTH]; WIDTH] {
    let mut out = [[0.0; WIDTH]; WIDTH];
    for (a, row) in out.iter_mut().enumerate() {
        let sa = a as f64 - HALF_WIDTH as f64;
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for b in 0..WIDTH {
            if b == a {
                continue;
            }
            let sb = b as f64 - HALF_WIDTH as f64;
            // poly *= (s - sb)
            let mut next = vec![0.0; poly.len() + 1];
            for (k, &c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= sb * c;
            }
            poly = next;
            denom *= sa - sb;
        }
        for (k, c) in poly.into_iter().enumerate() {
            row[k] = c / denom;
        }
    }
    out
}

/// `d^p/ds^p` of every basis polynomial at `s`.
fn basis_derivs(coef: &[[f64; WIDTH]; WIDTH], s: f64, p: usize) -> [f64; WIDTH] {
    let mut out = [0.0; WIDTH];
    for a in 0..WIDTH {
        // Horner over k >= p; the power of s is k - p.
        let mut acc = 0.0;
        for k in (p..WIDTH).rev() {
            let falling: f64 = (0..p).map(|m| (k - m) as f64).product();
            acc = acc * s + coef[a][k] * falling;
        }
        out[a] = acc;
    }
    out
}

#[derive(Debug, Clone)]
pub struct LocalModel {
    uc: f64,
    vc: f64,
    du: f64,
    dv: f64,
    dim: usize,
    /// `values[(a * WIDTH + b) * dim + c]`.
    values: Vec<f64>,
    coef: [[f64; WIDTH]; WIDTH],
}

impl LocalModel {
    /// Model of node-major `data` (with `dim` components) around node (i, j).
    pub fn new(spec: &GridSpec, data: &[f64], dim: usize, i: usize, j: usize) -> Result<Self> {
        if !spec.is_interior(i, j, HALF_WIDTH) {
            return Err(Error::InvalidGrid(format!(
                "node ({i}, {j}) is too close to the boundary for a local model"
            )));
        }
        if data.len() != spec.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: spec.len() * dim,
                got: data.len(),
            });
        }
        let mut values = Vec::with_capacity(WIDTH * WIDTH * dim);
        for a in 0..WIDTH {
            for b in 0..WIDTH {
                let k = spec.index(i + a - HALF_WIDTH, j + b - HALF_WIDTH);
                values.extend_from_slice(&data[k * dim..(k + 1) * dim]);
            }
        }
        Ok(LocalModel {
            uc: spec.u(i),
            vc: spec.v(j),
            du: spec.du(),
            dv: spec.dv(),
            dim,
            values,
            coef: basis(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centre(&self) -> (f64, f64) {
        (self.uc, self.vc)
    }

    /// `d^{p+q}/du^p dv^q` of every component at (u, v).
    pub fn eval(&self, u: f64, v: f64, p: usize, q: usize) -> Vec<f64> {
        let lu = basis_derivs(&self.coef, (u - self.uc) / self.du, p);
        let lv = basis_derivs(&self.coef, (v - self.vc) / self.dv, q);
        let scale = self.du.powi(p as i32) * self.dv.powi(q as i32);
        let mut out = vec![0.0; self.dim];
        for a in 0..WIDTH {
            for b in 0..WIDTH {
                let w = lu[a] * lv[b];
                if w == 0.0 {
                    continue;
                }
                let base = (a * WIDTH + b) * self.dim;
                for c in 0..self.dim {
                    out[c] += w * self.values[base + c];
                }
            }
        }
        for x in &mut out {
            *x /= scale;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_cardinal() {
        let coef = basis();
        for a in 0..WIDTH {
            let l = basis_derivs(&coef, a as f64 - 2.0, 0);
            for b in 0..WIDTH {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((l[b] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn reproduces_quartic_and_its_derivatives() {
        let spec = GridSpec::square(-0.5, 0.5, 11).unwrap();
        let f = |u: f64, v: f64| u.powi(4) - 2.0 * u * u * v + v.powi(3) + 0.5 * u - 1.0;
        let data = spec.sample(f);
        let m = LocalModel::new(&spec, &data, 1, 5, 5).unwrap();
        let (u, v) = (0.013, -0.021);
        assert!((m.eval(u, v, 0, 0)[0] - f(u, v)).abs() < 1e-13);
        assert!((m.eval(u, v, 1, 0)[0] - (4.0 * u.powi(3) - 4.0 * u * v + 0.5)).abs() < 1e-11);
        assert!((m.eval(u, v, 0, 1)[0] - (-2.0 * u * u + 3.0 * v * v)).abs() < 1e-11);
        assert!((m.eval(u, v, 1, 1)[0] - (-4.0 * u)).abs() < 1e-9);
        assert!((m.eval(u, v, 2, 0)[0] - (12.0 * u * u - 4.0 * v)).abs() < 1e-9);
        assert!((m.eval(u, v, 0, 3)[0] - 6.0).abs() < 1e-7);
    }

    #[test]
    fn derivative_error_shrinks_with_spacing() {
        let err = |n: usize| {
            let spec = GridSpec::square(0.0, 1.0, n).unwrap();
            let data = spec.sample(|u, v| (u + 2.0 * v).sin());
            let (i, j) = (n / 2, n / 2);
            let m = LocalModel::new(&spec, &data, 1, i, j).unwrap();
            let (u, v) = (spec.u(i), spec.v(j));
            (m.eval(u, v, 2, 1)[0] + 2.0 * (u + 2.0 * v).cos()).abs()
        };
        let ratio = err(33) / err(65);
        assert!(ratio > 3.0, "{ratio}");
    }

    #[test]
    fn rejects_boundary_nodes() {
        let spec = GridSpec::square(0.0, 1.0, 9).unwrap();
        let data = vec![0.0; 81];
        assert!(LocalModel::new(&spec, &data, 1, 1, 4).is_err());
    }
}
