use super::banded::{BandLu, BandMatrix};
use super::coefficient::CoefficientField;
use super::grid::{GridFunction, GridSpec};
use crate::error::{Error, Result};

/// Tolerance on the relative algebraic residual of the linear solve.
pub const ELLIPTIC_TOL: f64 = 1e-10;

const PIVOT_TOL: f64 = 1e-12;

/// Factorized five-point discretization of `1/4 (psi_uu + psi_vv) + M psi = 0`
/// with Dirichlet data. Factor once, then solve for any number of boundary
/// data sets (one per component of `k`).
#[derive(Debug, Clone)]
pub struct EllipticSolver {
    spec: GridSpec,
    matrix: BandMatrix,
    lu: BandLu,
    // Interior unknowns are ordered along the shorter axis first.
    transposed: bool,
}

impl EllipticSolver {
    pub fn new(m: &CoefficientField) -> Result<Self> {
        let spec = *m.spec();
        spec.validate()?;
        if let Some(k) = m.m.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(spec.location_of(k)));
        }
        let transposed = spec.nu < spec.nv;
        let (ni, nj) = (spec.nu - 2, spec.nv - 2);
        let bw = if transposed { ni } else { nj };
        let n = ni * nj;
        let mut a = BandMatrix::zeros(n, bw, bw);
        let cu = 1.0 / (spec.du() * spec.du());
        let cv = 1.0 / (spec.dv() * spec.dv());
        let idx = |i: usize, j: usize| unknown_index(transposed, ni, nj, i, j);
        for i in 1..spec.nu - 1 {
            for j in 1..spec.nv - 1 {
                let row = idx(i, j);
                a.set(row, row, -2.0 * cu - 2.0 * cv + 4.0 * m.at(i, j));
                if i > 1 {
                    a.set(row, idx(i - 1, j), cu);
                }
                if i < spec.nu - 2 {
                    a.set(row, idx(i + 1, j), cu);
                }
                if j > 1 {
                    a.set(row, idx(i, j - 1), cv);
                }
                if j < spec.nv - 2 {
                    a.set(row, idx(i, j + 1), cv);
                }
            }
        }
        let lu = a.clone().factor(PIVOT_TOL)?;
        Ok(EllipticSolver {
            spec,
            matrix: a,
            lu,
            transposed,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Solves with the boundary values of `dirichlet`; its interior values
    /// are ignored.
    pub fn solve(&self, dirichlet: &GridFunction) -> Result<GridFunction> {
        let spec = self.spec;
        spec.check_same(&dirichlet.spec)?;
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let on_boundary = i == 0 || j == 0 || i == spec.nu - 1 || j == spec.nv - 1;
                if on_boundary && !dirichlet.at(i, j).is_finite() {
                    return Err(Error::NonFinite(spec.location(i, j)));
                }
            }
        }
        let (ni, nj) = (spec.nu - 2, spec.nv - 2);
        let cu = 1.0 / (spec.du() * spec.du());
        let cv = 1.0 / (spec.dv() * spec.dv());
        let mut rhs = vec![0.0; ni * nj];
        for i in 1..spec.nu - 1 {
            for j in 1..spec.nv - 1 {
                let mut s = 0.0;
                if i == 1 {
                    s -= cu * dirichlet.at(0, j);
                }
                if i == spec.nu - 2 {
                    s -= cu * dirichlet.at(spec.nu - 1, j);
                }
                if j == 1 {
                    s -= cv * dirichlet.at(i, 0);
                }
                if j == spec.nv - 2 {
                    s -= cv * dirichlet.at(i, spec.nv - 1);
                }
                rhs[unknown_index(self.transposed, ni, nj, i, j)] = s;
            }
        }
        let mut x = rhs.clone();
        self.lu.solve_in_place(&mut x);
        let mut res = self.relative_residual(&x, &rhs);
        if res > ELLIPTIC_TOL {
            // One step of iterative refinement before giving up.
            let ax = self.matrix.mul_vec(&x);
            let mut d: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            self.lu.solve_in_place(&mut d);
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += di;
            }
            res = self.relative_residual(&x, &rhs);
        }
        if !(res <= ELLIPTIC_TOL) {
            return Err(Error::NotConverged { residual: res });
        }
        let mut psi = dirichlet.clone();
        for i in 1..spec.nu - 1 {
            for j in 1..spec.nv - 1 {
                psi.set(i, j, x[unknown_index(self.transposed, ni, nj, i, j)]);
            }
        }
        Ok(psi)
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        let num = ax.iter().zip(b).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let xs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bs = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        num / (self.matrix.max_abs() * xs + bs).max(f64::MIN_POSITIVE)
    }
}

#[inline]
fn unknown_index(transposed: bool, ni: usize, nj: usize, i: usize, j: usize) -> usize {
    if transposed {
        (j - 1) * ni + (i - 1)
    } else {
        (i - 1) * nj + (j - 1)
    }
}

/// One-shot Dirichlet solve.
pub fn solve_elliptic(m: &CoefficientField, dirichlet: &GridFunction) -> Result<GridFunction> {
    EllipticSolver::new(m)?.solve(dirichlet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_uv_is_exact() {
        let spec = GridSpec::new(-1.0, 1.0, 0.0, 2.0, 13, 9).unwrap();
        let m = CoefficientField::constant(spec, 0.0).unwrap();
        let bd = GridFunction::from_fn(spec, |u, v| u * v).unwrap();
        let psi = solve_elliptic(&m, &bd).unwrap();
        for k in 0..spec.len() {
            assert!((psi.values[k] - bd.values[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn orientation_does_not_matter() {
        // nu < nv exercises the transposed ordering.
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 9, 15).unwrap();
        let (a, b) = (2.0, 3.0);
        let m = CoefficientField::constant(spec, (a * a + b * b) / 4.0).unwrap();
        let exact = GridFunction::from_fn(spec, |u, v| (a * u).sin() * (b * v).sin() + 0.3).unwrap();
        let bd = exact.clone();
        let psi = solve_elliptic(&m, &bd).unwrap();
        let spec_t = GridSpec::new(0.0, 1.0, 0.0, 1.0, 15, 9).unwrap();
        let m_t = CoefficientField::constant(spec_t, (a * a + b * b) / 4.0).unwrap();
        let bd_t = GridFunction::from_fn(spec_t, |u, v| (a * v).sin() * (b * u).sin() + 0.3).unwrap();
        let psi_t = solve_elliptic(&m_t, &bd_t).unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                assert!((psi.at(i, j) - psi_t.at(j, i)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn resonant_coefficient_is_reported() {
        // The discrete Dirichlet Laplacian on a 4x4 grid (2x2 unknowns,
        // spacing 1) has eigenvalue -2; M = 1/2 makes 1/4 Lap + M singular.
        let spec = GridSpec::new(0.0, 3.0, 0.0, 3.0, 4, 4).unwrap();
        let m = CoefficientField::constant(spec, 0.5).unwrap();
        assert!(matches!(EllipticSolver::new(&m), Err(Error::Resonant { .. })));
    }
}
