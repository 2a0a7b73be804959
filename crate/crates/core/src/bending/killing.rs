//! Conformal Killing fields of Euclidean space:
//! `chi(x) = (<x,v> + lambda) x - |x|^2 v / 2 + C x + w` with conformal
//! factor `rho(x) = <x,v> + lambda`, `C` skew.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingData {
    pub lambda: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Rows of the skew matrix `C`.
    pub c: Vec<Vec<f64>>,
}

/// Tolerance on `|C + C^T|` when validating.
const SKEW_TOL: f64 = 1e-12;

impl KillingData {
    pub fn new(lambda: f64, v: Vec<f64>, w: Vec<f64>, c: DMatrix<f64>) -> Result<Self> {
        let m = v.len();
        if w.len() != m || c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: w.len().min(c.nrows()).min(c.ncols()),
            });
        }
        let sym = (&c + c.transpose()).abs().max();
        if sym > SKEW_TOL {
            return Err(Error::NotSkew(sym));
        }
        Ok(KillingData {
            lambda,
            v,
            w,
            c: c.row_iter().map(|r| r.iter().copied().collect()).collect(),
        })
    }

    pub fn zero(m: usize) -> Self {
        KillingData {
            lambda: 0.0,
            v: vec![0.0; m],
            w: vec![0.0; m],
            c: vec![vec![0.0; m]; m],
        }
    }

    /// Entries uniform in `[-scale, scale]`.
    pub fn random<R: Rng>(m: usize, scale: f64, rng: &mut R) -> Self {
        let mut u = || rng.random_range(-scale..scale);
        let lambda = u();
        let v = (0..m).map(|_| u()).collect();
        let w = (0..m).map(|_| u()).collect();
        let mut c = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let x = u();
                c[(i, j)] = x;
                c[(j, i)] = -x;
            }
        }
        KillingData::new(lambda, v, w, c).expect("random data is skew")
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Validates skew-symmetry after deserialization.
    pub fn validate(&self) -> Result<()> {
        KillingData::new(self.lambda, self.v.clone(), self.w.clone(), self.c_matrix()).map(|_| ())
    }

    pub fn c_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| self.c[i][j])
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &KillingData, b: f64) -> KillingData {
        let lin = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect::<Vec<_>>();
        KillingData {
            lambda: a * self.lambda + b * other.lambda,
            v: lin(&self.v, &other.v),
            w: lin(&self.w, &other.w),
            c: self.c.iter().zip(&other.c).map(|(r, s)| lin(r, s)).collect(),
        }
    }

    /// `(chi(x), rho(x))`.
    pub fn field(&self, x: &DVector<f64>) -> (DVector<f64>, f64) {
        let v = DVector::from_column_slice(&self.v);
        let rho = x.dot(&v) + self.lambda;
        let chi = x * rho - &v * (0.5 * x.norm_squared()) + self.c_matrix() * x + DVector::from_column_slice(&self.w);
        (chi, rho)
    }

    /// Ambient derivative `D chi = rho I + x v^T - v x^T + C`.
    pub fn derivative(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.dim();
        let v = DVector::from_column_slice(&self.v);
        let rho = x.dot(&v) + self.lambda;
        DMatrix::identity(m, m) * rho + x * v.transpose() - &v * x.transpose() + self.c_matrix()
    }
}

/// A variation field along a parametrized hypersurface together with its
/// claimed conformal factor.
pub trait BendingField: Sync {
    /// `(T, rho)` at parameter point `p` where the hypersurface is at `x`.
    fn at(&self, p: &[f64], x: &DVector<f64>) -> (DVector<f64>, f64);
}

impl BendingField for KillingData {
    fn at(&self, _p: &[f64], x: &DVector<f64>) -> (DVector<f64>, f64) {
        self.field(x)
    }
}

/// The same field with a shifted conformal factor (a wrong `rho`).
#[derive(Debug, Clone)]
pub struct ShiftedFactor<F> {
    pub inner: F,
    pub shift: f64,
}

impl<F: BendingField> BendingField for ShiftedFactor<F> {
    fn at(&self, p: &[f64], x: &DVector<f64>) -> (DVector<f64>, f64) {
        let (t, rho) = self.inner.at(p, x);
        (t, rho + self.shift)
    }
}

/// `c * T` with factor `c * rho`.
#[derive(Debug, Clone)]
pub struct ScaledField<F> {
    pub inner: F,
    pub scale: f64,
}

impl<F: BendingField> BendingField for ScaledField<F> {
    fn at(&self, p: &[f64], x: &DVector<f64>) -> (DVector<f64>, f64) {
        let (t, rho) = self.inner.at(p, x);
        (t * self.scale, rho * self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dilation_and_rigid_motion() {
        let mut k = KillingData::zero(4);
        k.lambda = 1.0;
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
        let (chi, rho) = k.field(&x);
        assert_eq!(rho, 1.0);
        assert!((chi - &x).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut r = KillingData::random(4, 1.0, &mut rng);
        r.lambda = 0.0;
        r.v = vec![0.0; 4];
        let (chi, rho) = r.field(&x);
        assert_eq!(rho, 0.0);
        let expect = r.c_matrix() * &x + DVector::from_column_slice(&r.w);
        assert!((chi - expect).norm() < 1e-14);
    }

    #[test]
    fn symmetrized_derivative_is_conformal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = 1e-4;
        for _ in 0..100 {
            let k = KillingData::random(6, 1.0, &mut rng);
            let x = DVector::from_fn(6, |_, _| rng.random_range(-2.0..2.0));
            let (_, rho) = k.field(&x);
            // Finite-difference Jacobian as an oracle independent of `derivative`.
            let mut jac = DMatrix::zeros(6, 6);
            for j in 0..6 {
                let mut e = DVector::zeros(6);
                e[j] = h;
                let d = (k.field(&(&x + &e)).0 - k.field(&(&x - &e)).0) / (2.0 * h);
                jac.set_column(j, &d);
            }
            let sym = &jac + jac.transpose() - DMatrix::identity(6, 6) * (2.0 * rho);
            assert!(sym.abs().max() < 1e-6, "{}", sym.abs().max());
            assert!((jac - k.derivative(&x)).abs().max() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_skew() {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            KillingData::new(0.0, vec![0.0; 2], vec![0.0; 2], c),
            Err(Error::NotSkew(_))
        ));
    }

    #[test]
    fn json_round_trip_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = KillingData::random(5, 1.0, &mut rng);
        let b = KillingData::random(5, 1.0, &mut rng);
        let s = serde_json::to_string(&a).unwrap();
        let back: KillingData = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
        back.validate().unwrap();
        let x = DVector::from_vec(vec![0.1, 0.2, -0.3, 0.4, 1.0]);
        let comb = a.combine(2.0, &b, -0.5);
        let (ca, ra) = a.field(&x);
        let (cb, rb) = b.field(&x);
        let (cc, rc) = comb.field(&x);
        assert!((cc - (ca * 2.0 - cb * 0.5)).norm() < 1e-13);
        assert!((rc - (2.0 * ra - 0.5 * rb)).abs() < 1e-13);
    }
}
