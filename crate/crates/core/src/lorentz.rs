//! Lorentzian linear algebra in a pseudo-orthonormal basis.
//!
//! Coordinates are taken with respect to a basis `e_1, ..., e_d` with
//! `<e_1,e_1> = <e_d,e_d> = 0`, `<e_1,e_d> = -1/2` and `<e_i,e_j> = delta_ij`
//! otherwise, so that
//!
//! ```text
//! <x, y> = -(x_1 y_d + x_d y_1) / 2 + sum_{i=2}^{d-1} x_i y_i.
//! ```
//!
//! The light cone model of Euclidean space sits inside this space through
//! [`LightConeChart`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Lorentzian inner product of raw coordinate slices. Lengths must agree.
#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let d = x.len();
    let mut s = -0.5 * (x[0] * y[d - 1] + x[d - 1] * y[0]);
    for i in 1..d - 1 {
        s += x[i] * y[i];
    }
    s
}

/// Euclidean length of the coordinates in the orthonormal frame
/// `(t, e_2, ..., e_{d-1}, s)`. Used to measure vectors that need not be
/// spacelike.
pub fn frame_norm(x: &[f64]) -> f64 {
    let d = x.len();
    let t = 0.5 * (x[0] + x[d - 1]);
    let s = 0.5 * (x[0] - x[d - 1]);
    (t * t + s * s + x[1..d - 1].iter().map(|a| a * a).sum::<f64>()).sqrt()
}

/// A vector of `L^d` in pseudo-orthonormal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LorentzVector(pub Vec<f64>);

impl LorentzVector {
    pub fn new(coords: Vec<f64>) -> Self {
        LorentzVector(coords)
    }

    pub fn zeros(d: usize) -> Self {
        LorentzVector(vec![0.0; d])
    }

    /// The `k`-th basis vector (0-based).
    pub fn basis(d: usize, k: usize) -> Self {
        let mut c = vec![0.0; d];
        c[k] = 1.0;
        LorentzVector(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    /// Coordinates in the orthonormal frame `(t, s, e_2, ..., e_{d-1})` with
    /// `t = e_1 + e_d` timelike and `s = e_1 - e_d` spacelike.
    pub fn to_orthonormal(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.0.clone();
        out[0] = 0.5 * (self.0[0] + self.0[d - 1]);
        out[d - 1] = 0.5 * (self.0[0] - self.0[d - 1]);
        out
    }

    pub fn from_orthonormal(c: &[f64]) -> Self {
        let d = c.len();
        let mut out = c.to_vec();
        out[0] = c[0] + c[d - 1];
        out[d - 1] = c[0] - c[d - 1];
        LorentzVector(out)
    }
}

/// Checked Lorentzian inner product.
pub fn inner(x: &LorentzVector, y: &LorentzVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    if x.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.dim(),
        });
    }
    Ok(dot(&x.0, &y.0))
}

/// Membership test for de Sitter space `{<x,x> = 1}`.
pub fn de_sitter_check(x: &LorentzVector, tol: f64) -> bool {
    (x.norm_sq() - 1.0).abs() <= tol
}

/// Gram matrix of the pseudo-orthonormal basis of `L^d`.
pub fn gram_matrix(d: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(d, d);
    g[(0, 0)] = 0.0;
    g[(d - 1, d - 1)] = 0.0;
    g[(0, d - 1)] = -0.5;
    g[(d - 1, 0)] = -0.5;
    g
}

/// `(positive, negative)` eigenvalue counts of the Gram matrix.
pub fn signature(d: usize) -> (usize, usize) {
    let eig = gram_matrix(d).symmetric_eigen();
    let pos = eig.eigenvalues.iter().filter(|&&l| l > 1e-12).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -1e-12).count();
    (pos, neg)
}

/// A linear map of `L^d` (pseudo-orthonormal coordinates) preserving the
/// inner product.
#[derive(Debug, Clone)]
pub struct LorentzTransform(pub DMatrix<f64>);

impl LorentzTransform {
    /// Random composition of spatial rotations and boosts.
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Self {
        // Build in the orthonormal frame (t, x_2..x_{d-1}, s) with metric
        // diag(-1, 1, ..., 1), then conjugate back.
        let mut on = DMatrix::<f64>::identity(d, d);
        for _ in 0..2 * d {
            let a = rng.random_range(1..d);
            let mut b = rng.random_range(1..d);
            if a == b {
                b = if a + 1 < d { a + 1 } else { 1 };
            }
            if a == b {
                continue;
            }
            let th: f64 = rng.random_range(-1.0..1.0);
            let mut rot = DMatrix::<f64>::identity(d, d);
            rot[(a, a)] = th.cos();
            rot[(b, b)] = th.cos();
            rot[(a, b)] = -th.sin();
            rot[(b, a)] = th.sin();
            on = rot * on;
        }
        for _ in 0..2 {
            let a = rng.random_range(1..d);
            let phi = rng.random_range(-0.7..0.7);
            let mut boost = DMatrix::<f64>::identity(d, d);
            boost[(0, 0)] = f64::cosh(phi);
            boost[(a, a)] = f64::cosh(phi);
            boost[(0, a)] = f64::sinh(phi);
            boost[(a, 0)] = f64::sinh(phi);
            on = boost * on;
        }
        // Orthonormal frame ordering used here: index 0 = t, index d-1 = s.
        let mut p = DMatrix::<f64>::zeros(d, d); // pseudo -> orthonormal
        p[(0, 0)] = 0.5;
        p[(0, d - 1)] = 0.5;
        p[(d - 1, 0)] = 0.5;
        p[(d - 1, d - 1)] = -0.5;
        for i in 1..d - 1 {
            p[(i, i)] = 1.0;
        }
        let pinv = p.clone().try_inverse().expect("frame change is invertible");
        LorentzTransform(pinv * on * p)
    }

    pub fn apply(&self, x: &LorentzVector) -> LorentzVector {
        let y = &self.0 * DVector::from_column_slice(&x.0);
        LorentzVector(y.as_slice().to_vec())
    }
}

/// Isometric model of `R^{n+1}` inside the light cone of `L^{n+3}`.
#[derive(Debug, Clone)]
pub struct LightConeChart {
    v: LorentzVector,
    w: LorentzVector,
    /// Columns are the images of the standard basis of `R^{n+1}`.
    c_iso: DMatrix<f64>,
}

impl LightConeChart {
    /// `v = e_1`, `w = -2 e_{n+3}`, `C` sends the standard basis of
    /// `R^{n+1}` to `e_2, ..., e_{n+2}`. With this choice `Psi(y) = (1, y, |y|^2)`.
    pub fn standard(euclid_dim: usize) -> Self {
        let d = euclid_dim + 2;
        let v = LorentzVector::basis(d, 0);
        let mut w = LorentzVector::zeros(d);
        w.0[d - 1] = -2.0;
        let mut c = DMatrix::zeros(d, euclid_dim);
        for k in 0..euclid_dim {
            c[(k + 1, k)] = 1.0;
        }
        LightConeChart { v, w, c_iso: c }
    }

    /// Validating constructor.
    pub fn new(v: LorentzVector, w: LorentzVector, c_iso: DMatrix<f64>, tol: f64) -> Result<Self> {
        let d = v.dim();
        if w.dim() != d || c_iso.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: w.dim().min(c_iso.nrows()),
            });
        }
        if c_iso.ncols() + 2 != d {
            return Err(Error::DimensionMismatch {
                expected: d - 2,
                got: c_iso.ncols(),
            });
        }
        let chart = LightConeChart { v, w, c_iso };
        let err = chart.invariant_defect();
        if err > tol {
            return Err(Error::Config(format!(
                "light cone chart violates its invariants by {err:e}"
            )));
        }
        Ok(chart)
    }

    /// Image of this chart under a Lorentz transformation.
    pub fn transformed(&self, t: &LorentzTransform) -> Self {
        let v = t.apply(&self.v);
        let w = t.apply(&self.w);
        let c = &t.0 * &self.c_iso;
        LightConeChart { v, w, c_iso: c }
    }

    /// Largest violation among the chart invariants.
    pub fn invariant_defect(&self) -> f64 {
        let d = self.v.dim();
        let mut err: f64 = 0.0;
        err = err.max(self.v.norm_sq().abs());
        err = err.max(self.w.norm_sq().abs());
        err = err.max((dot(&self.v.0, &self.w.0) - 1.0).abs());
        let cols: Vec<Vec<f64>> = (0..self.c_iso.ncols())
            .map(|k| self.c_iso.column(k).iter().copied().collect())
            .collect();
        for (a, ca) in cols.iter().enumerate() {
            err = err.max(dot(ca, &self.v.0).abs());
            err = err.max(dot(ca, &self.w.0).abs());
            for (b, cb) in cols.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                err = err.max((dot(ca, cb) - target).abs());
            }
        }
        debug_assert_eq!(d, cols.first().map_or(d, |c| c.len()));
        err
    }

    pub fn euclid_dim(&self) -> usize {
        self.c_iso.ncols()
    }

    pub fn v(&self) -> &LorentzVector {
        &self.v
    }

    pub fn w(&self) -> &LorentzVector {
        &self.w
    }

    fn apply_c(&self, x: &[f64]) -> Vec<f64> {
        (&self.c_iso * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.euclid_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.euclid_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `Psi(x) = v + Cx - |x|^2 w / 2`.
    pub fn embed(&self, x: &[f64]) -> Result<LorentzVector> {
        self.check_dim(x)?;
        let cx = self.apply_c(x);
        let half_sq = 0.5 * x.iter().map(|a| a * a).sum::<f64>();
        let out = cx
            .iter()
            .zip(&self.v.0)
            .zip(&self.w.0)
            .map(|((c, v), w)| v + c - half_sq * w)
            .collect();
        Ok(LorentzVector(out))
    }

    /// `Psi_* U = CU - <x,U> w`.
    pub fn differential(&self, x: &[f64], u: &[f64]) -> Result<LorentzVector> {
        self.check_dim(x)?;
        self.check_dim(u)?;
        let cu = self.apply_c(u);
        let xu: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
        let out = cu.iter().zip(&self.w.0).map(|(c, w)| c - xu * w).collect();
        Ok(LorentzVector(out))
    }

    /// Second fundamental form of `Psi`: `-<U,V> w`.
    pub fn second_fundamental_form(&self, u: &[f64], v: &[f64]) -> Result<LorentzVector> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        Ok(LorentzVector(self.w.0.iter().map(|w| -uv * w).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_products() {
        let d = 8;
        let e1 = LorentzVector::basis(d, 0);
        let e2 = LorentzVector::basis(d, 1);
        let ed = LorentzVector::basis(d, d - 1);
        assert_eq!(inner(&e1, &ed).unwrap(), -0.5);
        assert_eq!(inner(&e2, &e2).unwrap(), 1.0);
        assert_eq!(inner(&e1, &e1).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = LorentzVector::zeros(4);
        let b = LorentzVector::zeros(5);
        assert!(matches!(inner(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn de_sitter_membership() {
        let d = 6;
        assert!(de_sitter_check(&LorentzVector::basis(d, 1), 1e-12));
        assert!(!de_sitter_check(&LorentzVector::basis(d, 0), 1e-12));
        let mut x = LorentzVector::zeros(d);
        x.0[0] = 1.0;
        x.0[d - 1] = 1.0;
        assert_eq!(x.norm_sq(), -1.0);
        assert!(!de_sitter_check(&x, 1e-12));
    }

    #[test]
    fn one_negative_direction() {
        for d in 3..10 {
            assert_eq!(signature(d), (d - 1, 1));
        }
    }

    #[test]
    fn orthonormal_frame_diagonalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = LorentzVector((0..7).map(|_| rng.random_range(-1.0..1.0)).collect());
        let c = x.to_orthonormal();
        let q = -c[0] * c[0] + c[1..].iter().map(|a| a * a).sum::<f64>();
        assert!((q - x.norm_sq()).abs() < 1e-14);
        let back = LorentzVector::from_orthonormal(&c);
        for (a, b) in back.0.iter().zip(&x.0) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn standard_chart_formulas() {
        let chart = LightConeChart::standard(6);
        assert!(chart.invariant_defect() < 1e-15);
        let origin = vec![0.0; 6];
        assert_eq!(chart.embed(&origin).unwrap(), *chart.v());
        let y = vec![0.3, -1.0, 2.0, 0.0, 0.5, 1.5];
        let p = chart.embed(&y).unwrap();
        let sq: f64 = y.iter().map(|a| a * a).sum();
        assert_eq!(p.0[0], 1.0);
        assert!((p.0[7] - sq).abs() < 1e-14);
        let u = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let du = chart.differential(&origin, &u).unwrap();
        assert_eq!(du.0[1], 1.0);
    }

    #[test]
    fn embedding_lands_in_euclidean_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = LightConeChart::standard(6);
        for trial in 0..5 {
            let chart = if trial == 0 {
                base.clone()
            } else {
                base.transformed(&LorentzTransform::random(8, &mut rng))
            };
            assert!(chart.invariant_defect() < 1e-10);
            for _ in 0..100 {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let p = chart.embed(&x).unwrap();
                let scale = 1.0 + x.iter().map(|a| a * a).sum::<f64>();
                assert!(p.norm_sq().abs() < 1e-12 * scale * scale);
                assert!((dot(&p.0, &chart.w().0) - 1.0).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn differential_is_isometric_and_curvature_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chart = LightConeChart::standard(6).transformed(&LorentzTransform::random(8, &mut rng));
        for _ in 0..50 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let du = chart.differential(&x, &u).unwrap();
            let dv = chart.differential(&x, &v).unwrap();
            let e: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((dot(&du.0, &dv.0) - e).abs() < 1e-12);

            // second derivative along the line x + t u
            let h = 1e-3;
            let at = |t: f64| {
                let p: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
                chart.embed(&p).unwrap()
            };
            let (pp, p0, pm) = (at(h), at(0.0), at(-h));
            let acc: Vec<f64> = (0..8)
                .map(|k| (pp.0[k] - 2.0 * p0.0[k] + pm.0[k]) / (h * h))
                .collect();
            let alpha = chart.second_fundamental_form(&u, &u).unwrap();
            for k in 0..8 {
                assert!((acc[k] - alpha.0[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn invalid_chart_rejected() {
        let d = 5;
        let v = LorentzVector::basis(d, 0);
        let w = LorentzVector::basis(d, d - 1); // <v,w> = -1/2
        let mut c = DMatrix::zeros(d, 3);
        for k in 0..3 {
            c[(k + 1, k)] = 1.0;
        }
        assert!(LightConeChart::new(v, w, c, 1e-10).is_err());
    }

    proptest::proptest! {
        #[test]
        fn inner_is_symmetric_bilinear(
            x in proptest::collection::vec(-10.0f64..10.0, 7),
            y in proptest::collection::vec(-10.0f64..10.0, 7),
            z in proptest::collection::vec(-10.0f64..10.0, 7),
            a in -3.0f64..3.0,
        ) {
            let s = dot(&x, &y) - dot(&y, &x);
            proptest::prop_assert!(s.abs() < 1e-12);
            let ax_z: Vec<f64> = x.iter().zip(&z).map(|(p, q)| a * p + q).collect();
            let lhs = dot(&ax_z, &y);
            let rhs = a * dot(&x, &y) + dot(&z, &y);
            proptest::prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
