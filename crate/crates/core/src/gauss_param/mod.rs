//! Hypersurfaces parametrized over the unit normal bundle of a surface `h`
//! by a pair `(h, r)`:
//!
//! `X(xi) = h - r (h_* grad r + sqrt(1 - |grad r|^2) xi)`,
//! with Gauss map `N = h_* grad r + sqrt(1 - |grad r|^2) xi`, so `X = h - r N`.
//!
//! Everything is evaluated through a local degree-4 model of the grid data
//! around a node, so derivatives of any order needed by the checks can be
//! taken by finite differences in the hypersurface parameters
//! `(u, v, theta_1, .., theta_{n-2})`.

pub mod focal;
pub mod geometry;
pub mod local;
pub mod sample;
pub mod splitting;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::SpecialPair;
use crate::pde::fd::Jets;
use crate::pde::{GridFunction, GridSpec};

pub use focal::{focal_loop, FocalOptions};
pub use geometry::{christoffels, covariant_derivatives, FirstJet, Immersion, RoundSphere, Steps};
pub use local::LocalModel;
pub use sample::{
    check_gauss_map, check_multiplicity, check_regularity, fiber_consistency, parametrize, sample_points,
    HypersurfaceSample, SamplePoint, DEFAULT_RANK_TOL,
};
pub use splitting::{horizontal_lift, off_span, splitting_tensors};

/// A candidate ambient basis vector is accepted into the normal frame when
/// its residual after projection has at least this norm.
const FRAME_ACCEPT: f64 = 0.3;

/// Orthonormal basis of the normal space of `h` at each node, obtained by
/// Gram-Schmidt of ambient basis vectors against `{h_u, h_v}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFrame {
    pub spec: GridSpec,
    pub euclid_dim: usize,
    /// Ambient basis indices used at each node, in Gram-Schmidt order.
    pub choice: Vec<Vec<usize>>,
    /// `vectors[node][a]` is the a-th frame vector.
    pub vectors: Vec<Vec<Vec<f64>>>,
}

/// Gram-Schmidt of the ambient basis vectors listed in `choice` against
/// `hu`, `hv` and each other. `None` if a residual degenerates.
pub fn frame_from_choice(hu: &DVector<f64>, hv: &DVector<f64>, choice: &[usize]) -> Option<Vec<DVector<f64>>> {
    let m = hu.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(choice.len() + 2);
    for t in [hu, hv] {
        let w = orthogonalize(t.clone(), &basis);
        let nw = w.norm();
        if nw < 1e-12 {
            return None;
        }
        basis.push(w / nw);
    }
    let mut out = Vec::with_capacity(choice.len());
    for &k in choice {
        let w = orthogonalize(DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 }), &basis);
        let nw = w.norm();
        if nw < 1e-8 {
            return None;
        }
        let xi = w / nw;
        basis.push(xi.clone());
        out.push(xi);
    }
    Some(out)
}

fn orthogonalize(mut w: DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    // Two passes keep the result orthogonal to working precision.
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w -= b * c;
        }
    }
    w
}

/// Picks `m - 2` ambient basis vectors for the normal frame: the first
/// acceptable ones in index order, falling back to the largest residual
/// at each step when that ordering degenerates.
fn choose_frame(hu: &DVector<f64>, hv: &DVector<f64>) -> Option<Vec<usize>> {
    let m = hu.len();
    let need = m - 2;
    let mut basis = Vec::new();
    for t in [hu, hv] {
        let w = orthogonalize(t.clone(), &basis);
        let nw = w.norm();
        if nw < 1e-12 {
            return None;
        }
        basis.push(w / nw);
    }
    let residual = |k: usize, basis: &[DVector<f64>]| {
        orthogonalize(DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 }), basis)
    };
    let mut ordered = basis.clone();
    let mut choice = Vec::new();
    for k in 0..m {
        if choice.len() == need {
            break;
        }
        let w = residual(k, &ordered);
        if w.norm() >= FRAME_ACCEPT {
            ordered.push(w.normalize());
            choice.push(k);
        }
    }
    if choice.len() == need {
        return Some(choice);
    }
    let mut ordered = basis;
    let mut choice = Vec::new();
    while choice.len() < need {
        let best = (0..m)
            .filter(|k| !choice.contains(k))
            .map(|k| (k, residual(k, &ordered).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?;
        ordered.push(residual(best.0, &ordered).normalize());
        choice.push(best.0);
    }
    Some(choice)
}

impl NormalFrame {
    pub fn new(pair: &SpecialPair) -> Result<Self> {
        let spec = *pair.spec();
        let m = pair.euclid_dim();
        let jets = Jets::compute(&spec, &pair.h.data, m);
        let mut choice = Vec::with_capacity(spec.len());
        let mut vectors = Vec::with_capacity(spec.len());
        for k in 0..spec.len() {
            let hu = DVector::from_column_slice(&jets.du[k * m..(k + 1) * m]);
            let hv = DVector::from_column_slice(&jets.dv[k * m..(k + 1) * m]);
            let at = spec.location_of(k);
            let c = choose_frame(&hu, &hv).ok_or(Error::NotImmersion { at })?;
            let f = frame_from_choice(&hu, &hv, &c).ok_or(Error::NotImmersion { at })?;
            vectors.push(f.iter().map(|x| x.iter().copied().collect()).collect());
            choice.push(c);
        }
        Ok(NormalFrame {
            spec,
            euclid_dim: m,
            choice,
            vectors,
        })
    }
}

/// The hypersurface of a special pair, with an optional conformal factor
/// `mu` of the conjugate structure carried along for the D-conditions.
#[derive(Debug, Clone)]
pub struct GaussParam {
    pair: SpecialPair,
    mu: Option<GridFunction>,
    frame: NormalFrame,
    /// Node-major `(h, r, mu)` with `m + 2` components per node.
    stacked: Vec<f64>,
}

impl GaussParam {
    pub fn new(pair: &SpecialPair) -> Result<Self> {
        let m = pair.euclid_dim();
        if m < 4 {
            return Err(Error::Config(format!(
                "hypersurface needs at least two fiber dimensions, euclidean dimension is {m}"
            )));
        }
        let mut gp = GaussParam {
            frame: NormalFrame::new(pair)?,
            pair: pair.clone(),
            mu: None,
            stacked: Vec::new(),
        };
        gp.restack();
        Ok(gp)
    }

    pub fn with_mu(mut self, mu: GridFunction) -> Result<Self> {
        self.pair.spec().check_same(&mu.spec)?;
        self.mu = Some(mu);
        self.restack();
        Ok(self)
    }

    fn restack(&mut self) {
        let spec = self.spec();
        let m = self.pair.euclid_dim();
        let mut data = Vec::with_capacity(spec.len() * (m + 2));
        for k in 0..spec.len() {
            data.extend_from_slice(&self.pair.h.data[k * m..(k + 1) * m]);
            data.push(self.pair.r.values[k]);
            data.push(self.mu.as_ref().map_or(0.0, |mu| mu.values[k]));
        }
        self.stacked = data;
    }

    pub fn mu(&self) -> Option<&GridFunction> {
        self.mu.as_ref()
    }

    pub fn pair(&self) -> &SpecialPair {
        &self.pair
    }

    pub fn spec(&self) -> &GridSpec {
        self.pair.spec()
    }

    pub fn frame(&self) -> &NormalFrame {
        &self.frame
    }

    /// Hypersurface dimension `n`; the ambient space is `R^{n+1}`.
    pub fn n(&self) -> usize {
        self.pair.euclid_dim() - 1
    }

    pub fn fiber_dim(&self) -> usize {
        self.n() - 2
    }

    /// Local model around node (i, j).
    pub fn local(&self, i: usize, j: usize) -> Result<LocalPatch> {
        let spec = self.spec();
        let m = self.pair.euclid_dim();
        Ok(LocalPatch {
            model: LocalModel::new(spec, &self.stacked, m + 2, i, j)?,
            choice: self.frame.choice[spec.index(i, j)].clone(),
            m,
            node: (i, j),
            has_mu: self.mu.is_some(),
        })
    }
}

/// Base-surface data at a point: `h`, its first derivatives, and `r` with
/// derivatives up to second order.
#[derive(Debug, Clone)]
pub struct BasePoint {
    pub h: DVector<f64>,
    pub hu: DVector<f64>,
    pub hv: DVector<f64>,
    pub r: f64,
    pub dr: [f64; 2],
}

/// The parametrization `X(u, v, theta)` around one grid node.
#[derive(Debug, Clone)]
pub struct LocalPatch {
    model: LocalModel,
    choice: Vec<usize>,
    m: usize,
    node: (usize, usize),
    has_mu: bool,
}

impl LocalPatch {
    pub fn node(&self) -> (usize, usize) {
        self.node
    }

    /// Parameter point for base node centre and fiber angles.
    pub fn point(&self, theta: &[f64]) -> Vec<f64> {
        let (u, v) = self.model.centre();
        let mut p = vec![u, v];
        p.extend_from_slice(theta);
        p
    }

    pub fn base(&self, u: f64, v: f64) -> BasePoint {
        let m = self.m;
        let f = self.model.eval(u, v, 0, 0);
        let fu = self.model.eval(u, v, 1, 0);
        let fv = self.model.eval(u, v, 0, 1);
        BasePoint {
            h: DVector::from_column_slice(&f[..m]),
            hu: DVector::from_column_slice(&fu[..m]),
            hv: DVector::from_column_slice(&fv[..m]),
            r: f[m],
            dr: [fu[m], fv[m]],
        }
    }

    /// `lambda = 1/r` with its first and second (u, v)-derivatives.
    pub fn lambda_jet(&self, u: f64, v: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let m = self.m;
        let r = self.model.eval(u, v, 0, 0)[m];
        let ru = self.model.eval(u, v, 1, 0)[m];
        let rv = self.model.eval(u, v, 0, 1)[m];
        let ruu = self.model.eval(u, v, 2, 0)[m];
        let ruv = self.model.eval(u, v, 1, 1)[m];
        let rvv = self.model.eval(u, v, 0, 2)[m];
        let l = 1.0 / r;
        let d = [-ru / (r * r), -rv / (r * r)];
        let hess = |a: f64, b: f64, ab: f64| 2.0 * a * b / (r * r * r) - ab / (r * r);
        (l, d, [[hess(ru, ru, ruu), hess(ru, rv, ruv)], [hess(ru, rv, ruv), hess(rv, rv, rvv)]])
    }

    /// Interpolated `mu`, if the hypersurface carries one.
    pub fn mu(&self, u: f64, v: f64) -> Option<f64> {
        self.has_mu.then(|| self.model.eval(u, v, 0, 0)[self.m + 1])
    }

    /// Orthonormal normal frame of `h` at (u, v).
    pub fn normal_frame(&self, u: f64, v: f64) -> Option<Vec<DVector<f64>>> {
        let b = self.base(u, v);
        frame_from_choice(&b.hu, &b.hv, &self.choice)
    }

    /// `h_* grad r` and `|grad r|^2` at a base point.
    pub fn gradient(b: &BasePoint) -> Option<(DVector<f64>, f64)> {
        let g = nalgebra::Matrix2::new(b.hu.dot(&b.hu), b.hu.dot(&b.hv), b.hu.dot(&b.hv), b.hv.dot(&b.hv));
        let ginv = g.try_inverse()?;
        let dr = nalgebra::Vector2::new(b.dr[0], b.dr[1]);
        let grad = ginv * dr;
        Some((&b.hu * grad[0] + &b.hv * grad[1], dr.dot(&grad)))
    }
}

impl Immersion for LocalPatch {
    fn dim(&self) -> usize {
        self.m - 1
    }

    fn eval(&self, p: &[f64]) -> Option<(DVector<f64>, DVector<f64>)> {
        let b = self.base(p[0], p[1]);
        let frame = frame_from_choice(&b.hu, &b.hv, &self.choice)?;
        let (hgrad, g2) = LocalPatch::gradient(&b)?;
        if !(g2 < 1.0) {
            return None;
        }
        let omega = geometry::sphere_point(&p[2..]);
        let mut xi = DVector::zeros(self.m);
        for (w, f) in omega.iter().zip(&frame) {
            xi += f * *w;
        }
        let normal = hgrad + xi * (1.0 - g2).sqrt();
        let x = &b.h - &normal * b.r;
        Some((x, normal))
    }
}


#[cfg(test)]
mod tests {
    use super::test_pairs::*;
    use super::*;

    #[test]
    fn frame_is_orthonormal_and_normal() {
        let spec = GridSpec::square(-0.4, 0.4, 13).unwrap();
        let pair = pair_from_fn(spec, 6, sphere_h(2.0, 6), |u, v| 0.8 + 0.1 * u - 0.05 * v);
        let frame = NormalFrame::new(&pair).unwrap();
        let gp = GaussParam::new(&pair).unwrap();
        let patch = gp.local(6, 6).unwrap();
        let (u, v) = (spec.u(6), spec.v(6));
        let f = patch.normal_frame(u, v).unwrap();
        let b = patch.base(u, v);
        assert_eq!(f.len(), 4);
        for (a, x) in f.iter().enumerate() {
            assert!((x.norm() - 1.0).abs() < 1e-12);
            assert!(x.dot(&b.hu).abs() < 1e-12 && x.dot(&b.hv).abs() < 1e-12);
            for y in &f[a + 1..] {
                assert!(x.dot(y).abs() < 1e-12);
            }
        }
        // Neighbouring nodes use the same basis choice on this patch.
        assert!(frame.choice.iter().all(|c| c == &frame.choice[0]));
    }

    #[test]
    fn tube_is_x_minus_c_xi() {
        let spec = GridSpec::square(-0.4, 0.4, 13).unwrap();
        let pair = pair_from_fn(spec, 6, sphere_h(2.0, 6), |_, _| 0.7);
        let gp = GaussParam::new(&pair).unwrap();
        let patch = gp.local(4, 7).unwrap();
        let p = patch.point(&[1.0, 0.8, 2.5]);
        let (x, n) = patch.eval(&p).unwrap();
        let b = patch.base(p[0], p[1]);
        assert!(((&b.h - &x) / 0.7 - &n).norm() < 1e-12);
        // With r constant, N is the fiber vector itself.
        let f = patch.normal_frame(p[0], p[1]).unwrap();
        let w = geometry::sphere_point(&p[2..]);
        let xi: DVector<f64> = f.iter().zip(&w).map(|(a, c)| a * *c).sum();
        assert!((n - xi).norm() < 1e-12);
    }

    #[test]
    fn rejects_small_ambient_dimension() {
        let spec = GridSpec::square(-0.4, 0.4, 9).unwrap();
        let pair = pair_from_fn(spec, 3, |u, v| vec![u, v, 0.0], |_, _| 1.0);
        assert!(GaussParam::new(&pair).is_err());
    }
}
