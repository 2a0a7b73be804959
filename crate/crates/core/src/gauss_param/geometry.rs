//! Finite-difference geometry of a parametrized hypersurface with a unit
//! normal: metric, second fundamental form, shape operator, Christoffel
//! symbols and covariant derivatives of (1,1)-tensor fields.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// A hypersurface given by a parametrization with unit normal.
pub trait Immersion: Sync {
    /// Number of parameters (the hypersurface dimension).
    fn dim(&self) -> usize;

    fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    /// Position and unit normal at `p`; `None` where the parametrization
    /// is undefined.
    fn eval(&self, p: &[f64]) -> Option<(DVector<f64>, DVector<f64>)>;
}

/// Finite-difference steps. `first` is used for first derivatives of the
/// parametrization, `outer` for differentiating quantities that are
/// themselves finite-difference estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub first: f64,
    pub outer: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Steps {
            first: 1e-3,
            outer: 4e-3,
        }
    }
}

/// Fourth-order central derivative of a vector-valued function along
/// coordinate `k`.
pub fn central<F>(f: F, p: &[f64], k: usize, h: f64) -> Option<DVector<f64>>
where
    F: Fn(&[f64]) -> Option<DVector<f64>>,
{
    let mut q = p.to_vec();
    let mut at = |s: f64| {
        q[k] = p[k] + s * h;
        f(&q)
    };
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    Some((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h))
}

/// Same stencil for matrix-valued functions.
pub fn central_mat<F>(f: F, p: &[f64], k: usize, h: f64) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<DMatrix<f64>>,
{
    let mut q = p.to_vec();
    let mut at = |s: f64| {
        q[k] = p[k] + s * h;
        f(&q)
    };
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    Some((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h))
}

/// Position, normal and their first derivatives at a parameter point.
#[derive(Debug, Clone)]
pub struct FirstJet {
    pub p: Vec<f64>,
    pub x: DVector<f64>,
    pub normal: DVector<f64>,
    /// Columns are `dX/dp_k`.
    pub dx: DMatrix<f64>,
    pub dn: DMatrix<f64>,
}

impl FirstJet {
    pub fn at<I: Immersion + ?Sized>(map: &I, p: &[f64], h: f64) -> Option<FirstJet> {
        let (x, normal) = map.eval(p)?;
        let n = map.dim();
        let m = map.ambient_dim();
        let mut dx = DMatrix::zeros(m, n);
        let mut dn = DMatrix::zeros(m, n);
        for k in 0..n {
            let both = central(
                |q| {
                    let (a, b) = map.eval(q)?;
                    let mut v = DVector::zeros(2 * m);
                    v.rows_mut(0, m).copy_from(&a);
                    v.rows_mut(m, m).copy_from(&b);
                    Some(v)
                },
                p,
                k,
                h,
            )?;
            dx.set_column(k, &both.rows(0, m));
            dn.set_column(k, &both.rows(m, m));
        }
        Some(FirstJet {
            p: p.to_vec(),
            x,
            normal,
            dx,
            dn,
        })
    }

    pub fn dim(&self) -> usize {
        self.dx.ncols()
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.dx.transpose() * &self.dx
    }

    /// Raw second fundamental form `-<dN_i, dX_j>` before symmetrization.
    pub fn second_form_raw(&self) -> DMatrix<f64> {
        -(self.dn.transpose() * &self.dx)
    }

    pub fn second_form(&self) -> DMatrix<f64> {
        let raw = self.second_form_raw();
        (&raw + raw.transpose()) * 0.5
    }

    /// Largest entry of the antisymmetric part of the raw second form.
    pub fn asymmetry(&self) -> f64 {
        let raw = self.second_form_raw();
        (&raw - raw.transpose()).abs().max() * 0.5
    }

    /// Ratio of the smallest to the largest singular value of `dX`.
    pub fn rank_ratio(&self) -> f64 {
        let sv = self.dx.singular_values();
        let max = sv.max();
        if max > 0.0 {
            sv.min() / max
        } else {
            0.0
        }
    }

    /// Largest `|<N, dX_k>|` over parameter directions, each normalized.
    pub fn normal_defect(&self) -> f64 {
        (0..self.dim())
            .map(|k| {
                let c = self.dx.column(k);
                (self.normal.dot(&c) / c.norm().max(f64::MIN_POSITIVE)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Shape operator in parameter coordinates, `G^{-1} II`.
    pub fn shape_coords(&self) -> Option<DMatrix<f64>> {
        let g = self.metric();
        g.cholesky().map(|c| c.solve(&self.second_form()))
    }

    /// Lower Cholesky factor `L` of the metric (`G = L L^T`); `L^T` maps
    /// parameter coordinates to an orthonormal frame.
    pub fn orthonormalizer(&self) -> Option<DMatrix<f64>> {
        self.metric().cholesky().map(|c| c.l())
    }

    /// Shape operator in the orthonormal frame given by the metric's
    /// Cholesky factor; symmetric by construction.
    pub fn shape_orthonormal(&self) -> Option<DMatrix<f64>> {
        let l = self.orthonormalizer()?;
        let linv = l.clone().try_inverse()?;
        let a = &linv * self.second_form() * linv.transpose();
        Some((&a + a.transpose()) * 0.5)
    }

    /// Principal curvatures in ascending order.
    pub fn principal_curvatures(&self) -> Option<Vec<f64>> {
        let a = self.shape_orthonormal()?;
        let mut e: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        Some(e)
    }
}

/// Christoffel symbols `gamma[k][(i, l)] = Gamma^i_{kl}` from second
/// derivatives of the parametrization.
pub fn christoffels<I: Immersion + ?Sized>(map: &I, p: &[f64], steps: Steps) -> Option<Vec<DMatrix<f64>>> {
    let n = map.dim();
    let m = map.ambient_dim();
    let jet = FirstJet::at(map, p, steps.first)?;
    let ginv = jet.metric().try_inverse()?;
    // d(dX)/dp_k, flattened column-major.
    let mut second = Vec::with_capacity(n);
    for k in 0..n {
        let d = central(
            |q| FirstJet::at(map, q, steps.first).map(|j| DVector::from_column_slice(j.dx.as_slice())),
            p,
            k,
            steps.outer,
        )?;
        second.push(DMatrix::from_column_slice(m, n, d.as_slice()));
    }
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for l in 0..n {
            let xkl = (second[k].column(l) + second[l].column(k)) * 0.5;
            let lowered = jet.dx.transpose() * xkl;
            let raised = &ginv * lowered;
            for i in 0..n {
                gamma[k][(i, l)] = raised[i];
            }
        }
    }
    Some(gamma)
}

/// Covariant derivatives `nabla_k K` (k over all parameters) of a
/// (1,1)-tensor field given in parameter coordinates.
pub fn covariant_derivatives<F>(field: F, p: &[f64], gamma: &[DMatrix<f64>], h: f64) -> Option<Vec<DMatrix<f64>>>
where
    F: Fn(&[f64]) -> Option<DMatrix<f64>>,
{
    let k0 = field(p)?;
    let mut out = Vec::with_capacity(gamma.len());
    for (k, g) in gamma.iter().enumerate() {
        let dk = central_mat(&field, p, k, h)?;
        out.push(dk + g * &k0 - &k0 * g);
    }
    Some(out)
}

/// Covariant Hessian `f_{ij} - Gamma^k_{ij} f_k` from coordinate
/// derivatives.
pub fn hessian(d1: &DVector<f64>, d2: &DMatrix<f64>, gamma: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = d1.len();
    let mut h = d2.clone();
    for i in 0..n {
        for j in 0..n {
            // Gamma^k_{ij} = gamma[i][(k, j)]
            let mut s = 0.0;
            for k in 0..n {
                s += gamma[i][(k, j)] * d1[k];
            }
            h[(i, j)] -= s;
        }
    }
    h
}

/// Round hypersphere of radius `radius` in R^{n+1} in hyperspherical
/// coordinates, with the inward normal. Umbilical control: every principal
/// curvature is `1/radius`.
#[derive(Debug, Clone, Copy)]
pub struct RoundSphere {
    pub n: usize,
    pub radius: f64,
}

/// Point of the unit sphere S^{m} from hyperspherical angles (m angles).
pub fn sphere_point(theta: &[f64]) -> Vec<f64> {
    let m = theta.len();
    let mut out = vec![0.0; m + 1];
    let mut s = 1.0;
    for (a, &t) in theta.iter().enumerate() {
        out[a] = s * t.cos();
        s *= t.sin();
    }
    out[m] = s;
    out
}

impl Immersion for RoundSphere {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, p: &[f64]) -> Option<(DVector<f64>, DVector<f64>)> {
        let w = DVector::from_vec(sphere_point(p));
        Some((&w * self.radius, -w))
    }
}
