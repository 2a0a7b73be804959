//! Pointwise bending calculus on a parametrized hypersurface: the bending
//! equation, the associated tensors `Bcal` and `H`, the fundamental
//! (Gauss and Codazzi) equations and the flat bilinear form `theta`.
//!
//! Tensors are handled in two forms: `(1,1)`-tensors in parameter
//! coordinates (for covariant differentiation) and symmetric matrices in
//! the orthonormal frame `L^T` where `G = L L^T` (for norms).

use nalgebra::{DMatrix, DVector};

use super::killing::BendingField;
use crate::gauss_param::geometry::{central, central_mat, covariant_derivatives, Immersion, Steps};

/// `[X, N, T, rho]` stacked.
fn stack<I: Immersion + ?Sized, F: BendingField + ?Sized>(map: &I, field: &F, q: &[f64]) -> Option<DVector<f64>> {
    let (x, n) = map.eval(q)?;
    let (t, rho) = field.at(q, &x);
    let m = x.len();
    let mut out = DVector::zeros(3 * m + 1);
    out.rows_mut(0, m).copy_from(&x);
    out.rows_mut(m, m).copy_from(&n);
    out.rows_mut(2 * m, m).copy_from(&t);
    out[3 * m] = rho;
    Some(out)
}

fn stack_d1<I: Immersion + ?Sized, F: BendingField + ?Sized>(map: &I, field: &F, q: &[f64], h: f64) -> Option<DMatrix<f64>> {
    let n = map.dim();
    let len = 3 * map.ambient_dim() + 1;
    let mut d = DMatrix::zeros(len, n);
    for k in 0..n {
        d.set_column(k, &central(|r| stack(map, field, r), q, k, h)?);
    }
    Some(d)
}

/// First-order data of a bending at a point.
#[derive(Debug, Clone)]
pub struct BendingJet {
    pub x: DVector<f64>,
    pub normal: DVector<f64>,
    pub t: DVector<f64>,
    pub rho: f64,
    pub dx: DMatrix<f64>,
    pub dn: DMatrix<f64>,
    pub dt: DMatrix<f64>,
    pub drho: DVector<f64>,
}

impl BendingJet {
    pub fn at<I: Immersion + ?Sized, F: BendingField + ?Sized>(map: &I, field: &F, p: &[f64], h: f64) -> Option<Self> {
        let m = map.ambient_dim();
        let s = stack(map, field, p)?;
        let d = stack_d1(map, field, p, h)?;
        Some(BendingJet {
            x: s.rows(0, m).into_owned(),
            normal: s.rows(m, m).into_owned(),
            t: s.rows(2 * m, m).into_owned(),
            rho: s[3 * m],
            dx: d.rows(0, m).into_owned(),
            dn: d.rows(m, m).into_owned(),
            dt: d.rows(2 * m, m).into_owned(),
            drho: d.row(3 * m).transpose(),
        })
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.dx.transpose() * &self.dx
    }

    pub fn second_form(&self) -> DMatrix<f64> {
        let raw = -(self.dn.transpose() * &self.dx);
        (&raw + raw.transpose()) * 0.5
    }
}

/// Orthonormal-frame conversions for a metric `G = L L^T`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    l: DMatrix<f64>,
    linv: DMatrix<f64>,
}

impl Frame {
    pub fn new(g: DMatrix<f64>) -> Option<Self> {
        let l = g.clone().cholesky()?.l();
        let linv = l.clone().try_inverse()?;
        let ginv = linv.transpose() * &linv;
        Some(Frame { g, ginv, l, linv })
    }

    /// Symmetric bilinear form to the orthonormal frame.
    pub fn form(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        &self.linv * b * self.linv.transpose()
    }

    /// `(1,1)`-tensor to the orthonormal frame.
    pub fn endo(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        self.l.transpose() * k * self.linv.transpose()
    }

    /// Coordinate vector to the orthonormal frame.
    pub fn vector(&self, x: &DVector<f64>) -> DVector<f64> {
        self.l.transpose() * x
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.g * x)[(0, 0)].max(0.0).sqrt()
    }
}

/// Residual matrix of the bending equation
/// `<dT X, dX Y> + <dX X, dT Y> - 2 rho <X, Y>` in the orthonormal frame.
pub fn cib_matrix(jet: &BendingJet) -> Option<DMatrix<f64>> {
    let g = jet.metric();
    let frame = Frame::new(g.clone())?;
    let c = jet.dt.transpose() * &jet.dx;
    let r = &c + c.transpose() - g * (2.0 * jet.rho);
    Some(frame.form(&r))
}

/// Associated tensors at a point.
#[derive(Debug, Clone)]
pub struct Associated {
    pub frame: Frame,
    pub rho: f64,
    /// Shape operator, `Bcal` and `H` as `(1,1)`-tensors in coordinates.
    pub shape: DMatrix<f64>,
    pub bcal: DMatrix<f64>,
    pub hess: DMatrix<f64>,
    pub grad_rho: DVector<f64>,
    /// Christoffel symbols `gamma[k][(i, l)] = Gamma^i_{kl}`.
    pub gamma: Vec<DMatrix<f64>>,
    /// Largest antisymmetric entry of the raw `<B(X,Y), N>` form.
    pub bcal_asymmetry: f64,
}

impl Associated {
    pub fn shape_on(&self) -> DMatrix<f64> {
        sym(&self.frame.endo(&self.shape))
    }

    pub fn bcal_on(&self) -> DMatrix<f64> {
        sym(&self.frame.endo(&self.bcal))
    }

    pub fn hess_on(&self) -> DMatrix<f64> {
        sym(&self.frame.endo(&self.hess))
    }
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// `<Bcal X, Y> = <B(X,Y), N>` with `B(X,Y) = (nabla~_X L) Y - L nabla_X Y`,
/// `L X = nabla~_X T - rho X`, and `H = Hess rho`, from second differences of
/// the stacked `(X, N, T, rho)`.
pub fn associated_tensors<I: Immersion + ?Sized, F: BendingField + ?Sized>(
    map: &I,
    field: &F,
    p: &[f64],
    steps: Steps,
) -> Option<Associated> {
    let n = map.dim();
    let m = map.ambient_dim();
    let jet = BendingJet::at(map, field, p, steps.first)?;
    let frame = Frame::new(jet.metric())?;
    let ii = jet.second_form();
    let d1 = |q: &[f64]| stack_d1(map, field, q, steps.first);
    let mut second = Vec::with_capacity(n);
    for k in 0..n {
        second.push(central_mat(d1, p, k, steps.outer)?);
    }
    // d_k d_l of component c is second[k][(c, l)]; symmetrize in (k, l).
    let d2 = |c: usize, k: usize, l: usize| 0.5 * (second[k][(c, l)] + second[l][(c, k)]);
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    let mut braw = DMatrix::zeros(n, n);
    let mut hraw = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let xkl = DVector::from_fn(m, |c, _| d2(c, k, l));
            let tkl = DVector::from_fn(m, |c, _| second[k][(2 * m + c, l)]);
            let g = &frame.ginv * (jet.dx.transpose() * &xkl);
            for i in 0..n {
                gamma[k][(i, l)] = g[i];
            }
            let tangential_t = &jet.dt * &g;
            braw[(k, l)] = (tkl - tangential_t).dot(&jet.normal) - jet.rho * ii[(k, l)];
            hraw[(k, l)] = d2(3 * m, k, l) - jet.drho.dot(&g);
        }
    }
    let bcal_asymmetry = frame.form(&(&braw - braw.transpose())).abs().max() * 0.5;
    let shape = &frame.ginv * &ii;
    Some(Associated {
        bcal: &frame.ginv * sym(&braw),
        hess: &frame.ginv * sym(&hraw),
        grad_rho: &frame.ginv * &jet.drho,
        rho: jet.rho,
        shape,
        gamma,
        bcal_asymmetry,
        frame,
    })
}

/// `((U ^ V) Z)` paired with `W` in an orthonormal frame:
/// `(U ^ V) Z = <V, Z> U - <U, Z> V`.
fn wedge_pair(u: &DVector<f64>, v: &DVector<f64>, z: usize, w: usize) -> f64 {
    v[z] * u[w] - u[z] * v[w]
}

/// Largest entry of `<(Bcal X ^ A Y - Bcal Y ^ A X + X ^ H Y - Y ^ H X) Z, W>`
/// over orthonormal basis vectors; all inputs in the orthonormal frame.
pub fn gauss_residual(bcal: &DMatrix<f64>, a: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let (ex, ey) = (e(x), e(y));
            let (bx, by) = (bcal.column(x).into_owned(), bcal.column(y).into_owned());
            let (ax, ay) = (a.column(x).into_owned(), a.column(y).into_owned());
            let (hx, hy) = (h.column(x).into_owned(), h.column(y).into_owned());
            for z in 0..n {
                for w in 0..n {
                    let r = wedge_pair(&bx, &ay, z, w) - wedge_pair(&by, &ax, z, w) + wedge_pair(&ex, &hy, z, w)
                        - wedge_pair(&ey, &hx, z, w);
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    worst
}

/// `<<theta(X,Y), theta(Z,W)>>` with signature `(1,1,-1,-1)` for orthonormal
/// basis indices.
pub fn theta_pairing(a: &DMatrix<f64>, bcal: &DMatrix<f64>, h: &DMatrix<f64>, idx: [usize; 4]) -> f64 {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let ap = a + bcal;
    let am = a - bcal;
    let ip = &id + h;
    let im = &id - h;
    let [x, y, z, w] = idx;
    ap[(y, x)] * ap[(w, z)] + ip[(y, x)] * ip[(w, z)] - am[(y, x)] * am[(w, z)] - im[(y, x)] * im[(w, z)]
}

/// `(flatness, nullity)` residuals of `theta` over all orthonormal 4-tuples.
pub fn theta_residuals(a: &DMatrix<f64>, bcal: &DMatrix<f64>, h: &DMatrix<f64>) -> (f64, f64) {
    let n = a.nrows();
    let (mut flat, mut null): (f64, f64) = (0.0, 0.0);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let p = theta_pairing(a, bcal, h, [x, y, z, w]);
                    let q = theta_pairing(a, bcal, h, [x, w, z, y]);
                    flat = flat.max((p - q).abs());
                    null = null.max(p.abs());
                }
            }
        }
    }
    (flat, null)
}

/// `(|Bcal - phi I|_max, phi)` with `phi = tr Bcal / n`, orthonormal frame.
pub fn triviality(bcal: &DMatrix<f64>) -> (f64, f64) {
    let n = bcal.nrows();
    let phi = bcal.trace() / n as f64;
    let r = (bcal - DMatrix::identity(n, n) * phi).abs().max();
    (r, phi)
}

/// Codazzi residual `(nabla_X Bcal) Y - (nabla_Y Bcal) X + (X ^ Y) A grad rho`
/// over coordinate pairs, relative to the sum of the norms of the three
/// terms. The scale is floored at `1e-8 (1 + |Bcal|)` so that an almost
/// parallel `Bcal` is not judged on rounding noise. `bcal` gives the
/// `(1,1)`-tensor in coordinates near `p`; `a_grad_rho` is in coordinates.
pub fn codazzi_residual<B>(bcal: B, p: &[f64], gamma: &[DMatrix<f64>], frame: &Frame, a_grad_rho: &DVector<f64>, h: f64) -> Option<f64>
where
    B: Fn(&[f64]) -> Option<DMatrix<f64>>,
{
    let n = gamma.len();
    let floor = 1e-8 * (1.0 + frame.endo(&bcal(p)?).abs().max());
    let nabla = covariant_derivatives(&bcal, p, gamma, h)?;
    let lowered = &frame.g * a_grad_rho;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            let (a, b) = (nabla[k].column(l).into_owned(), nabla[l].column(k).into_owned());
            let mut w = DVector::zeros(n);
            w[k] = lowered[l];
            w[l] = -lowered[k];
            let r = &a - &b + &w;
            let scale = frame.norm(&a) + frame.norm(&b) + frame.norm(&w);
            worst = worst.max(frame.norm(&r) / scale.max(floor));
        }
    }
    Some(worst)
}

/// `dm/dt` at `t = 0` for `m(t) = exp(-2 t rho) <f_t* X, f_t* Y>`, with
/// `f_t = f + t T`, by a fourth-order central difference in `t`. Entries
/// are for coordinate pairs, divided by `|X| |Y|`; also returns
/// `<X, Y> / (|X| |Y|)`.
pub fn conformality_derivative(jet: &BendingJet, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = jet.dx.ncols();
    let g = jet.metric();
    let m_at = |t: f64| {
        let ft = &jet.dx + &jet.dt * t;
        (ft.transpose() * ft) * (-2.0 * t * jet.rho).exp()
    };
    let d = ((m_at(dt) - m_at(-dt)) * 8.0 - (m_at(2.0 * dt) - m_at(-2.0 * dt))) / (12.0 * dt);
    let scale = DMatrix::from_fn(n, n, |k, l| (g[(k, k)] * g[(l, l)]).sqrt());
    (d.component_div(&scale), g.component_div(&scale))
}
