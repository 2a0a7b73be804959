//! Conditions (i)-(v) for a tensor `D = mu J` on the horizontal
//! distribution of a Gauss-parametrized hypersurface, and the bending data
//! `Bcal = (A - lambda I) D + b I` it induces.
//!
//! `D` is transported from the base surface by horizontal lifts of the
//! conjugate coordinates, and vanishes on the fibers.

use nalgebra::{DMatrix, DVector};

use super::tensors::{codazzi_residual, gauss_residual, triviality, Frame};
use crate::error::{Error, IndexRect, Result};
use crate::gauss_param::geometry::{christoffels, covariant_derivatives, hessian, FirstJet, Immersion, Steps};
use crate::gauss_param::splitting::{horizontal_coefficients, horizontal_lift};
use crate::gauss_param::LocalPatch;
use crate::pde::PdeKind;
use crate::surface::ConjugateStructure;

/// Where the factor `mu` of `D = mu J` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuSource {
    /// The `mu` carried by the hypersurface, interpolated.
    Interpolated,
    Constant(f64),
}

/// Pointwise ingredients at a parameter point.
struct Local {
    g: DMatrix<f64>,
    lift: DMatrix<f64>,
    ghat_inv: DMatrix<f64>,
    shape: DMatrix<f64>,
    lambda: f64,
    d: DMatrix<f64>,
}

impl Local {
    fn at(patch: &LocalPatch, kind: PdeKind, source: MuSource, q: &[f64], h: f64) -> Option<Local> {
        let jet = FirstJet::at(patch, q, h)?;
        let g = jet.metric();
        let lift = horizontal_lift(&g)?;
        let ghat_inv = (lift.transpose() * &g * &lift).try_inverse()?;
        let shape = jet.shape_coords()?;
        let mu = match source {
            MuSource::Interpolated => patch.mu(q[0], q[1])?,
            MuSource::Constant(c) => c,
        };
        let j = ConjugateStructure::j_matrix(kind);
        let jm = DMatrix::from_fn(2, 2, |a, b| mu * j[a][b]);
        let d = &lift * jm * &ghat_inv * lift.transpose() * &g;
        let (lambda, _, _) = patch.lambda_jet(q[0], q[1]);
        Some(Local {
            g,
            lift,
            ghat_inv,
            shape,
            lambda,
            d,
        })
    }

    fn shifted_shape(&self) -> DMatrix<f64> {
        let n = self.shape.nrows();
        &self.shape - DMatrix::identity(n, n) * self.lambda
    }

    /// `E = (A - lambda I) D`.
    fn e(&self) -> DMatrix<f64> {
        self.shifted_shape() * &self.d
    }

    /// Coefficients of the horizontal part of `w` in the lift basis.
    fn alpha(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.ghat_inv * (self.lift.transpose() * &self.g * w)
    }
}

/// Residuals of conditions (i)-(v) at one point, in this order.
pub type DResiduals = [f64; 5];

/// D-induced bending residuals at one point: Gauss, Codazzi and the
/// distance of `Bcal` from a multiple of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedResiduals {
    pub gauss: f64,
    pub codazzi: f64,
    pub off_identity: f64,
}

/// `mu` must be nonzero wherever `D` is evaluated.
fn check_mu(patch: &LocalPatch, source: MuSource, p: &[f64]) -> Result<()> {
    let mu = match source {
        MuSource::Interpolated => patch.mu(p[0], p[1]).ok_or_else(|| {
            Error::Config("hypersurface carries no mu; attach one with GaussParam::with_mu".into())
        })?,
        MuSource::Constant(c) => c,
    };
    if mu == 0.0 || !mu.is_finite() {
        let (i, j) = patch.node();
        return Err(Error::MuNonPositive {
            at: crate::error::Location { i, j, u: p[0], v: p[1] },
            rect: IndexRect { i0: i, i1: i, j0: j, j1: j },
            value: mu,
        });
    }
    Ok(())
}

/// Evaluates conditions (i)-(v) at parameter point `p`. Each residual is
/// relative to the sum of the magnitudes of the terms it balances, so it is
/// independent of the scale of `mu` and of the coordinates.
pub fn d_residuals(patch: &LocalPatch, kind: PdeKind, source: MuSource, p: &[f64], steps: Steps) -> Result<Option<DResiduals>> {
    check_mu(patch, source, p)?;
    Ok(d_residuals_inner(patch, kind, source, p, steps))
}

fn d_residuals_inner(patch: &LocalPatch, kind: PdeKind, source: MuSource, p: &[f64], steps: Steps) -> Option<DResiduals> {
    let n = patch.dim();
    let h = steps.first;
    let here = Local::at(patch, kind, source, p, h)?;
    let gamma = christoffels(patch, p, steps)?;
    let field_d = |q: &[f64]| Local::at(patch, kind, source, q, h).map(|l| l.d);
    let field_e = |q: &[f64]| Local::at(patch, kind, source, q, h).map(|l| l.e());
    let nabla_d = covariant_derivatives(field_d, p, &gamma, steps.outer)?;
    let nabla_e = covariant_derivatives(field_e, p, &gamma, steps.outer)?;
    let along = |nabla: &[DMatrix<f64>], x: &DVector<f64>| {
        let mut out = DMatrix::zeros(n, n);
        for (k, nk) in nabla.iter().enumerate() {
            out += nk * x[k];
        }
        out
    };

    let x = here.lift.column(0).into_owned();
    let y = here.lift.column(1).into_owned();
    let ghat = here.lift.transpose() * &here.g * &here.lift;
    let gdot = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &here.g * b)[(0, 0)];
    let e = here.e();
    let ap = here.shifted_shape();

    let (_, dl, d2l) = patch.lambda_jet(p[0], p[1]);
    let mut dlambda = DVector::zeros(n);
    dlambda[0] = dl[0];
    dlambda[1] = dl[1];
    let mut d2 = DMatrix::zeros(n, n);
    for a in 0..2 {
        for b in 0..2 {
            d2[(a, b)] = d2l[a][b];
        }
    }
    let hess = hessian(&dlambda, &d2, &gamma);
    let hl = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &hess * b)[(0, 0)];

    let gnorm = |a: &DVector<f64>| gdot(a, a).max(0.0).sqrt();
    let rel = |r: f64, scale: f64| if r == 0.0 { 0.0 } else { r / scale };
    let (xn, yn) = (gnorm(&x), gnorm(&y));

    // (i) (A - lambda I) D is self-adjoint on the horizontal space.
    let (ex, ey) = (&e * &x, &e * &y);
    let r1 = rel((gdot(&ex, &y) - gdot(&x, &ey)).abs(), gnorm(&ex) * yn + xn * gnorm(&ey));

    // (ii) horizontal part of (nabla_T D) X vanishes for fiber T, against
    // |T| |D X|.
    let mut r2: f64 = 0.0;
    for t in 2..n {
        let tnorm = here.g[(t, t)].sqrt();
        for a in 0..2 {
            let xa = here.lift.column(a).into_owned();
            let w = &nabla_d[t] * &xa;
            let c = horizontal_coefficients(&here.g, &here.lift, &DMatrix::from_column_slice(n, 1, w.as_slice()))?;
            let hw = &here.lift * c.column(0);
            r2 = r2.max(rel(gnorm(&hw), tnorm * gnorm(&(&here.d * &xa))));
        }
    }

    // (iii) horizontal part of the Codazzi bracket of E against X ^ Y (D^t grad lambda).
    let dx = dlambda.dot(&(&here.d * &x));
    let dy = dlambda.dot(&(&here.d * &y));
    let (exy, eyx) = (along(&nabla_e, &x) * &y, along(&nabla_e, &y) * &x);
    let wedge = &x * dy - &y * dx;
    let bracket = &exy - &eyx - &wedge;
    let c = here.alpha(&bracket);
    let r3 = rel(
        (c.transpose() * &ghat * &c)[(0, 0)].max(0.0).sqrt(),
        gnorm(&exy) + gnorm(&eyx) + gnorm(&(&x * dy)) + gnorm(&(&y * dx)),
    );

    // (iv)
    let (dyx, dxy) = (along(&nabla_d, &y) * &x, along(&nabla_d, &x) * &y);
    let (hdx, hdy) = (hl(&(&here.d * &x), &y), hl(&x, &(&here.d * &y)));
    let (ax, ay) = (&here.shape * &x, &here.shape * &y);
    let (aey, eay) = (gdot(&ax, &ey), gdot(&ex, &ay));
    let lhs = dlambda.dot(&(&dyx - &dxy)) + hdx - hdy;
    let rhs = here.lambda * (aey - eay);
    let r4 = rel(
        (lhs - rhs).abs(),
        dlambda.dot(&dyx).abs() + dlambda.dot(&dxy).abs() + hdx.abs() + hdy.abs() + (here.lambda * aey).abs() + (here.lambda * eay).abs(),
    );

    // (v) E X ^ A' Y - E Y ^ A' X in the horizontal plane is a multiple of
    // the area form; compare the two determinants.
    let det = |a: &DVector<f64>, b: &DVector<f64>| a[0] * b[1] - a[1] * b[0];
    let hn = |a: &DVector<f64>| (a.transpose() * &ghat * a)[(0, 0)].max(0.0).sqrt();
    let (aex, aey) = (here.alpha(&ex), here.alpha(&ey));
    let (apx, apy) = (here.alpha(&(&ap * &x)), here.alpha(&(&ap * &y)));
    let area = ghat.determinant().max(0.0).sqrt();
    let r5 = rel(
        (det(&aex, &apy) - det(&aey, &apx)).abs() * area,
        hn(&aex) * hn(&apy) + hn(&aey) * hn(&apx),
    );

    Some([r1, r2, r3, r4, r5])
}

/// Fundamental-equation residuals of `Bcal = E + b I`, `H = -b A - lambda E`,
/// `A grad rho = -D^t grad lambda` at `p`.
pub fn induced_residuals(
    patch: &LocalPatch,
    kind: PdeKind,
    source: MuSource,
    b: f64,
    p: &[f64],
    steps: Steps,
) -> Result<Option<InducedResiduals>> {
    check_mu(patch, source, p)?;
    Ok(induced_inner(patch, kind, source, b, p, steps))
}

fn induced_inner(patch: &LocalPatch, kind: PdeKind, source: MuSource, b: f64, p: &[f64], steps: Steps) -> Option<InducedResiduals> {
    let n = patch.dim();
    let h = steps.first;
    let here = Local::at(patch, kind, source, p, h)?;
    let frame = Frame::new(here.g.clone())?;
    let id = DMatrix::<f64>::identity(n, n);
    let e = here.e();
    let bcal = &e + &id * b;
    let hmat = &here.shape * (-b) - &e * here.lambda;
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let gauss = gauss_residual(&frame.endo(&bcal), &sym(frame.endo(&here.shape)), &frame.endo(&hmat));

    let (_, dl, _) = patch.lambda_jet(p[0], p[1]);
    let mut dlambda = DVector::zeros(n);
    dlambda[0] = dl[0];
    dlambda[1] = dl[1];
    let a_grad_rho = -(&frame.ginv * here.d.transpose() * dlambda);
    let gamma = christoffels(patch, p, steps)?;
    let field = |q: &[f64]| Local::at(patch, kind, source, q, h).map(|l| l.e() + &id * b);
    let codazzi = codazzi_residual(field, p, &gamma, &frame, &a_grad_rho, steps.outer)?;
    let (off_identity, _) = triviality(&sym(frame.endo(&bcal)));
    Some(InducedResiduals {
        gauss,
        codazzi,
        off_identity,
    })
}
