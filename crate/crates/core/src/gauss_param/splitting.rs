//! Horizontal lifts of base directions and the splitting tensor
//! `C_T X = -(nabla_X T)_h` of the fiber distribution.

use nalgebra::{DMatrix, Matrix2, Vector2};

use super::geometry::{christoffels, FirstJet, Immersion, Steps};

/// Horizontal lifts of `d/du`, `d/dv` in parameter coordinates (columns):
/// `e_a - sum_b c_b e_{theta_b}` with `c = G_thth^{-1} G_th,a`, so that each
/// lift is orthogonal to the fiber.
pub fn horizontal_lift(metric: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = metric.nrows();
    let f = n - 2;
    let gtt = metric.view((2, 2), (f, f)).into_owned();
    let gtb = metric.view((2, 0), (f, 2)).into_owned();
    let c = gtt.cholesky()?.solve(&gtb);
    let mut h = DMatrix::zeros(n, 2);
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;
    h.view_mut((2, 0), (f, 2)).copy_from(&(-c));
    Some(h)
}

/// Coefficients in the basis of `lift` of the horizontal part of `w`
/// (parameter coordinates): `(H^T G H)^{-1} H^T G w`.
pub fn horizontal_coefficients(metric: &DMatrix<f64>, lift: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let ghat = lift.transpose() * metric * lift;
    ghat.cholesky().map(|c| c.solve(&(lift.transpose() * metric * w)))
}

/// Splitting tensors `C_T` for `T` each unit fiber coordinate direction, as
/// 2x2 matrices in the basis of horizontal lifts of `d/du`, `d/dv`.
pub fn splitting_tensors<I: Immersion + ?Sized>(map: &I, p: &[f64], steps: Steps) -> Option<Vec<Matrix2<f64>>> {
    let n = map.dim();
    let jet = FirstJet::at(map, p, steps.first)?;
    let g = jet.metric();
    let lift = horizontal_lift(&g)?;
    let gamma = christoffels(map, p, steps)?;
    let mut out = Vec::with_capacity(n - 2);
    for t in 2..n {
        let tnorm = g[(t, t)].sqrt();
        // nabla_{H_b} d_t = sum_k H_b^k Gamma^i_{k t} d_i
        let mut w = DMatrix::zeros(n, 2);
        for b in 0..2 {
            for k in 0..n {
                let hk = lift[(k, b)];
                if hk == 0.0 {
                    continue;
                }
                for i in 0..n {
                    w[(i, b)] += hk * gamma[k][(i, t)];
                }
            }
        }
        let coeff = horizontal_coefficients(&g, &lift, &w)?;
        out.push(Matrix2::new(coeff[(0, 0)], coeff[(0, 1)], coeff[(1, 0)], coeff[(1, 1)]) * (-1.0 / tnorm));
    }
    Some(out)
}

/// Distance (Frobenius) of `c` from the span of `basis`, divided by
/// `max(|c|, floor)`.
pub fn off_span(c: &Matrix2<f64>, basis: &[Matrix2<f64>], floor: f64) -> f64 {
    let k = basis.len();
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = DMatrix::zeros(k, 1);
    for a in 0..k {
        rhs[(a, 0)] = basis[a].dot(c);
        for b in 0..k {
            gram[(a, b)] = basis[a].dot(&basis[b]);
        }
    }
    let coef = gram.lu().solve(&rhs).unwrap_or_else(|| DMatrix::zeros(k, 1));
    let mut proj = Matrix2::zeros();
    for a in 0..k {
        proj += basis[a] * coef[(a, 0)];
    }
    (c - proj).norm() / c.norm().max(floor)
}

/// Component of a 2-vector along the metric `ghat`, used for norms in the
/// horizontal basis.
pub fn hnorm(ghat: &Matrix2<f64>, x: &Vector2<f64>) -> f64 {
    (x.transpose() * ghat * x)[(0, 0)].max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::test_pairs::*;
    use super::super::GaussParam;
    use super::*;
    use crate::pde::GridSpec;

    #[test]
    fn lift_is_orthogonal_to_fiber() {
        let g = DMatrix::from_row_slice(4, 4, &[
            3.0, 0.2, 0.5, 0.1, //
            0.2, 2.0, -0.3, 0.4, //
            0.5, -0.3, 1.5, 0.2, //
            0.1, 0.4, 0.2, 1.2,
        ]);
        let h = horizontal_lift(&g).unwrap();
        let x = &g * &h;
        for a in 0..2 {
            for t in 2..4 {
                assert!(x[(t, a)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rotation_hypersurface_splitting_is_multiple_of_identity() {
        // Planar h: the hypersurface is a rotation hypersurface.
        let spec = GridSpec::square(-0.4, 0.4, 13).unwrap();
        let pair = pair_from_fn(spec, 6, |u, v| vec![u, v, 0.0, 0.0, 0.0, 0.0], |u, v| {
            1.0 + 0.3 * u + 0.2 * v * v
        });
        let gp = GaussParam::new(&pair).unwrap();
        let patch = gp.local(6, 5).unwrap();
        let p = patch.point(&[1.1, 0.8, 2.0]);
        let cs = splitting_tensors(&patch, &p, Steps::default()).unwrap();
        for c in &cs {
            assert!(off_span(c, &[Matrix2::identity()], 1e-3) < 1e-5, "{c}");
        }
    }

    #[test]
    fn off_span_of_members_vanishes() {
        let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let basis = [Matrix2::identity(), j];
        assert!(off_span(&(Matrix2::identity() * 2.0 + j * 0.5), &basis, 1e-12) < 1e-14);
        assert!(off_span(&Matrix2::new(1.0, 0.0, 0.0, -1.0), &basis, 1e-12) > 0.99);
        assert_eq!(off_span(&Matrix2::zeros(), &basis, 1.0), 0.0);
    }
}
