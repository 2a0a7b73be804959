use super::coefficient::CoefficientField;
use super::grid::GridFunction;
use crate::error::{Error, Result};

/// Relative tolerance for the corner compatibility of Goursat data.
pub const CORNER_TOL: f64 = 1e-12;

/// Characteristic (Goursat) problem for `psi_uv + M psi = 0` with data on
/// the lines `v = v0` (`data_u`, indexed by `i`) and `u = u0` (`data_v`,
/// indexed by `j`).
///
/// Marches cell by cell with the second-order box rule
/// `psi11 = psi10 + psi01 - psi00 - du dv * Mbar * psibar`, where both bars
/// are averages over the four cell corners (the rule is implicit in `psi11`
/// but linear, so it is solved in closed form).
pub fn solve_goursat(m: &CoefficientField, data_u: &[f64], data_v: &[f64]) -> Result<GridFunction> {
    let spec = *m.spec();
    spec.validate()?;
    if data_u.len() != spec.nu {
        return Err(Error::DimensionMismatch {
            expected: spec.nu,
            got: data_u.len(),
        });
    }
    if data_v.len() != spec.nv {
        return Err(Error::DimensionMismatch {
            expected: spec.nv,
            got: data_v.len(),
        });
    }
    if let Some(k) = m.m.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(spec.location_of(k)));
    }
    for (k, x) in data_u.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(spec.location(k, 0)));
        }
    }
    for (k, x) in data_v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(spec.location(0, k)));
        }
    }
    let (a, b) = (data_u[0], data_v[0]);
    if (a - b).abs() > CORNER_TOL * (1.0 + a.abs().max(b.abs())) {
        return Err(Error::CornerMismatch {
            data_u: a,
            data_v: b,
        });
    }

    let k = spec.du() * spec.dv();
    let mut psi = GridFunction {
        spec,
        values: vec![0.0; spec.len()],
    };
    for (i, &x) in data_u.iter().enumerate() {
        psi.set(i, 0, x);
    }
    for (j, &x) in data_v.iter().enumerate().skip(1) {
        psi.set(0, j, x);
    }
    for i in 0..spec.nu - 1 {
        for j in 0..spec.nv - 1 {
            let p00 = psi.at(i, j);
            let p10 = psi.at(i + 1, j);
            let p01 = psi.at(i, j + 1);
            let mbar = 0.25 * (m.at(i, j) + m.at(i + 1, j) + m.at(i, j + 1) + m.at(i + 1, j + 1));
            let q = 0.25 * k * mbar;
            let p11 = (p10 + p01 - p00 - q * (p00 + p10 + p01)) / (1.0 + q);
            if !p11.is_finite() {
                return Err(Error::NonFinite(spec.location(i + 1, j + 1)));
            }
            psi.set(i + 1, j + 1, p11);
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::GridSpec;

    #[test]
    fn dalembert_when_m_vanishes() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 2.0, 17, 23).unwrap();
        let m = CoefficientField::constant(spec, 0.0).unwrap();
        let a = |u: f64| (3.0 * u).sin() + u * u;
        let b = |v: f64| v.exp();
        let du: Vec<f64> = (0..spec.nu).map(|i| a(spec.u(i)) + b(spec.v0) - a(spec.u0)).collect();
        let dv: Vec<f64> = (0..spec.nv).map(|j| b(spec.v(j))).collect();
        let psi = solve_goursat(&m, &du, &dv).unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let exact = a(spec.u(i)) + b(spec.v(j)) - a(spec.u0);
                assert!((psi.at(i, j) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_data_reproduced_exactly() {
        let spec = GridSpec::square(-0.5, 0.5, 12).unwrap();
        let m = CoefficientField::constant(spec, 1.0).unwrap();
        let du: Vec<f64> = (0..12).map(|i| (spec.u(i) + spec.v0).sin()).collect();
        let dv: Vec<f64> = (0..12).map(|j| (spec.u0 + spec.v(j)).sin()).collect();
        let psi = solve_goursat(&m, &du, &dv).unwrap();
        assert_eq!(psi.row_v0(), du);
        assert_eq!(psi.col_u0(), dv);
    }

    #[test]
    fn corner_mismatch_rejected() {
        let spec = GridSpec::square(0.0, 1.0, 5).unwrap();
        let m = CoefficientField::constant(spec, 1.0).unwrap();
        let du = vec![1.0; 5];
        let dv = vec![0.0; 5];
        assert!(matches!(
            solve_goursat(&m, &du, &dv),
            Err(Error::CornerMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_coefficient_rejected() {
        let spec = GridSpec::square(0.0, 1.0, 5).unwrap();
        let mut m = CoefficientField::constant(spec, 1.0).unwrap();
        m.m.values[7] = f64::NAN;
        assert!(matches!(
            solve_goursat(&m, &[0.0; 5], &[0.0; 5]),
            Err(Error::NonFinite(_))
        ));
    }
}
