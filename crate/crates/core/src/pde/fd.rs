//! Second-order finite differences on node-major grid data.
//!
//! Central differences in the interior and second-order one-sided stencils
//! on the edges, so every derivative estimate is `O(Delta^2)`.

use super::grid::{Axis, GridSpec};

fn axis_layout(spec: &GridSpec, dim: usize, axis: Axis) -> (usize, usize, f64) {
    match axis {
        Axis::U => (spec.nu, spec.nv * dim, spec.du()),
        Axis::V => (spec.nv, dim, spec.dv()),
    }
}

/// First derivative of every component along `axis`.
pub fn d1(spec: &GridSpec, data: &[f64], dim: usize, axis: Axis) -> Vec<f64> {
    let (n, stride, h) = axis_layout(spec, dim, axis);
    let mut out = vec![0.0; data.len()];
    let lines = data.len() / n;
    // Each node (i, j, c) belongs to one line along `axis`; enumerate lines
    // by the base offset of their first node.
    let bases: Vec<usize> = (0..data.len()).filter(|&k| (k / stride) % n == 0).collect();
    debug_assert_eq!(bases.len(), lines);
    for base in bases {
        let f = |k: usize| data[base + k * stride];
        let mut put = |k: usize, x: f64| out[base + k * stride] = x;
        put(0, (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h));
        for k in 1..n - 1 {
            put(k, (f(k + 1) - f(k - 1)) / (2.0 * h));
        }
        put(
            n - 1,
            (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h),
        );
    }
    out
}

/// Second derivative of every component along `axis`.
pub fn d2(spec: &GridSpec, data: &[f64], dim: usize, axis: Axis) -> Vec<f64> {
    let (n, stride, h) = axis_layout(spec, dim, axis);
    let mut out = vec![0.0; data.len()];
    let h2 = h * h;
    let bases: Vec<usize> = (0..data.len()).filter(|&k| (k / stride) % n == 0).collect();
    for base in bases {
        let f = |k: usize| data[base + k * stride];
        let mut put = |k: usize, x: f64| out[base + k * stride] = x;
        put(0, (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2);
        for k in 1..n - 1 {
            put(k, (f(k + 1) - 2.0 * f(k) + f(k - 1)) / h2);
        }
        put(
            n - 1,
            (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2,
        );
    }
    out
}

/// Mixed derivative `d^2/du dv`.
pub fn d_uv(spec: &GridSpec, data: &[f64], dim: usize) -> Vec<f64> {
    let du = d1(spec, data, dim, Axis::U);
    d1(spec, &du, dim, Axis::V)
}

/// First and second derivatives bundled: `(f_u, f_v, f_uu, f_uv, f_vv)`.
#[derive(Debug, Clone)]
pub struct Jets {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub duu: Vec<f64>,
    pub duv: Vec<f64>,
    pub dvv: Vec<f64>,
}

impl Jets {
    pub fn compute(spec: &GridSpec, data: &[f64], dim: usize) -> Jets {
        let du = d1(spec, data, dim, Axis::U);
        let duv = d1(spec, &du, dim, Axis::V);
        Jets {
            dv: d1(spec, data, dim, Axis::V),
            duu: d2(spec, data, dim, Axis::U),
            dvv: d2(spec, data, dim, Axis::V),
            du,
            duv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_err(n: usize) -> f64 {
        let s = GridSpec::new(0.0, 1.0, -0.5, 0.5, n, n + 3).unwrap();
        let f = s.sample(|u, v| (2.0 * u).sin() * (v + 1.0).exp());
        let j = Jets::compute(&s, &f, 1);
        let mut err: f64 = 0.0;
        for i in 0..s.nu {
            for jj in 0..s.nv {
                let (u, v) = (s.u(i), s.v(jj));
                let k = s.index(i, jj);
                let e = (v + 1.0).exp();
                err = err.max((j.du[k] - 2.0 * (2.0 * u).cos() * e).abs());
                err = err.max((j.dv[k] - (2.0 * u).sin() * e).abs());
                err = err.max((j.duu[k] + 4.0 * (2.0 * u).sin() * e).abs());
                err = err.max((j.duv[k] - 2.0 * (2.0 * u).cos() * e).abs());
                err = err.max((j.dvv[k] - (2.0 * u).sin() * e).abs());
            }
        }
        err
    }

    #[test]
    fn quadratics_are_exact() {
        let s = GridSpec::new(0.0, 1.0, 0.0, 2.0, 6, 7).unwrap();
        let f = s.sample(|u, v| 1.0 + 2.0 * u - v + 3.0 * u * u + u * v - 0.5 * v * v);
        let j = Jets::compute(&s, &f, 1);
        for i in 0..s.nu {
            for jj in 0..s.nv {
                let (u, v) = (s.u(i), s.v(jj));
                let k = s.index(i, jj);
                assert!((j.du[k] - (2.0 + 6.0 * u + v)).abs() < 1e-11);
                assert!((j.dv[k] - (-1.0 + u - v)).abs() < 1e-11);
                assert!((j.duu[k] - 6.0).abs() < 1e-9);
                assert!((j.duv[k] - 1.0).abs() < 1e-10);
                assert!((j.dvv[k] + 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn second_order_including_edges() {
        let e1 = cubic_err(21);
        let e2 = cubic_err(41);
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn vector_components_are_independent() {
        let s = GridSpec::square(0.0, 1.0, 8).unwrap();
        let mut data = Vec::new();
        for i in 0..s.nu {
            for j in 0..s.nv {
                data.push(s.u(i));
                data.push(s.v(j));
            }
        }
        let du = d1(&s, &data, 2, Axis::U);
        let dv = d1(&s, &data, 2, Axis::V);
        for k in 0..s.len() {
            assert!((du[2 * k] - 1.0).abs() < 1e-12 && du[2 * k + 1].abs() < 1e-12);
            assert!(dv[2 * k].abs() < 1e-12 && (dv[2 * k + 1] - 1.0).abs() < 1e-12);
        }
    }
}
