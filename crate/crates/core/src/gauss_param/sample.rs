//! Sampling the hypersurface and the per-sample checks: regularity, Gauss
//! map, principal curvature multiplicity and fiber eigen-directions.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{FirstJet, Immersion, Steps};
use super::local::HALF_WIDTH;
use super::GaussParam;
use crate::error::{Location, Result};
use crate::pde::GridSpec;
use crate::report::{Check, MaxTracker, Tol};

/// Regularity threshold: smallest singular value of the Jacobian over the
/// largest.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Polar fiber angles stay this far from the coordinate singularities.
const POLAR_MARGIN: f64 = 0.3;

/// A base node with fiber angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub i: usize,
    pub j: usize,
    pub theta: Vec<f64>,
}

/// Random fiber angles for `S^{fiber_dim}`: polar angles away from the poles,
/// the last angle over the full circle.
pub fn random_angles<R: Rng>(fiber_dim: usize, rng: &mut R) -> Vec<f64> {
    (0..fiber_dim)
        .map(|a| {
            if a + 1 < fiber_dim {
                rng.random_range(POLAR_MARGIN..std::f64::consts::PI - POLAR_MARGIN)
            } else {
                rng.random_range(0.0..std::f64::consts::TAU)
            }
        })
        .collect()
}

/// `count` random samples over nodes far enough from the boundary for a
/// local model.
pub fn sample_points(spec: &GridSpec, fiber_dim: usize, count: usize, seed: u64) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = HALF_WIDTH;
    (0..count)
        .map(|_| SamplePoint {
            i: rng.random_range(w..spec.nu - w),
            j: rng.random_range(w..spec.nv - w),
            theta: random_angles(fiber_dim, &mut rng),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceSample {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub lambda: f64,
    /// Principal curvatures, ascending.
    pub eigenvalues: Vec<f64>,
    /// Antisymmetric part of the raw shape operator before symmetrization.
    pub asymmetry: f64,
    pub rank_ratio: f64,
    pub normal_defect: f64,
    pub regular: bool,
}

impl HypersurfaceSample {
    pub fn location(&self) -> Location {
        Location {
            i: self.i,
            j: self.j,
            u: self.u,
            v: self.v,
        }
    }

    pub fn param(&self) -> Vec<f64> {
        let mut p = vec![self.u, self.v];
        p.extend_from_slice(&self.theta);
        p
    }
}

/// Evaluates position, Gauss map and shape operator at every sample. Samples
/// where the parametrization is undefined or the Jacobian is rank deficient
/// are kept with `regular = false`.
pub fn parametrize(gp: &GaussParam, points: &[SamplePoint], rank_tol: f64, steps: Steps) -> Result<Vec<HypersurfaceSample>> {
    let spec = *gp.spec();
    points
        .par_iter()
        .map(|pt| {
            let patch = gp.local(pt.i, pt.j)?;
            let p = patch.point(&pt.theta);
            let (lambda, _, _) = patch.lambda_jet(p[0], p[1]);
            let mut s = HypersurfaceSample {
                i: pt.i,
                j: pt.j,
                u: spec.u(pt.i),
                v: spec.v(pt.j),
                theta: pt.theta.clone(),
                x: Vec::new(),
                normal: Vec::new(),
                lambda,
                eigenvalues: Vec::new(),
                asymmetry: f64::NAN,
                rank_ratio: 0.0,
                normal_defect: f64::NAN,
                regular: false,
            };
            if let Some(jet) = FirstJet::at(&patch, &p, steps.first) {
                s.x = jet.x.iter().copied().collect();
                s.normal = jet.normal.iter().copied().collect();
                s.rank_ratio = jet.rank_ratio();
                s.normal_defect = jet.normal_defect();
                s.asymmetry = jet.asymmetry();
                s.regular = s.rank_ratio > rank_tol;
                if s.regular {
                    match jet.principal_curvatures() {
                        Some(e) => s.eigenvalues = e,
                        None => s.regular = false,
                    }
                }
            }
            Ok(s)
        })
        .collect()
}

/// Fraction of regular samples must reach `min_fraction`.
pub fn check_regularity(samples: &[HypersurfaceSample], min_fraction: f64) -> Check {
    let regular = samples.iter().filter(|s| s.regular).count();
    let frac = if samples.is_empty() {
        0.0
    } else {
        regular as f64 / samples.len() as f64
    };
    let mut c = Check::predicate("regular_fraction", frac >= min_fraction);
    c.max_residual = 1.0 - frac;
    c.tolerance = 1.0 - min_fraction;
    c
}

/// `| |N| - 1 |` and the normalized `<N, dX_k>` over regular samples.
pub fn check_gauss_map(samples: &[HypersurfaceSample], tol: f64) -> Vec<Check> {
    let mut unit = MaxTracker::new();
    let mut orth = MaxTracker::new();
    for s in samples.iter().filter(|s| s.regular) {
        let n: f64 = s.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        unit.update(n - 1.0, s.location());
        orth.update(s.normal_defect, s.location());
    }
    vec![
        Check::new("gauss_map_unit", unit, Tol::absolute(tol), 1.0),
        Check::new("gauss_map_orthogonal", orth, Tol::absolute(tol), 1.0),
    ]
}

/// Summary of the eigenvalue cluster around `lambda = 1/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplicity {
    /// Largest distance of the `n - 2` nearest eigenvalues to `lambda`.
    pub cluster: MaxTracker,
    /// Smallest distance of the remaining two eigenvalues to `lambda`.
    pub separation: f64,
    pub separation_at: Option<Location>,
    /// Samples whose cluster has exactly `n - 2` members inside the band
    /// with the other two outside five times the band.
    pub exact: usize,
    pub regular: usize,
}

pub fn multiplicity(samples: &[HypersurfaceSample], fiber_dim: usize, band: f64) -> Multiplicity {
    let mut cluster = MaxTracker::new();
    let mut separation = f64::INFINITY;
    let mut separation_at = None;
    let mut exact = 0;
    let mut regular = 0;
    for s in samples.iter().filter(|s| s.regular) {
        regular += 1;
        let mut d: Vec<f64> = s.eigenvalues.iter().map(|e| (e - s.lambda).abs()).collect();
        d.sort_by(f64::total_cmp);
        let worst_in = d[fiber_dim - 1];
        let best_out = d[fiber_dim];
        cluster.update(worst_in, s.location());
        if best_out < separation || (best_out == separation && separation_at.is_none()) {
            separation = best_out;
            separation_at = Some(s.location());
        }
        let inside = d.iter().filter(|&&x| x <= band).count();
        if inside == fiber_dim && best_out > 5.0 * band {
            exact += 1;
        }
    }
    Multiplicity {
        cluster,
        separation,
        separation_at,
        exact,
        regular,
    }
}

/// Multiplicity of `lambda = 1/r`: `n - 2` eigenvalues within `tol` of
/// `lambda`, the other two outside five times that band.
pub fn check_multiplicity(samples: &[HypersurfaceSample], fiber_dim: usize, tol: Tol, delta: f64) -> Vec<Check> {
    let band = tol.bound(delta);
    let m = multiplicity(samples, fiber_dim, band);
    let cluster = Check::new("multiplicity_cluster", m.cluster, tol, delta)
        .with_hypothesis("principal curvature 1/r has multiplicity n-2");
    let mut sep = Check::predicate("multiplicity_separation", m.regular > 0 && m.separation > 5.0 * band)
        .with_hypothesis("remaining principal curvatures differ from 1/r");
    sep.max_residual = m.separation;
    sep.tolerance = 5.0 * band;
    sep.location = m.separation_at;
    vec![cluster, sep]
}

/// Fiber directions are eigen-directions: `dN(T) + lambda dX(T)` relative
/// to `|dX(T)|`, over fiber coordinate directions `T`.
pub fn fiber_consistency(gp: &GaussParam, samples: &[HypersurfaceSample], steps: Steps) -> Result<MaxTracker> {
    let n = gp.n();
    let trackers: Vec<MaxTracker> = samples
        .par_iter()
        .filter(|s| s.regular)
        .map(|s| {
            let patch = gp.local(s.i, s.j)?;
            let mut t = MaxTracker::new();
            match FirstJet::at(&patch, &s.param(), steps.first) {
                Some(jet) => {
                    for k in 2..n {
                        let dx = jet.dx.column(k);
                        let r = (jet.dn.column(k) + dx * s.lambda).norm() / dx.norm();
                        t.update(r, s.location());
                    }
                }
                None => t.update(f64::NAN, s.location()),
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(trackers.into_iter().fold(MaxTracker::new(), MaxTracker::merge))
}

/// CSV with header `u,v,theta1..,x1..,n1..,lambda,eig1..,regular`.
pub fn write_samples_csv<W: Write>(samples: &[HypersurfaceSample], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some(first) = samples.first() else {
        out.flush()?;
        return Ok(());
    };
    // Ambient dimension is n + 1 = fiber dimension + 3.
    let (f, m) = (first.theta.len(), first.theta.len() + 3);
    let mut header = vec!["u".to_string(), "v".to_string()];
    header.extend((1..=f).map(|a| format!("theta{a}")));
    header.extend((1..=m).map(|a| format!("x{a}")));
    header.extend((1..=m).map(|a| format!("n{a}")));
    header.push("lambda".into());
    header.extend((1..m).map(|a| format!("eig{a}")));
    header.push("regular".into());
    out.write_record(&header)?;
    for s in samples {
        let mut row: Vec<String> = vec![s.u.to_string(), s.v.to_string()];
        row.extend(s.theta.iter().map(f64::to_string));
        let pad = |xs: &[f64], len: usize| -> Vec<String> {
            (0..len).map(|a| xs.get(a).map_or("nan".to_string(), f64::to_string)).collect()
        };
        row.extend(pad(&s.x, m));
        row.extend(pad(&s.normal, m));
        row.push(s.lambda.to_string());
        row.extend(pad(&s.eigenvalues, m - 1));
        row.push((s.regular as u8).to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Fixed-fiber-angle slice as a vertex/face mesh in OBJ text form. Faces
/// touching irregular vertices are dropped.
pub fn write_slice_obj<W: Write>(gp: &GaussParam, theta: &[f64], mut w: W) -> Result<()> {
    let spec = *gp.spec();
    let hw = HALF_WIDTH;
    let (nu, nv) = (spec.nu - 2 * hw, spec.nv - 2 * hw);
    let mut verts = Vec::with_capacity(nu * nv);
    for i in hw..spec.nu - hw {
        for j in hw..spec.nv - hw {
            let patch = gp.local(i, j)?;
            verts.push(patch.eval(&patch.point(theta)).map(|(x, _)| x));
        }
    }
    writeln!(w, "# fixed fiber angles {theta:?}")?;
    for v in &verts {
        match v {
            Some(x) => {
                let coords: Vec<String> = x.iter().take(3).map(|c| c.to_string()).collect();
                writeln!(w, "v {}", coords.join(" "))?;
            }
            None => writeln!(w, "v nan nan nan")?,
        }
    }
    let idx = |a: usize, b: usize| a * nv + b;
    for a in 0..nu - 1 {
        for b in 0..nv - 1 {
            let q = [idx(a, b), idx(a + 1, b), idx(a + 1, b + 1), idx(a, b + 1)];
            if q.iter().all(|&k| verts[k].is_some()) {
                writeln!(w, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::test_pairs::*;
    use super::*;
    use crate::gauss_param::geometry::RoundSphere;

    fn tube(c: f64) -> (GaussParam, f64) {
        let spec = GridSpec::square(-0.4, 0.4, 17).unwrap();
        let big_r = 2.0;
        (GaussParam::new(&pair_from_fn(spec, 6, sphere_h(big_r, 6), move |_, _| c)).unwrap(), big_r)
    }

    #[test]
    fn tube_spectrum_matches_closed_form() {
        let c = 0.6;
        let (gp, big_r) = tube(c);
        let pts = sample_points(gp.spec(), 3, 40, 7);
        let samples = parametrize(&gp, &pts, DEFAULT_RANK_TOL, Steps::default()).unwrap();
        for s in &samples {
            assert!(s.regular);
            // a = <xi, nu> with nu the outward sphere normal.
            let patch = gp.local(s.i, s.j).unwrap();
            let b = patch.base(s.u, s.v);
            let nu = &b.h / big_r;
            let n = nalgebra::DVector::from_vec(s.normal.clone());
            let a = n.dot(&nu);
            let mut expect = vec![1.0 / c, 1.0 / c, 1.0 / c, -a / (big_r - c * a), -a / (big_r - c * a)];
            expect.sort_by(f64::total_cmp);
            // h is only known on the grid, so agreement is up to interpolation error.
            let delta = gp.spec().spacing();
            for (e, x) in s.eigenvalues.iter().zip(&expect) {
                assert!((e - x).abs() < 0.1 * delta * delta, "{e} vs {x}");
            }
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        let spec = GridSpec::square(-0.4, 0.4, 17).unwrap();
        let pair = pair_from_fn(spec, 6, sphere_h(2.0, 6), |u, v| 0.8 + 0.2 * u + 0.1 * v * v);
        let gp = GaussParam::new(&pair).unwrap();
        let pts = sample_points(gp.spec(), 3, 100, 3);
        let samples = parametrize(&gp, &pts, DEFAULT_RANK_TOL, Steps::default()).unwrap();
        let checks = check_gauss_map(&samples, 1e-9);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        let m = multiplicity(&samples, 3, 1e-6);
        assert_eq!(m.regular, 100);
        assert!(m.cluster.value < 1e-7, "{:?}", m.cluster);
        let fc = fiber_consistency(&gp, &samples, Steps::default()).unwrap();
        assert!(fc.value < 1e-8, "{:?}", fc);
    }

    #[test]
    fn round_sphere_control_is_umbilical() {
        let s = RoundSphere { n: 5, radius: 1.7 };
        let jet = FirstJet::at(&s, &[0.9, 1.3, 1.1, 2.0, 0.4], 1e-3).unwrap();
        for e in jet.principal_curvatures().unwrap() {
            assert!((e - 1.0 / 1.7).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_interior() {
        let spec = GridSpec::square(0.0, 1.0, 12).unwrap();
        let a = sample_points(&spec, 3, 50, 11);
        assert_eq!(a, sample_points(&spec, 3, 50, 11));
        for p in &a {
            assert!(spec.is_interior(p.i, p.j, HALF_WIDTH));
            assert!(p.theta[0] > POLAR_MARGIN && p.theta[1] < std::f64::consts::PI - POLAR_MARGIN);
        }
    }

    #[test]
    fn csv_and_obj_exports() {
        let (gp, _) = tube(0.5);
        let pts = sample_points(gp.spec(), 3, 3, 1);
        let samples = parametrize(&gp, &pts, DEFAULT_RANK_TOL, Steps::default()).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("u,v,theta1,theta2,theta3,x1"));
        assert!(header.ends_with("eig5,regular"));
        assert_eq!(text.lines().count(), 4);
        let mut obj = Vec::new();
        write_slice_obj(&gp, &[1.0, 1.0, 1.0], &mut obj).unwrap();
        let obj = String::from_utf8(obj).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 13 * 13);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 12 * 12);
    }
}
