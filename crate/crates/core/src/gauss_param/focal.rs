//! The focal map `S = lambda Psi(X) + Psi_* N` into de Sitter space.
//!
//! `S` is the curvature sphere of `lambda`; it is constant along the fibers
//! and, in the standard chart, coincides with `g = r^{-1}(1, h, |h|^2 - r^2)`.
//! The pullback of the de Sitter metric by `S` to horizontal lifts is
//! `<(A - lambda I) X, (A - lambda I) Y>`.

use nalgebra::DVector;
use rayon::prelude::*;

use super::geometry::{central, FirstJet, Immersion, Steps};
use super::splitting::horizontal_lift;
use super::{GaussParam, LocalPatch};
use super::sample::HypersurfaceSample;
use crate::error::Result;
use crate::lorentz::{frame_norm, LightConeChart, LorentzVector};
use crate::pde::VectorGrid;
use crate::report::{Check, MaxTracker, Tol};
use crate::surface::SurfacePatch;

#[derive(Debug, Clone, Copy)]
pub struct FocalOptions {
    pub de_sitter_tol: f64,
    pub fiber_tol: Tol,
    pub equals_tol: f64,
    pub metric_tol: Tol,
    pub steps: Steps,
}

impl Default for FocalOptions {
    fn default() -> Self {
        FocalOptions {
            de_sitter_tol: 1e-8,
            fiber_tol: Tol::linear(1.0),
            equals_tol: 1e-6,
            metric_tol: Tol::quadratic(10.0),
            steps: Steps::default(),
        }
    }
}

/// `S` at a parameter point of a local patch.
pub fn focal_point(patch: &LocalPatch, chart: &LightConeChart, p: &[f64]) -> Option<LorentzVector> {
    let (x, n) = patch.eval(p)?;
    let (lambda, _, _) = patch.lambda_jet(p[0], p[1]);
    let psi = chart.embed(x.as_slice()).ok()?;
    let dpsi = chart.differential(x.as_slice(), n.as_slice()).ok()?;
    Some(LorentzVector(psi.0.iter().zip(&dpsi.0).map(|(a, b)| lambda * a + b).collect()))
}

/// `<(A - lambda I) H_a, (A - lambda I) H_b>` for the horizontal lifts of
/// `d/du`, `d/dv`, as `[E, F, G]`.
pub fn focal_metric<I: Immersion + ?Sized>(map: &I, p: &[f64], lambda: f64, h: f64) -> Option<[f64; 3]> {
    let jet = FirstJet::at(map, p, h)?;
    let g = jet.metric();
    let lift = horizontal_lift(&g)?;
    let mut a = jet.shape_coords()?;
    for k in 0..a.nrows() {
        a[(k, k)] -= lambda;
    }
    let w = &jet.dx * (a * lift);
    let (c0, c1) = (w.column(0), w.column(1));
    Some([c0.dot(&c0), c0.dot(&c1), c1.dot(&c1)])
}

/// Focal-loop checks over regular samples. `g` (the de Sitter surface the
/// pair came from) enables the coordinatewise comparison `S = g`, which is
/// only meaningful in the standard chart; `patch` supplies the reference
/// metric for the pullback identity.
pub fn focal_loop(
    gp: &GaussParam,
    samples: &[HypersurfaceSample],
    chart: &LightConeChart,
    g: Option<&VectorGrid>,
    patch: Option<&SurfacePatch>,
    delta: f64,
    opts: FocalOptions,
) -> Result<Vec<Check>> {
    let n = gp.n();
    let per: Vec<[MaxTracker; 4]> = samples
        .par_iter()
        .filter(|s| s.regular)
        .map(|s| {
            let local = gp.local(s.i, s.j)?;
            let loc = s.location();
            let p = s.param();
            let mut t = [MaxTracker::new(); 4];
            let Some(sv) = focal_point(&local, chart, &p) else {
                t.iter_mut().for_each(|x| x.update(f64::NAN, loc));
                return Ok(t);
            };
            t[0].update(sv.norm_sq() - 1.0, loc);
            let jet = FirstJet::at(&local, &p, opts.steps.first);
            for k in 2..n {
                let ds = central(
                    |q| focal_point(&local, chart, q).map(|x| DVector::from_vec(x.0)),
                    &p,
                    k,
                    opts.steps.first,
                );
                let scale = jet.as_ref().map(|j| j.dx.column(k).norm());
                match (ds, scale) {
                    (Some(ds), Some(sc)) => t[1].update(frame_norm(ds.as_slice()) / sc, loc),
                    _ => t[1].update(f64::NAN, loc),
                }
            }
            if let Some(g) = g {
                let gn = g.node(s.i, s.j);
                let e = sv.0.iter().zip(gn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                t[2].update(e, loc);
            }
            if let Some(patch) = patch {
                let k = patch.spec().index(s.i, s.j);
                let reference = patch.metric(k);
                match focal_metric(&local, &p, s.lambda, opts.steps.first) {
                    Some(m) => {
                        let e = m.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        t[3].update(e, loc);
                    }
                    None => t[3].update(f64::NAN, loc),
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut acc = [MaxTracker::new(); 4];
    for t in per {
        for (a, b) in acc.iter_mut().zip(t) {
            *a = a.merge(b);
        }
    }
    let mut out = vec![
        Check::new("focal_de_sitter", acc[0], Tol::absolute(opts.de_sitter_tol), delta)
            .with_hypothesis("S lies in de Sitter space"),
        Check::new("focal_fiber_invariance", acc[1], opts.fiber_tol, delta)
            .with_hypothesis("S is constant along the leaves of the fiber distribution"),
    ];
    if g.is_some() {
        out.push(
            Check::new("focal_equals_g", acc[2], Tol::absolute(opts.equals_tol), delta)
                .with_hypothesis("S = g coordinatewise in the standard chart"),
        );
    }
    if patch.is_some() {
        out.push(
            Check::new("focal_metric", acc[3], opts.metric_tol, delta)
                .with_hypothesis("pullback of the de Sitter metric by S"),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::sample::{parametrize, sample_points, DEFAULT_RANK_TOL};
    use super::super::test_pairs::*;
    use super::*;
    use crate::lorentz::LorentzTransform;
    use crate::pair::g_values_from_pair;
    use crate::pde::GridSpec;
    use rand::SeedableRng;

    fn setup() -> (GaussParam, Vec<HypersurfaceSample>) {
        let spec = GridSpec::square(-0.4, 0.4, 21).unwrap();
        let pair = pair_from_fn(spec, 6, sphere_h(2.0, 6), |u, v| 0.8 + 0.2 * u + 0.1 * v * v);
        let gp = GaussParam::new(&pair).unwrap();
        let pts = sample_points(gp.spec(), 3, 60, 5);
        let samples = parametrize(&gp, &pts, DEFAULT_RANK_TOL, Steps::default()).unwrap();
        (gp, samples)
    }

    #[test]
    fn focal_map_is_g_in_standard_chart() {
        let (gp, samples) = setup();
        let g = g_values_from_pair(gp.pair()).unwrap();
        let patch = SurfacePatch::new(g.clone()).unwrap();
        let chart = LightConeChart::standard(6);
        let delta = gp.spec().spacing();
        let checks = focal_loop(&gp, &samples, &chart, Some(&g), Some(&patch), delta, FocalOptions::default()).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(checks[2].max_residual < 1e-10);
    }

    #[test]
    fn chart_covariance() {
        let (gp, samples) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = LorentzTransform::random(8, &mut rng);
        let chart = LightConeChart::standard(6).transformed(&t);
        let checks = focal_loop(&gp, &samples, &chart, None, None, 0.04, FocalOptions::default()).unwrap();
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
