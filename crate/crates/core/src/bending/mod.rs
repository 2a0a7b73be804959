//! Conformal infinitesimal bendings of the Gauss-parametrized hypersurface:
//! the bending equation, associated tensors, fundamental equations, the flat
//! form `theta`, triviality, first-order conformality and the D-conditions.

pub mod dcond;
pub mod killing;
pub mod tensors;

use rayon::prelude::*;

use crate::error::{Location, Result};
use crate::gauss_param::geometry::{christoffels, Steps};
use crate::gauss_param::sample::HypersurfaceSample;
use crate::gauss_param::{GaussParam, LocalPatch};
use crate::pde::PdeKind;
use crate::report::{Check, MaxTracker, Tol};

pub use dcond::{d_residuals, induced_residuals, DResiduals, InducedResiduals, MuSource};
pub use killing::{BendingField, KillingData, ScaledField, ShiftedFactor};
pub use tensors::{
    associated_tensors, cib_matrix, codazzi_residual, conformality_derivative, gauss_residual, theta_pairing,
    theta_residuals, triviality, Associated, BendingJet, Frame,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingOptions {
    pub steps: Steps,
    pub cib_tol: Tol,
    pub gauss_tol: Tol,
    pub codazzi_tol: Tol,
    pub flat_tol: Tol,
    pub triviality_tol: Tol,
    /// Bound `C (delta^2 + dt^2)`; this is `C`.
    pub conformality_constant: f64,
    pub dt: f64,
    /// Codazzi needs a third level of differencing and dominates the cost.
    pub codazzi: bool,
    /// Samples whose shape operator is within this of a multiple of the
    /// identity are left out of triviality and nullity.
    pub umbilic_tol: f64,
    pub d_tol: Tol,
    /// The constant eigenvalue `b` of `Bcal` on the fibers.
    pub b: f64,
}

impl Default for BendingOptions {
    fn default() -> Self {
        BendingOptions {
            steps: Steps::default(),
            cib_tol: Tol::quadratic(1.0),
            gauss_tol: Tol::quadratic(10.0),
            codazzi_tol: Tol::quadratic(10.0),
            flat_tol: Tol::quadratic(10.0),
            triviality_tol: Tol::quadratic(10.0),
            conformality_constant: 1.0,
            dt: 1e-3,
            codazzi: false,
            umbilic_tol: 1e-6,
            d_tol: Tol::linear(1.0),
            b: 0.0,
        }
    }
}

/// Everything computed for one sample.
#[derive(Debug, Clone, Copy)]
struct PerSample {
    loc: Location,
    cib: f64,
    gauss: f64,
    codazzi: Option<f64>,
    flat: f64,
    null: f64,
    off_identity: f64,
    asymmetry: f64,
    conformality: f64,
    umbilic: bool,
}

fn evaluate<F: BendingField + ?Sized>(patch: &LocalPatch, field: &F, p: &[f64], opts: &BendingOptions) -> Option<PerSample> {
    let steps = opts.steps;
    let jet = BendingJet::at(patch, field, p, steps.first)?;
    let cib = cib_matrix(&jet)?.abs().max();
    let (dm, _) = conformality_derivative(&jet, opts.dt);
    let at = associated_tensors(patch, field, p, steps)?;
    let (a, b, h) = (at.shape_on(), at.bcal_on(), at.hess_on());
    let gauss = gauss_residual(&b, &a, &h);
    let (flat, null) = theta_residuals(&a, &b, &h);
    let (off_identity, _) = triviality(&b);
    let (umb, _) = triviality(&a);
    let codazzi = if opts.codazzi {
        let a_grad_rho = &at.shape * &at.grad_rho;
        let gamma = christoffels(patch, p, steps)?;
        let bcal = |q: &[f64]| associated_tensors(patch, field, q, steps).map(|t| t.bcal);
        Some(codazzi_residual(bcal, p, &gamma, &at.frame, &a_grad_rho, 2.5 * steps.outer)?)
    } else {
        None
    };
    Some(PerSample {
        loc: Location {
            i: patch.node().0,
            j: patch.node().1,
            u: p[0],
            v: p[1],
        },
        cib,
        gauss,
        codazzi,
        flat,
        null,
        off_identity,
        asymmetry: at.bcal_asymmetry,
        conformality: dm.abs().max(),
        umbilic: umb < opts.umbilic_tol,
    })
}

fn nan_sample(loc: Location) -> PerSample {
    PerSample {
        loc,
        cib: f64::NAN,
        gauss: f64::NAN,
        codazzi: Some(f64::NAN),
        flat: f64::NAN,
        null: f64::NAN,
        off_identity: f64::NAN,
        asymmetry: f64::NAN,
        conformality: f64::NAN,
        umbilic: false,
    }
}

/// Bending-calculus checks of `field` over the regular samples: the bending
/// equation, Gauss (and optionally Codazzi), theta-flatness, triviality of
/// `Bcal` and first-order conformality. Theta-nullity and the raw asymmetry
/// of `Bcal` are informational.
pub fn bending_checks<F: BendingField + ?Sized>(
    gp: &GaussParam,
    samples: &[HypersurfaceSample],
    field: &F,
    delta: f64,
    opts: &BendingOptions,
) -> Result<Vec<Check>> {
    let per: Vec<PerSample> = samples
        .par_iter()
        .filter(|s| s.regular)
        .map(|s| {
            let patch = gp.local(s.i, s.j)?;
            Ok(evaluate(&patch, field, &s.param(), opts).unwrap_or_else(|| nan_sample(s.location())))
        })
        .collect::<Result<_>>()?;

    let track = |f: &dyn Fn(&PerSample) -> Option<f64>| {
        let mut t = MaxTracker::new();
        for s in &per {
            if let Some(x) = f(s) {
                t.update(x, s.loc);
            }
        }
        t
    };
    let conf_bound = opts.conformality_constant * (delta * delta + opts.dt * opts.dt);
    let mut out = vec![
        Check::new("cib", track(&|s| Some(s.cib)), opts.cib_tol, delta)
            .with_hypothesis("T satisfies the conformal bending equation with factor rho"),
        Check::new("bcal_asymmetry", track(&|s| Some(s.asymmetry)), opts.gauss_tol, delta).informational(),
        Check::new("gauss_equation", track(&|s| Some(s.gauss)), opts.gauss_tol, delta)
            .with_hypothesis("Bcal and H satisfy the Gauss equation of the bending"),
    ];
    if opts.codazzi {
        out.push(
            Check::new("codazzi_equation", track(&|s| s.codazzi), opts.codazzi_tol, delta)
                .with_hypothesis("Bcal satisfies the Codazzi equation of the bending"),
        );
    }
    out.push(
        Check::new("theta_flatness", track(&|s| Some(s.flat)), opts.flat_tol, delta)
            .with_hypothesis("theta is flat in signature (1,1,-1,-1)"),
    );
    out.push(
        Check::new("theta_nullity", track(&|s| (!s.umbilic).then_some(s.null)), opts.flat_tol, delta)
            .informational()
            .with_hypothesis("theta is null (corroborates triviality)"),
    );
    out.push(
        Check::new("triviality", track(&|s| (!s.umbilic).then_some(s.off_identity)), opts.triviality_tol, delta)
            .with_hypothesis("Bcal is a multiple of the identity"),
    );
    out.push(
        Check::new(
            "first_order_conformality",
            track(&|s| Some(s.conformality)),
            Tol::absolute(conf_bound),
            delta,
        )
        .with_hypothesis("d/dt exp(-2 t rho) <f_t* X, f_t* Y> vanishes at t = 0"),
    );
    Ok(out)
}

/// For `field` with factor `rho + shift` the derivative of the first-order
/// conformality test is `-2 shift <X, Y>`; returns the largest relative
/// deviation from that prediction over the regular samples.
pub fn conformality_control<F: BendingField + ?Sized>(
    gp: &GaussParam,
    samples: &[HypersurfaceSample],
    field: &F,
    shift: f64,
    opts: &BendingOptions,
) -> Result<f64> {
    let shifted = ShiftedFactor { inner: field, shift };
    let devs: Vec<f64> = samples
        .par_iter()
        .filter(|s| s.regular)
        .map(|s| {
            let patch = gp.local(s.i, s.j)?;
            let Some(jet) = BendingJet::at(&patch, &shifted, &s.param(), opts.steps.first) else {
                return Ok(f64::INFINITY);
            };
            let (dm, g) = conformality_derivative(&jet, opts.dt);
            let predicted = g * (-2.0 * shift);
            Ok((dm - &predicted).abs().max() / predicted.abs().max())
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) }))
}

impl<F: BendingField + ?Sized> BendingField for &F {
    fn at(&self, p: &[f64], x: &nalgebra::DVector<f64>) -> (nalgebra::DVector<f64>, f64) {
        (**self).at(p, x)
    }
}

/// Conditions (i)-(v) of `D = mu J` over the regular samples, plus the
/// Gauss and Codazzi residuals of the induced `Bcal = (A - lambda I) D + b I`
/// and the check that this `Bcal` is not a multiple of the identity.
pub fn d_condition_checks(
    gp: &GaussParam,
    samples: &[HypersurfaceSample],
    kind: PdeKind,
    source: MuSource,
    delta: f64,
    opts: &BendingOptions,
) -> Result<Vec<Check>> {
    let per: Vec<(Location, Option<DResiduals>, Option<InducedResiduals>)> = samples
        .par_iter()
        .filter(|s| s.regular)
        .map(|s| {
            let patch = gp.local(s.i, s.j)?;
            let p = s.param();
            let d = d_residuals(&patch, kind, source, &p, opts.steps)?;
            let ind = induced_residuals(&patch, kind, source, opts.b, &p, opts.steps)?;
            Ok((s.location(), d, ind))
        })
        .collect::<Result<_>>()?;
    let mut conds = [MaxTracker::new(); 5];
    let (mut gauss, mut codazzi) = (MaxTracker::new(), MaxTracker::new());
    let mut min_off = f64::INFINITY;
    for (loc, d, ind) in &per {
        for (c, t) in conds.iter_mut().enumerate() {
            t.update(d.map_or(f64::NAN, |r| r[c]), *loc);
        }
        gauss.update(ind.map_or(f64::NAN, |r| r.gauss), *loc);
        codazzi.update(ind.map_or(f64::NAN, |r| r.codazzi), *loc);
        min_off = min_off.min(ind.map_or(0.0, |r| r.off_identity));
    }
    let names = ["i", "ii", "iii", "iv", "v"];
    let claims = [
        "(A - lambda I) D is symmetric",
        "D is parallel along the fibers",
        "Codazzi bracket of (A - lambda I) D",
        "Hessian condition on lambda",
        "trace-free condition on D",
    ];
    let mut out: Vec<Check> = conds
        .iter()
        .zip(names.iter().zip(claims))
        .map(|(t, (n, c))| Check::new(format!("d_condition_{n}"), *t, opts.d_tol, delta).with_hypothesis(c))
        .collect();
    out.push(
        Check::new("induced_gauss", gauss, opts.d_tol, delta)
            .with_hypothesis("Bcal = (A - lambda I) D + b I satisfies the Gauss equation"),
    );
    out.push(
        Check::new("induced_codazzi", codazzi, opts.d_tol, delta)
            .with_hypothesis("Bcal = (A - lambda I) D + b I satisfies the Codazzi equation"),
    );
    let bound = opts.triviality_tol.bound(delta);
    let mut nontrivial = Check::predicate("induced_nontrivial", !per.is_empty() && min_off > bound)
        .with_hypothesis("the induced Bcal is not a multiple of the identity");
    nontrivial.max_residual = min_off;
    nontrivial.tolerance = bound;
    out.push(nontrivial);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_param::sample::{parametrize, sample_points, DEFAULT_RANK_TOL};
    use crate::gauss_param::test_pairs::*;
    use crate::pde::GridSpec;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(count: usize) -> (GaussParam, Vec<HypersurfaceSample>) {
        let spec = GridSpec::square(-0.4, 0.4, 17).unwrap();
        let pair = pair_from_fn(spec, 6, sphere_h(2.0, 6), |u, v| 0.8 + 0.2 * u + 0.1 * v * v);
        let gp = GaussParam::new(&pair).unwrap();
        let pts = sample_points(gp.spec(), 3, count, 11);
        let samples = parametrize(&gp, &pts, DEFAULT_RANK_TOL, Steps::default()).unwrap();
        (gp, samples)
    }

    struct Translation(DVector<f64>);

    impl BendingField for Translation {
        fn at(&self, _p: &[f64], _x: &DVector<f64>) -> (DVector<f64>, f64) {
            (self.0.clone(), 0.0)
        }
    }

    struct Position;

    impl BendingField for Position {
        fn at(&self, _p: &[f64], x: &DVector<f64>) -> (DVector<f64>, f64) {
            (x.clone(), 1.0)
        }
    }

    #[test]
    fn killing_bendings_pass_everything() {
        let (gp, samples) = setup(6);
        let delta = gp.spec().spacing();
        let opts = BendingOptions {
            codazzi: true,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2 {
            let k = KillingData::random(6, 0.5, &mut rng);
            let checks = bending_checks(&gp, &samples, &k, delta, &opts).unwrap();
            for c in &checks {
                assert!(c.pass, "{c:?}");
            }
            let get = |n: &str| checks.iter().find(|c| c.name == n).unwrap().max_residual;
            assert!(get("cib") < 1e-8, "{}", get("cib"));
            assert!(get("theta_flatness") < 1e-5);
            assert!(get("codazzi_equation") < 1e-4, "{}", get("codazzi_equation"));
        }
    }

    #[test]
    fn killing_bcal_is_minus_v_dot_n() {
        let (gp, samples) = setup(4);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let k = KillingData::random(6, 1.0, &mut rng);
        let v = DVector::from_column_slice(&k.v);
        for s in samples.iter().filter(|s| s.regular) {
            let patch = gp.local(s.i, s.j).unwrap();
            let at = associated_tensors(&patch, &k, &s.param(), Steps::default()).unwrap();
            let phi = -v.dot(&DVector::from_column_slice(&s.normal));
            let b = at.bcal_on();
            let target = nalgebra::DMatrix::identity(5, 5) * phi;
            assert!((b - target).abs().max() < 1e-5);
            // H = <N, v> A
            let h = at.hess_on() - at.shape_on() * (-phi);
            assert!(h.abs().max() < 1e-5, "{}", h.abs().max());
        }
    }

    #[test]
    fn translation_and_position_fields() {
        let (gp, samples) = setup(4);
        let t = Translation(DVector::from_vec(vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]));
        for s in samples.iter().filter(|s| s.regular) {
            let patch = gp.local(s.i, s.j).unwrap();
            let p = s.param();
            let jet = BendingJet::at(&patch, &t, &p, 1e-3).unwrap();
            assert!(cib_matrix(&jet).unwrap().abs().max() < 1e-12);
            let at = associated_tensors(&patch, &t, &p, Steps::default()).unwrap();
            assert!(at.bcal.abs().max() < 1e-6 && at.hess.abs().max() < 1e-9);
            let (dm, _) = conformality_derivative(&jet, 1e-3);
            assert!(dm.abs().max() < 1e-12);
            let jet = BendingJet::at(&patch, &Position, &p, 1e-3).unwrap();
            assert!(cib_matrix(&jet).unwrap().abs().max() < 1e-9);
        }
    }

    #[test]
    fn zero_field_has_zero_conformality_derivative() {
        let (gp, samples) = setup(2);
        let s = samples.iter().find(|s| s.regular).unwrap();
        let patch = gp.local(s.i, s.j).unwrap();
        let zero = KillingData::zero(6);
        let jet = BendingJet::at(&patch, &zero, &s.param(), 1e-3).unwrap();
        let (dm, _) = conformality_derivative(&jet, 1e-3);
        assert_eq!(dm.abs().max(), 0.0);
    }

    #[test]
    fn wrong_factor_fails_and_matches_prediction() {
        let (gp, samples) = setup(6);
        let delta = gp.spec().spacing();
        let opts = BendingOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let k = KillingData::random(6, 0.5, &mut rng);
        let dev = conformality_control(&gp, &samples, &k, 1.0, &opts).unwrap();
        assert!(dev < 1e-6, "{dev}");
        let wrong = ShiftedFactor { inner: k, shift: 1.0 };
        let checks = bending_checks(&gp, &samples, &wrong, delta, &opts).unwrap();
        let cib = checks.iter().find(|c| c.name == "cib").unwrap();
        assert!(!cib.pass);
    }
}
