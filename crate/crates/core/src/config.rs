//! Declarative job description shared by the pipeline, the verifier and the
//! command line.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bending::BendingOptions;
use crate::error::{Error, Result};
use crate::gauss_param::{FocalOptions, Steps};
use crate::pde::terms::Term;
use crate::pde::{CoefficientSource, GridSpec, PdeKind};
use crate::report::Tol;

/// Smallest hypersurface dimension for which the construction applies.
pub const MIN_DIMENSION: usize = 5;

/// Boundary data for the `n + 3` solutions `k_1, ..., k_{n+3}`. Each
/// component is a sum of closed-form terms; the hyperbolic solver reads them
/// on the lines `u = u0` and `v = v0`, the elliptic solver on the boundary.
///
/// With `close = Some(c)` only the first `n + 2` components are given and the
/// last is `-c k_1 + 2 <t, k_mid> - |t|^2 k_1`, `t = k_mid / k_1` at the
/// domain centre. Then `<k, k> = |k_mid - t k_1|^2 + c k_1^2`, positive for
/// `c > 0`, and `r = sqrt(|h - t|^2 + c)` so that `|grad r| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    pub components: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub close: Option<f64>,
}

impl BoundaryData {
    /// All `n + 3` components, with the closing one appended if requested.
    pub fn resolved(&self, grid: &GridSpec) -> Vec<Vec<Term>> {
        let mut comps = self.components.clone();
        let Some(c) = self.close else {
            return comps;
        };
        let (uc, vc) = (0.5 * (grid.u0 + grid.u1), 0.5 * (grid.v0 + grid.v1));
        let eval = |terms: &[Term]| crate::pde::terms::eval_sum(terms, uc, vc);
        let k1 = eval(&comps[0]);
        let t: Vec<f64> = comps[1..].iter().map(|c| eval(c) / k1).collect();
        let tt: f64 = t.iter().map(|x| x * x).sum();
        let mut last: Vec<Term> = comps[0].iter().map(|x| x.scaled(-c - tt)).collect();
        for (ti, comp) in t.iter().zip(&comps[1..]) {
            last.extend(comp.iter().map(|x| x.scaled(2.0 * ti)));
        }
        comps.push(last);
        comps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Hypersurface samples (base node and random fiber angles).
    pub count: usize,
    pub min_regular_fraction: f64,
    /// Smallest-to-largest singular value ratio below which a sample is irregular.
    pub rank_tol: f64,
    /// Subset of samples used by the bending checks (they are costly).
    pub bending_count: usize,
    /// Bending checks difference the shape operator up to three times with
    /// fixed steps; samples this close to the singular set are skipped.
    pub bending_rank_tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 500,
            min_regular_fraction: 0.9,
            rank_tol: 1e-6,
            bending_count: 24,
            bending_rank_tol: 5e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KillingConfig {
    /// Random conformal Killing fields used as trivial-bending controls.
    pub count: usize,
    /// Entries of `lambda, v, w, C` are uniform in `[-scale, scale]`.
    pub scale: f64,
    pub dt: f64,
}

impl Default for KillingConfig {
    fn default() -> Self {
        KillingConfig {
            count: 4,
            scale: 0.5,
            dt: 1e-3,
        }
    }
}

/// Tolerances as `constant * delta^order` with `delta` the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub de_sitter: f64,
    pub conjugate: Tol,
    pub special: Tol,
    pub eqvar: Tol,
    pub mu_path: Tol,
    pub codazzi: Tol,
    pub cartan: Tol,
    pub round_trip: f64,
    pub gauss_map: f64,
    pub multiplicity: Tol,
    pub fiber_consistency: Tol,
    pub splitting: Tol,
    pub focal_de_sitter: f64,
    pub focal_fiber: Tol,
    pub focal_equals_g: f64,
    pub focal_metric: Tol,
    pub cib: Tol,
    pub gauss_equation: Tol,
    pub theta_flatness: Tol,
    pub triviality: Tol,
    pub conformality: f64,
    /// Relative deviation allowed for the wrong-factor control.
    pub conformality_control: f64,
    pub d_conditions: Tol,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            de_sitter: 1e-9,
            conjugate: Tol::quadratic(50.0),
            special: Tol::quadratic(50.0),
            eqvar: Tol::quadratic(50.0),
            mu_path: Tol::quadratic(50.0),
            codazzi: Tol::quadratic(100.0),
            cartan: Tol::quadratic(50.0),
            round_trip: 1e-12,
            gauss_map: 1e-8,
            multiplicity: Tol::quadratic(1.0),
            fiber_consistency: Tol::linear(1.0),
            splitting: Tol::quadratic(50.0),
            focal_de_sitter: 1e-8,
            focal_fiber: Tol::linear(1.0),
            focal_equals_g: 1e-6,
            focal_metric: Tol::quadratic(100.0),
            cib: Tol::quadratic(1.0),
            gauss_equation: Tol::quadratic(10.0),
            theta_flatness: Tol::quadratic(10.0),
            triviality: Tol::quadratic(10.0),
            conformality: 1.0,
            conformality_control: 0.05,
            d_conditions: Tol::linear(1.0),
        }
    }
}

impl Tolerances {
    /// Multiplies every tolerance by `s`; the relative control bound stays.
    pub fn scaled(&self, s: f64) -> Tolerances {
        Tolerances {
            de_sitter: self.de_sitter * s,
            conjugate: self.conjugate.scaled(s),
            special: self.special.scaled(s),
            eqvar: self.eqvar.scaled(s),
            mu_path: self.mu_path.scaled(s),
            codazzi: self.codazzi.scaled(s),
            cartan: self.cartan.scaled(s),
            round_trip: self.round_trip * s,
            gauss_map: self.gauss_map * s,
            multiplicity: self.multiplicity.scaled(s),
            fiber_consistency: self.fiber_consistency.scaled(s),
            splitting: self.splitting.scaled(s),
            focal_de_sitter: self.focal_de_sitter * s,
            focal_fiber: self.focal_fiber.scaled(s),
            focal_equals_g: self.focal_equals_g * s,
            focal_metric: self.focal_metric.scaled(s),
            cib: self.cib.scaled(s),
            gauss_equation: self.gauss_equation.scaled(s),
            theta_flatness: self.theta_flatness.scaled(s),
            triviality: self.triviality.scaled(s),
            conformality: self.conformality * s,
            conformality_control: self.conformality_control,
            d_conditions: self.d_conditions.scaled(s),
        }
    }

    pub fn focal(&self, steps: Steps) -> FocalOptions {
        FocalOptions {
            de_sitter_tol: self.focal_de_sitter,
            fiber_tol: self.focal_fiber,
            equals_tol: self.focal_equals_g,
            metric_tol: self.focal_metric,
            steps,
        }
    }

    pub fn bending(&self, steps: Steps, dt: f64) -> BendingOptions {
        BendingOptions {
            steps,
            cib_tol: self.cib,
            gauss_tol: self.gauss_equation,
            codazzi_tol: self.gauss_equation,
            flat_tol: self.theta_flatness,
            triviality_tol: self.triviality,
            conformality_constant: self.conformality,
            dt,
            d_tol: self.d_conditions,
            ..BendingOptions::default()
        }
    }
}

fn default_n() -> usize {
    MIN_DIMENSION
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJobConfig {
    kind: PdeKind,
    #[serde(default = "default_n")]
    n: usize,
    grid: GridSpec,
    m: CoefficientSource,
    boundary: BoundaryData,
    #[serde(default)]
    samples: SampleConfig,
    #[serde(default)]
    killing: KillingConfig,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output")]
    output: PathBuf,
}

/// A validated job. Deserialization rejects `n < 5`, malformed grids and a
/// wrong number of boundary components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJobConfig", into = "RawJobConfig")]
pub struct JobConfig {
    pub kind: PdeKind,
    /// Hypersurface dimension; the ambient space is `R^{n+1}`.
    pub n: usize,
    pub grid: GridSpec,
    pub m: CoefficientSource,
    pub boundary: BoundaryData,
    pub samples: SampleConfig,
    pub killing: KillingConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output: PathBuf,
}

impl TryFrom<RawJobConfig> for JobConfig {
    type Error = Error;

    fn try_from(r: RawJobConfig) -> Result<Self> {
        let c = JobConfig {
            kind: r.kind,
            n: r.n,
            grid: r.grid,
            m: r.m,
            boundary: r.boundary,
            samples: r.samples,
            killing: r.killing,
            tolerances: r.tolerances,
            seed: r.seed,
            output: r.output,
        };
        c.validate()?;
        Ok(c)
    }
}

impl From<JobConfig> for RawJobConfig {
    fn from(c: JobConfig) -> Self {
        RawJobConfig {
            kind: c.kind,
            n: c.n,
            grid: c.grid,
            m: c.m,
            boundary: c.boundary,
            samples: c.samples,
            killing: c.killing,
            tolerances: c.tolerances,
            seed: c.seed,
            output: c.output,
        }
    }
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_DIMENSION {
            return Err(Error::Config(format!(
                "n = {} but the construction needs n >= {MIN_DIMENSION}",
                self.n
            )));
        }
        self.grid.validate()?;
        let want = self.n + 3 - usize::from(self.boundary.close.is_some());
        if self.boundary.components.len() != want {
            return Err(Error::Config(format!(
                "expected {want} boundary components for n = {}, got {}",
                self.n,
                self.boundary.components.len()
            )));
        }
        if let Some(c) = self.boundary.close {
            if !(c > 0.0) {
                return Err(Error::Config(format!("close constant must be positive, got {c}")));
            }
        }
        if self.samples.count == 0 || !(0.0..=1.0).contains(&self.samples.min_regular_fraction) {
            return Err(Error::Config("invalid sample settings".into()));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn fiber_dim(&self) -> usize {
        self.n - 2
    }

    /// Hyperbolic example: `M = 1`, exponential and trigonometric solutions
    /// of `psi_uv + psi = 0`.
    pub fn hyperbolic_example(n_grid: usize) -> JobConfig {
        let comps = vec![
            vec![Term::exp(1.0, 1.0, -1.0)],
            vec![Term::exp(1.0, 2.0, -0.5)],
            vec![Term::exp(1.0, 0.5, -2.0)],
            vec![Term::sin(1.0, 1.0, 1.0)],
            vec![Term::cos(1.0, 1.0, 1.0)],
            vec![Term::sin(0.5, 2.0, 0.5)],
            vec![Term::cos(0.5, 0.5, 2.0)],
        ];
        JobConfig::example(PdeKind::Hyperbolic, 1.0, comps, n_grid)
    }

    /// Elliptic example: `M = 1/4`, so the solutions satisfy `Lap psi = -psi`.
    pub fn elliptic_example(n_grid: usize) -> JobConfig {
        let comps = vec![
            vec![Term::cos(1.0, 0.0, 1.25).with_exp(0.75, 0.0)],
            vec![Term::sin(1.0, 1.0, 0.0)],
            vec![Term::cos(1.0, 0.0, 1.0)],
            vec![Term::cos(1.0, 0.6, 0.8)],
            vec![Term::sin(1.0, 0.8, -0.6)],
            vec![Term::sin(1.0, 0.0, 1.25).with_exp(0.75, 0.0)],
            vec![Term::cos(0.5, 0.0, 2.0).with_exp(3f64.sqrt(), 0.0)],
        ];
        JobConfig::example(PdeKind::Elliptic, 0.25, comps, n_grid)
    }

    fn example(kind: PdeKind, m: f64, components: Vec<Vec<Term>>, n_grid: usize) -> JobConfig {
        JobConfig {
            kind,
            n: MIN_DIMENSION,
            grid: GridSpec::square(-0.5, 0.5, n_grid).expect("example grid"),
            m: CoefficientSource::Const(m),
            boundary: BoundaryData {
                components,
                close: Some(1.0),
            },
            samples: SampleConfig::default(),
            killing: KillingConfig::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            output: default_output(),
        }
    }
}
