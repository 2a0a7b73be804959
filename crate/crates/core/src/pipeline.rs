//! Generation: PDE solutions, the de Sitter surface `g`, the pair `(h, r)`,
//! the conformal factor `mu` of `D = mu J` and the hypersurface samples.

use crate::config::JobConfig;
use crate::error::{Error, Result};
use crate::gauss_param::sample::{parametrize, sample_points, HypersurfaceSample};
use crate::gauss_param::{GaussParam, Steps};
use crate::pair::{pair_from_g, PairExtraction, SpecialPair, GRADIENT_MARGIN};
use crate::pde::terms::{eval_sum, Term};
use crate::pde::{solve_goursat, CoefficientField, EllipticSolver, GridFunction, GridSpec, PdeKind, VectorGrid};
use crate::surface::{assemble_k, christoffels, normalize_to_sphere, solve_mu, Connection, MuSolution, SurfacePatch};

/// Solves the generating equation once per boundary component.
pub fn solve_components(kind: PdeKind, m: &CoefficientField, components: &[Vec<Term>]) -> Result<Vec<GridFunction>> {
    let spec = *m.spec();
    match kind {
        PdeKind::Hyperbolic => components
            .iter()
            .map(|terms| {
                let data_u: Vec<f64> = (0..spec.nu).map(|i| eval_sum(terms, spec.u(i), spec.v0)).collect();
                let data_v: Vec<f64> = (0..spec.nv).map(|j| eval_sum(terms, spec.u0, spec.v(j))).collect();
                solve_goursat(m, &data_u, &data_v)
            })
            .collect(),
        PdeKind::Elliptic => {
            let solver = EllipticSolver::new(m)?;
            components
                .iter()
                .map(|terms| solver.solve(&GridFunction::from_fn(spec, |u, v| eval_sum(terms, u, v))?))
                .collect()
        }
    }
}

/// Everything produced from one job.
#[derive(Debug, Clone)]
pub struct Generated {
    pub kind: PdeKind,
    pub solutions: VectorGrid,
    /// `<k, k>` on the full grid.
    pub k_norm: GridFunction,
    /// The surface `g`, restricted to the rectangle the pair lives on.
    pub patch: SurfacePatch,
    pub connection: Connection,
    pub mu: MuSolution,
    pub extraction: PairExtraction,
    pub gauss: GaussParam,
    pub samples: Vec<HypersurfaceSample>,
}

impl Generated {
    pub fn pair(&self) -> &SpecialPair {
        &self.extraction.pair
    }

    pub fn spec(&self) -> &GridSpec {
        self.patch.spec()
    }

    pub fn delta(&self) -> f64 {
        self.spec().spacing()
    }
}

/// Surface `g` from the job's PDE data, oriented so that `g_1 > 0`.
pub fn generate_surface(config: &JobConfig) -> Result<(VectorGrid, GridFunction, SurfacePatch)> {
    let m = config.m.build(config.grid)?;
    let comps = config.boundary.resolved(&config.grid);
    let solutions = solve_components(config.kind, &m, &comps)?;
    let (k, k_norm) = assemble_k(&solutions)?;
    let patch = normalize_to_sphere(&k, &k_norm)?;
    Ok((k, k_norm, patch))
}

/// The special pair of a surface, with `g` restricted to the pair's grid.
pub fn extract_pair(patch: &SurfacePatch) -> Result<(PairExtraction, SurfacePatch)> {
    let extraction = pair_from_g(patch, GRADIENT_MARGIN)?;
    let patch = match extraction.trimmed {
        Some(rect) => SurfacePatch::new(patch.values().restrict(rect)?)?,
        None => patch.clone(),
    };
    let flags = extraction.pair.flags;
    if !flags.immersion_ok {
        return Err(Error::NotImmersion {
            at: extraction.pair.spec().location(0, 0),
        });
    }
    if !flags.gradient_ok {
        return Err(Error::GradientTooLarge {
            at: extraction.pair.spec().location(0, 0),
            norm: flags.max_grad_r,
        });
    }
    Ok((extraction, patch))
}

/// Full generation chain of a job.
pub fn generate(config: &JobConfig) -> Result<Generated> {
    config.validate()?;
    let (solutions, k_norm, full) = generate_surface(config)?;
    let (extraction, patch) = extract_pair(&full)?;
    let connection = christoffels(&patch);
    let mu = solve_mu(&connection, config.kind);
    let gauss = GaussParam::new(&extraction.pair)?.with_mu(mu.mu.clone())?;
    let samples = hypersurface_samples(&gauss, config)?;
    Ok(Generated {
        kind: config.kind,
        solutions,
        k_norm,
        patch,
        connection,
        mu,
        extraction,
        gauss,
        samples,
    })
}

/// Samples of the hypersurface at random base nodes and fiber angles,
/// seeded by the job.
pub fn hypersurface_samples(gauss: &GaussParam, config: &JobConfig) -> Result<Vec<HypersurfaceSample>> {
    let points = sample_points(gauss.spec(), gauss.fiber_dim(), config.samples.count, config.seed);
    parametrize(gauss, &points, config.samples.rank_tol, Steps::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::residual;

    #[test]
    fn components_solve_their_equation() {
        for config in [JobConfig::hyperbolic_example(33), JobConfig::elliptic_example(33)] {
            let m = config.m.build(config.grid).unwrap();
            let comps = config.boundary.resolved(&config.grid);
            let sols = solve_components(config.kind, &m, &comps).unwrap();
            assert_eq!(sols.len(), 8);
            let h2 = config.grid.spacing().powi(2);
            for (s, terms) in sols.iter().zip(&comps) {
                let exact = GridFunction::from_fn(config.grid, |u, v| eval_sum(terms, u, v)).unwrap();
                let err = s.axpby(1.0, &exact, -1.0).unwrap().max_abs();
                assert!(err < 5.0 * h2, "{} {err}", config.kind);
                let r = residual(&exact, &m, config.kind).unwrap().max_abs();
                assert!(r < 5.0 * h2, "exact closed form residual {r}");
            }
        }
    }

    #[test]
    fn generation_runs_for_both_examples() {
        for mut config in [JobConfig::hyperbolic_example(33), JobConfig::elliptic_example(33)] {
            config.samples.count = 40;
            let g = generate(&config).unwrap();
            assert!(g.extraction.trimmed.is_none());
            assert!(g.pair().flags.gradient_ok && g.pair().flags.immersion_ok);
            assert!(g.samples.iter().filter(|s| s.regular).count() >= 36);
        }
    }

    #[test]
    fn negative_norm_is_a_generation_failure() {
        let mut config = JobConfig::hyperbolic_example(17);
        config.boundary.close = None;
        // k_8 = 5 k_1 makes <k, k> = -5 k_1^2 + |k_mid|^2 negative near the
        // origin.
        let last = config.boundary.components[0].iter().map(|t| t.scaled(5.0)).collect();
        config.boundary.components.push(last);
        let err = generate(&config).unwrap_err();
        assert_eq!(err.code(), "mu_nonpositive");
        assert!(err.is_generation_failure());
    }
}
