//! Solvers for the generating equations `psi_uv + M psi = 0` (hyperbolic,
//! Goursat data) and `psi_{z zbar} + M psi = 0` (elliptic, Dirichlet data).

pub mod banded;
pub mod coefficient;
pub mod elliptic;
pub mod fd;
pub mod goursat;
pub mod grid;
pub mod terms;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coefficient::{CoefficientField, CoefficientSource};
pub use elliptic::{solve_elliptic, EllipticSolver};
pub use goursat::solve_goursat;
pub use grid::{Axis, GridFunction, GridSpec, VectorGrid};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdeKind {
    Hyperbolic,
    Elliptic,
}

impl std::fmt::Display for PdeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PdeKind::Hyperbolic => "hyperbolic",
            PdeKind::Elliptic => "elliptic",
        })
    }
}

/// Central-difference residual of `psi_uv + M psi` (hyperbolic) or
/// `1/4 (psi_uu + psi_vv) + M psi` (elliptic) at interior nodes; boundary
/// nodes are set to zero.
pub fn residual(psi: &GridFunction, m: &CoefficientField, kind: PdeKind) -> Result<GridFunction> {
    let spec = psi.spec;
    spec.check_same(m.spec())?;
    let (du, dv) = (spec.du(), spec.dv());
    let p = |i: usize, j: usize| psi.at(i, j);
    let values: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / spec.nv, k % spec.nv);
            if !spec.is_interior(i, j, 1) {
                return 0.0;
            }
            let op = match kind {
                PdeKind::Hyperbolic => {
                    (p(i + 1, j + 1) - p(i + 1, j - 1) - p(i - 1, j + 1) + p(i - 1, j - 1))
                        / (4.0 * du * dv)
                }
                PdeKind::Elliptic => {
                    let uu = (p(i + 1, j) - 2.0 * p(i, j) + p(i - 1, j)) / (du * du);
                    let vv = (p(i, j + 1) - 2.0 * p(i, j) + p(i, j - 1)) / (dv * dv);
                    0.25 * (uu + vv)
                }
            };
            op + m.at(i, j) * p(i, j)
        })
        .collect();
    Ok(GridFunction { spec, values })
}
