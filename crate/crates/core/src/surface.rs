//! De Sitter surfaces `g: L^2 -> S_1^m` built from solutions of the
//! generating PDE, their discrete connection, and the conjugacy / special /
//! Codazzi predicates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IndexRect, Result};
use crate::lorentz::{dot, frame_norm};
use crate::pde::fd::{d1, Jets};
use crate::pde::{Axis, CoefficientField, GridFunction, GridSpec, PdeKind, VectorGrid};
use crate::report::{Check, MaxTracker, Tol};

pub const PATCH_FORMAT_VERSION: u32 = 1;

/// Map into `L^{m+1}` sampled on a grid, with cached jets and metric.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    g: VectorGrid,
    jets: Jets,
    /// `[E, F, G]` per node.
    metric: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchFile {
    pub format_version: u32,
    pub spec: GridSpec,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl SurfacePatch {
    /// Builds the caches and checks that the induced metric is Riemannian.
    pub fn new(g: VectorGrid) -> Result<Self> {
        g.spec.validate()?;
        if g.dim < 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: g.dim,
            });
        }
        let spec = g.spec;
        let d = g.dim;
        let jets = Jets::compute(&spec, &g.data, d);
        let metric: Vec<[f64; 3]> = (0..spec.len())
            .map(|k| {
                let gu = &jets.du[k * d..(k + 1) * d];
                let gv = &jets.dv[k * d..(k + 1) * d];
                [dot(gu, gu), dot(gu, gv), dot(gv, gv)]
            })
            .collect();
        for (k, &[e, f, gg]) in metric.iter().enumerate() {
            let det = e * gg - f * f;
            if !(e > 0.0 && det > 1e-14 * (e * gg).abs()) {
                return Err(Error::MetricNotRiemannian {
                    at: spec.location_of(k),
                });
            }
        }
        Ok(SurfacePatch { g, jets, metric })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.g.spec
    }

    pub fn dim(&self) -> usize {
        self.g.dim
    }

    pub fn values(&self) -> &VectorGrid {
        &self.g
    }

    #[inline]
    fn slice<'a>(&self, data: &'a [f64], k: usize) -> &'a [f64] {
        let d = self.g.dim;
        &data[k * d..(k + 1) * d]
    }

    pub fn point(&self, k: usize) -> &[f64] {
        self.slice(&self.g.data, k)
    }
    pub fn gu(&self, k: usize) -> &[f64] {
        self.slice(&self.jets.du, k)
    }
    pub fn gv(&self, k: usize) -> &[f64] {
        self.slice(&self.jets.dv, k)
    }
    pub fn guu(&self, k: usize) -> &[f64] {
        self.slice(&self.jets.duu, k)
    }
    pub fn guv(&self, k: usize) -> &[f64] {
        self.slice(&self.jets.duv, k)
    }
    pub fn gvv(&self, k: usize) -> &[f64] {
        self.slice(&self.jets.dvv, k)
    }

    /// `[E, F, G]` at node index `k`.
    pub fn metric(&self, k: usize) -> [f64; 3] {
        self.metric[k]
    }

    /// Coefficients `(x, y)` of the tangential projection `x g_u + y g_v`.
    pub fn tangential(&self, k: usize, w: &[f64]) -> [f64; 2] {
        let [e, f, g] = self.metric[k];
        let b0 = dot(w, self.gu(k));
        let b1 = dot(w, self.gv(k));
        let det = e * g - f * f;
        [(g * b0 - f * b1) / det, (e * b1 - f * b0) / det]
    }

    /// Part of `w` normal to the surface inside `S_1^m` (tangential and
    /// radial parts removed).
    pub fn normal_part(&self, k: usize, w: &[f64]) -> Vec<f64> {
        // Remove the radial direction first so that discretization errors in
        // g_u, g_v (which are only approximately orthogonal to g) do not leak
        // into the normal part.
        let p = self.point(k);
        let pp = dot(p, p);
        let radial = |x: &[f64]| -> Vec<f64> {
            let r = dot(x, p) / pp;
            x.iter().zip(p).map(|(a, b)| a - r * b).collect()
        };
        let (w, gu, gv) = (radial(w), radial(self.gu(k)), radial(self.gv(k)));
        let (e, f, g) = (dot(&gu, &gu), dot(&gu, &gv), dot(&gv, &gv));
        let (b0, b1) = (dot(&w, &gu), dot(&w, &gv));
        let det = e * g - f * f;
        let (x, y) = ((g * b0 - f * b1) / det, (e * b1 - f * b0) / det);
        (0..w.len()).map(|c| w[c] - x * gu[c] - y * gv[c]).collect()
    }

    pub fn to_file(&self) -> PatchFile {
        PatchFile {
            format_version: PATCH_FORMAT_VERSION,
            spec: self.g.spec,
            dim: self.g.dim,
            values: self.g.data.clone(),
        }
    }

    pub fn from_file(f: PatchFile) -> Result<Self> {
        if f.format_version != PATCH_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: f.format_version,
                expected: PATCH_FORMAT_VERSION,
            });
        }
        SurfacePatch::new(VectorGrid::new(f.spec, f.dim, f.values)?)
    }
}

/// Stacks the solutions into `k` and computes `mu = <k,k>`.
pub fn assemble_k(solutions: &[GridFunction]) -> Result<(VectorGrid, GridFunction)> {
    if solutions.len() < 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: solutions.len(),
        });
    }
    let k = VectorGrid::from_components(solutions)?;
    let spec = k.spec;
    let values: Vec<f64> = (0..spec.len())
        .map(|n| {
            let x = &k.data[n * k.dim..(n + 1) * k.dim];
            dot(x, x)
        })
        .collect();
    let mut bad: Option<(IndexRect, usize)> = None;
    for (n, &m) in values.iter().enumerate() {
        if !(m > 0.0) {
            let (i, j) = (n / spec.nv, n % spec.nv);
            bad = Some(match bad {
                None => (IndexRect { i0: i, i1: i, j0: j, j1: j }, n),
                Some((r, worst)) => (
                    IndexRect {
                        i0: r.i0.min(i),
                        i1: r.i1.max(i),
                        j0: r.j0.min(j),
                        j1: r.j1.max(j),
                    },
                    if m < values[worst] { n } else { worst },
                ),
            });
        }
    }
    if let Some((rect, worst)) = bad {
        return Err(Error::MuNonPositive {
            at: spec.location_of(worst),
            rect,
            value: values[worst],
        });
    }
    Ok((k, GridFunction { spec, values }))
}

/// `g = k / sqrt(mu)`.
pub fn normalize_to_sphere(k: &VectorGrid, mu: &GridFunction) -> Result<SurfacePatch> {
    k.spec.check_same(&mu.spec)?;
    let mut g = k.clone();
    for n in 0..k.spec.len() {
        let m = mu.values[n];
        if !(m > 0.0) {
            return Err(Error::MuNonPositive {
                at: k.spec.location_of(n),
                rect: IndexRect {
                    i0: n / k.spec.nv,
                    i1: n / k.spec.nv,
                    j0: n % k.spec.nv,
                    j1: n % k.spec.nv,
                },
                value: m,
            });
        }
        let s = 1.0 / m.sqrt();
        for x in &mut g.data[n * k.dim..(n + 1) * k.dim] {
            *x *= s;
        }
    }
    SurfacePatch::new(g)
}

/// Christoffel symbols `Gamma^c_ij` of the metric induced by `g`, per node;
/// index 0 is `u`, 1 is `v`.
#[derive(Debug, Clone)]
pub struct Connection {
    pub spec: GridSpec,
    pub gamma: Vec<[[[f64; 2]; 2]; 2]>,
}

impl Connection {
    fn field(&self, f: impl Fn(&[[[f64; 2]; 2]; 2]) -> f64) -> GridFunction {
        GridFunction {
            spec: self.spec,
            values: self.gamma.iter().map(f).collect(),
        }
    }

    /// `Gamma^1` with `nabla_u d_v = Gamma^1 d_u + Gamma^2 d_v`.
    pub fn gamma1(&self) -> GridFunction {
        self.field(|g| g[0][0][1])
    }

    pub fn gamma2(&self) -> GridFunction {
        self.field(|g| g[1][0][1])
    }

    /// Real and imaginary parts of `Gamma` with
    /// `nabla_{d_z} d_{zbar} = Gamma d_z + conj(Gamma) d_{zbar}`, i.e. the
    /// tangential part of `(g_uu + g_vv)/4` is `Re(Gamma) g_u + Im(Gamma) g_v`.
    pub fn complex(&self) -> (GridFunction, GridFunction) {
        (
            self.field(|g| 0.25 * (g[0][0][0] + g[0][1][1])),
            self.field(|g| 0.25 * (g[1][0][0] + g[1][1][1])),
        )
    }

    /// `(Gamma^1, Gamma^2)` or `(Re Gamma, Im Gamma)`.
    pub fn pair_fields(&self, kind: PdeKind) -> (GridFunction, GridFunction) {
        match kind {
            PdeKind::Hyperbolic => (self.gamma1(), self.gamma2()),
            PdeKind::Elliptic => self.complex(),
        }
    }
}

pub fn christoffels(patch: &SurfacePatch) -> Connection {
    let spec = *patch.spec();
    let gamma = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let mut out = [[[0.0; 2]; 2]; 2];
            let second = [[patch.guu(k), patch.guv(k)], [patch.guv(k), patch.gvv(k)]];
            for i in 0..2 {
                for j in 0..2 {
                    let [x, y] = patch.tangential(k, second[i][j]);
                    out[0][i][j] = x;
                    out[1][i][j] = y;
                }
            }
            out
        })
        .collect();
    Connection { spec, gamma }
}

const CONJ_MARGIN: usize = 1;
const DERIV_MARGIN: usize = 2;

fn interior_nodes(spec: &GridSpec, margin: usize) -> Vec<(usize, usize)> {
    (0..spec.nu)
        .flat_map(|i| (0..spec.nv).map(move |j| (i, j)))
        .filter(|&(i, j)| spec.is_interior(i, j, margin))
        .collect()
}

fn max_over<F>(spec: &GridSpec, margin: usize, f: F) -> MaxTracker
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    interior_nodes(spec, margin)
        .into_par_iter()
        .map(|(i, j)| {
            let mut t = MaxTracker::new();
            t.update(f(i, j), spec.location(i, j));
            t
        })
        .reduce(MaxTracker::new, MaxTracker::merge)
}

/// Largest deviation of `<g,g>` from 1.
pub fn check_de_sitter(patch: &SurfacePatch, tol: f64) -> Check {
    let spec = *patch.spec();
    let t = max_over(&spec, 0, |i, j| {
        let p = patch.point(spec.index(i, j));
        dot(p, p) - 1.0
    });
    Check::new("de_sitter", t, Tol::absolute(tol), spec.spacing())
}

/// Normal component of `g_uv` (hyperbolic) or `g_uu + g_vv` (elliptic).
pub fn check_conjugate(patch: &SurfacePatch, kind: PdeKind, tol: Tol) -> Check {
    let spec = *patch.spec();
    let t = max_over(&spec, CONJ_MARGIN, |i, j| {
        let k = spec.index(i, j);
        let w: Vec<f64> = match kind {
            PdeKind::Hyperbolic => patch.guv(k).to_vec(),
            PdeKind::Elliptic => patch.guu(k).iter().zip(patch.gvv(k)).map(|(a, b)| a + b).collect(),
        };
        frame_norm(&patch.normal_part(k, &w))
    });
    Check::new(format!("conjugate_{kind}"), t, tol, spec.spacing())
}

/// Special condition from the two Christoffel fields: `Gamma^1_u - Gamma^2_v`
/// (hyperbolic, `p = Gamma^1`, `q = Gamma^2`) or `Im Gamma_z = (q_u - p_v)/2`
/// (elliptic, `p + iq = Gamma`).
pub fn special_residual(kind: PdeKind, p: &GridFunction, q: &GridFunction) -> MaxTracker {
    let spec = p.spec;
    let pu = d1(&spec, &p.values, 1, Axis::U);
    let pv = d1(&spec, &p.values, 1, Axis::V);
    let qu = d1(&spec, &q.values, 1, Axis::U);
    let qv = d1(&spec, &q.values, 1, Axis::V);
    max_over(&spec, DERIV_MARGIN, |i, j| {
        let k = spec.index(i, j);
        match kind {
            PdeKind::Hyperbolic => pu[k] - qv[k],
            PdeKind::Elliptic => 0.5 * (qu[k] - pv[k]),
        }
    })
}

pub fn check_special(conn: &Connection, kind: PdeKind, tol: Tol) -> Check {
    let (p, q) = conn.pair_fields(kind);
    Check::new(
        format!("special_{kind}"),
        special_residual(kind, &p, &q),
        tol,
        conn.spec.spacing(),
    )
}

/// Extra condition under which the bending comes from a genuine conformal
/// variation: `Gamma^1_u = Gamma^2_v = 2 Gamma^1 Gamma^2` or
/// `Gamma_z = 2 |Gamma|^2`.
pub fn cartan_residual(kind: PdeKind, p: &GridFunction, q: &GridFunction) -> MaxTracker {
    let spec = p.spec;
    let pu = d1(&spec, &p.values, 1, Axis::U);
    let pv = d1(&spec, &p.values, 1, Axis::V);
    let qu = d1(&spec, &q.values, 1, Axis::U);
    let qv = d1(&spec, &q.values, 1, Axis::V);
    max_over(&spec, DERIV_MARGIN, |i, j| {
        let k = spec.index(i, j);
        let (a, b) = (p.values[k], q.values[k]);
        match kind {
            PdeKind::Hyperbolic => {
                let prod = 2.0 * a * b;
                (pu[k] - prod).abs().max((qv[k] - prod).abs())
            }
            PdeKind::Elliptic => {
                let re = 0.5 * (pu[k] + qv[k]) - 2.0 * (a * a + b * b);
                let im = 0.5 * (qu[k] - pv[k]);
                re.hypot(im)
            }
        }
    })
}

pub fn cartan_condition(conn: &Connection, kind: PdeKind, tol: Tol) -> Check {
    let (p, q) = conn.pair_fields(kind);
    Check::new(
        format!("cartan_{kind}"),
        cartan_residual(kind, &p, &q),
        tol,
        conn.spec.spacing(),
    )
    .informational()
}

/// Gradient of `log mu` forced by `d mu + 2 mu omega = 0` (hyperbolic) or
/// `mu_zbar + 2 mu Gamma = 0` (elliptic).
fn log_mu_gradient(kind: PdeKind, p: f64, q: f64) -> [f64; 2] {
    match kind {
        PdeKind::Hyperbolic => [-2.0 * q, -2.0 * p],
        PdeKind::Elliptic => [-4.0 * p, -4.0 * q],
    }
}

#[derive(Debug, Clone)]
pub struct MuSolution {
    pub mu: GridFunction,
    /// Largest difference of `log mu` between the two L-shaped paths.
    pub path_residual: f64,
}

impl MuSolution {
    pub fn check(&self, tol: Tol) -> Check {
        Check::scalar("mu_path_independence", self.path_residual, tol, self.mu.spec.spacing())
    }

    pub fn ensure_path_independent(&self, tol: f64) -> Result<()> {
        if self.path_residual > tol {
            return Err(Error::PathDependent {
                residual: self.path_residual,
                tolerance: tol,
            });
        }
        Ok(())
    }
}

/// Integrates `log mu` from the corner `(u0, v0)` (where `mu = 1`) along
/// both L-shaped paths with the trapezoid rule; the result is the geometric
/// mean of the two.
pub fn solve_mu(conn: &Connection, kind: PdeKind) -> MuSolution {
    let spec = conn.spec;
    let (p, q) = conn.pair_fields(kind);
    let grad = |i: usize, j: usize| log_mu_gradient(kind, p.at(i, j), q.at(i, j));
    let (du, dv) = (spec.du(), spec.dv());
    // Integrals along v = v0 and u = u0.
    let mut along_u0 = vec![0.0; spec.nu];
    for i in 1..spec.nu {
        along_u0[i] = along_u0[i - 1] + 0.5 * du * (grad(i - 1, 0)[0] + grad(i, 0)[0]);
    }
    let mut along_v0 = vec![0.0; spec.nv];
    for j in 1..spec.nv {
        along_v0[j] = along_v0[j - 1] + 0.5 * dv * (grad(0, j - 1)[1] + grad(0, j)[1]);
    }
    // Path A: first u then v. Path B: first v then u.
    let mut a = vec![0.0; spec.len()];
    let mut b = vec![0.0; spec.len()];
    for i in 0..spec.nu {
        a[spec.index(i, 0)] = along_u0[i];
        for j in 1..spec.nv {
            a[spec.index(i, j)] = a[spec.index(i, j - 1)] + 0.5 * dv * (grad(i, j - 1)[1] + grad(i, j)[1]);
        }
    }
    for j in 0..spec.nv {
        b[spec.index(0, j)] = along_v0[j];
        for i in 1..spec.nu {
            b[spec.index(i, j)] = b[spec.index(i - 1, j)] + 0.5 * du * (grad(i - 1, j)[0] + grad(i, j)[0]);
        }
    }
    let path_residual = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let values = a.iter().zip(&b).map(|(x, y)| (0.5 * (x + y)).exp()).collect();
    MuSolution {
        mu: GridFunction { spec, values },
        path_residual,
    }
}

/// Conjugate structure `D = mu J` on the base surface.
#[derive(Debug, Clone)]
pub struct ConjugateStructure {
    pub kind: PdeKind,
    pub mu: GridFunction,
}

impl ConjugateStructure {
    /// `J` as a matrix acting on coordinate columns `(a_u, a_v)`:
    /// hyperbolic `J d_u = d_u`, `J d_v = -d_v`; elliptic `J d_u = d_v`,
    /// `J d_v = -d_u`.
    pub fn j_matrix(kind: PdeKind) -> [[f64; 2]; 2] {
        match kind {
            PdeKind::Hyperbolic => [[1.0, 0.0], [0.0, -1.0]],
            PdeKind::Elliptic => [[0.0, -1.0], [1.0, 0.0]],
        }
    }

    pub fn new(kind: PdeKind, mu: GridFunction) -> Result<Self> {
        if let Some(k) = mu.values.iter().position(|m| *m == 0.0 || !m.is_finite()) {
            return Err(Error::MuNonPositive {
                at: mu.spec.location_of(k),
                rect: IndexRect {
                    i0: k / mu.spec.nv,
                    i1: k / mu.spec.nv,
                    j0: k % mu.spec.nv,
                    j1: k % mu.spec.nv,
                },
                value: mu.values[k],
            });
        }
        Ok(ConjugateStructure { kind, mu })
    }
}

/// `(nabla_u D) d_v - (nabla_v D) d_u` for `D = mu J` with the full
/// coordinate connection.
pub fn codazzi_bracket(
    gamma: &[[[f64; 2]; 2]; 2],
    kind: PdeKind,
    mu: f64,
    dmu: [f64; 2],
) -> [f64; 2] {
    let j = ConjugateStructure::j_matrix(kind);
    let d = |i: usize, l: usize| mu * j[i][l];
    // (nabla_k D)^i_l
    let cov = |k: usize, i: usize, l: usize| {
        let mut s = dmu[k] * j[i][l];
        for m in 0..2 {
            s += gamma[i][k][m] * d(m, l) - d(i, m) * gamma[m][k][l];
        }
        s
    };
    [cov(0, 0, 1) - cov(1, 0, 0), cov(0, 1, 1) - cov(1, 1, 0)]
}

pub fn codazzi_residual(conn: &Connection, structure: &ConjugateStructure, tol: Tol) -> Check {
    let spec = conn.spec;
    let mu = &structure.mu;
    let mu_u = d1(&spec, &mu.values, 1, Axis::U);
    let mu_v = d1(&spec, &mu.values, 1, Axis::V);
    // mu is path-integrated; its central differences next to the edge pick up
    // the jump between one-sided and central stencil errors, so stay two
    // nodes in.
    let t = max_over(&spec, DERIV_MARGIN, |i, j| {
        let k = spec.index(i, j);
        let b = codazzi_bracket(&conn.gamma[k], structure.kind, mu.values[k], [mu_u[k], mu_v[k]]);
        b[0].hypot(b[1])
    });
    Check::new(format!("codazzi_{}", structure.kind), t, tol, spec.spacing())
}

pub fn phi_to_psi(phi: &GridFunction, mu: &GridFunction) -> Result<GridFunction> {
    phi.spec.check_same(&mu.spec)?;
    Ok(GridFunction {
        spec: phi.spec,
        values: phi.values.iter().zip(&mu.values).map(|(p, m)| p * m.sqrt()).collect(),
    })
}

pub fn psi_to_phi(psi: &GridFunction, mu: &GridFunction) -> Result<GridFunction> {
    psi.spec.check_same(&mu.spec)?;
    Ok(GridFunction {
        spec: psi.spec,
        values: psi.values.iter().zip(&mu.values).map(|(p, m)| p / m.sqrt()).collect(),
    })
}

/// `F = <d_u, d_v>` (hyperbolic) or `<d_z, d_zbar> = (E + G)/4` (elliptic).
pub fn metric_f(patch: &SurfacePatch, kind: PdeKind, k: usize) -> f64 {
    let [e, f, g] = patch.metric(k);
    match kind {
        PdeKind::Hyperbolic => f,
        PdeKind::Elliptic => 0.25 * (e + g),
    }
}

/// Coefficient `M = F - mu_uv/2mu + mu_u mu_v/4mu^2`, or its elliptic
/// counterpart with `mu_{z zbar} = Lap(mu)/4` and
/// `mu_z mu_zbar = (mu_u^2 + mu_v^2)/4`.
pub fn compute_m(patch: &SurfacePatch, mu: &GridFunction, kind: PdeKind) -> Result<CoefficientField> {
    let spec = *patch.spec();
    spec.check_same(&mu.spec)?;
    let j = Jets::compute(&spec, &mu.values, 1);
    let values = (0..spec.len())
        .map(|k| {
            let m = mu.values[k];
            let f = metric_f(patch, kind, k);
            match kind {
                PdeKind::Hyperbolic => f - j.duv[k] / (2.0 * m) + j.du[k] * j.dv[k] / (4.0 * m * m),
                PdeKind::Elliptic => {
                    let lap = 0.25 * (j.duu[k] + j.dvv[k]);
                    let grad2 = 0.25 * (j.du[k] * j.du[k] + j.dv[k] * j.dv[k]);
                    f - lap / (2.0 * m) + grad2 / (4.0 * m * m)
                }
            }
        })
        .collect();
    CoefficientField::new(GridFunction::new(spec, values)?)
}

/// Residual of `phi_uv - Gamma^1 phi_u - Gamma^2 phi_v + F phi` (hyperbolic)
/// or `phi_{z zbar} - Gamma phi_z - conj(Gamma) phi_zbar + F phi` (elliptic)
/// at interior nodes; zero on the boundary.
pub fn eqvar_residual(
    patch: &SurfacePatch,
    conn: &Connection,
    kind: PdeKind,
    phi: &GridFunction,
) -> Result<GridFunction> {
    let spec = *patch.spec();
    spec.check_same(&phi.spec)?;
    let j = Jets::compute(&spec, &phi.values, 1);
    let (p, q) = conn.pair_fields(kind);
    let values = (0..spec.len())
        .map(|k| {
            let (i, jj) = (k / spec.nv, k % spec.nv);
            if !spec.is_interior(i, jj, CONJ_MARGIN) {
                return 0.0;
            }
            let f = metric_f(patch, kind, k);
            let second = match kind {
                PdeKind::Hyperbolic => j.duv[k],
                PdeKind::Elliptic => 0.25 * (j.duu[k] + j.dvv[k]),
            };
            second - p.values[k] * j.du[k] - q.values[k] * j.dv[k] + f * phi.values[k]
        })
        .collect();
    Ok(GridFunction { spec, values })
}

/// Max over the components of `g` of their residual in the variation equation.
pub fn check_components_eqvar(patch: &SurfacePatch, conn: &Connection, kind: PdeKind, tol: Tol) -> Result<Check> {
    let spec = *patch.spec();
    let mut t = MaxTracker::new();
    for c in 0..patch.dim() {
        let r = eqvar_residual(patch, conn, kind, &patch.values().component(c))?;
        for (k, x) in r.values.iter().enumerate() {
            t.update(*x, spec.location_of(k));
        }
    }
    Ok(Check::new(format!("eqvar_{kind}"), t, tol, spec.spacing()))
}
