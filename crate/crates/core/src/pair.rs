//! The pair `(h, r)` attached to a de Sitter surface `g` by
//! `r = 1/g_1`, `h = r (g_2, ..., g_{n+2})`, and its inverse
//! `g = r^{-1} (1, h, |h|^2 - r^2)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IndexRect, Result};
use crate::pde::fd::Jets;
use crate::pde::{GridFunction, GridSpec, VectorGrid};
use crate::report::{Check, MaxTracker, Tol};
use crate::surface::SurfacePatch;

pub const PAIR_FORMAT_VERSION: u32 = 1;

/// Default safety margin for `|grad r| < 1`.
pub const GRADIENT_MARGIN: f64 = 1e-6;

/// Smallest patch (per side) kept after trimming.
pub const MIN_TRIM_SIDE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFlags {
    pub immersion_ok: bool,
    pub gradient_ok: bool,
    pub max_grad_r: f64,
    /// Smallest `det(I_h) / (E G)` over the patch.
    pub min_metric_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialPair {
    /// Surface `h` in `R^{n+1}`, node-major.
    pub h: VectorGrid,
    pub r: GridFunction,
    pub flags: PairFlags,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFile {
    pub format_version: u32,
    pub pair: SpecialPair,
}

/// Result of [`pair_from_g`]: the pair plus what was done to the patch.
#[derive(Debug, Clone)]
pub struct PairExtraction {
    pub pair: SpecialPair,
    /// Sub-rectangle kept when `g_1` changes sign or vanishes.
    pub trimmed: Option<IndexRect>,
    /// Whether `g` was replaced by `-g` to make `r` positive.
    pub flipped: bool,
}

impl SpecialPair {
    /// Builds a pair and computes its validation flags.
    pub fn new(h: VectorGrid, r: GridFunction, margin: f64) -> Result<Self> {
        h.spec.check_same(&r.spec)?;
        if let Some(k) = r.values.iter().position(|x| !(*x > 0.0)) {
            return Err(Error::RNonPositive {
                at: r.spec.location_of(k),
            });
        }
        let mut p = SpecialPair {
            h,
            r,
            flags: PairFlags {
                immersion_ok: false,
                gradient_ok: false,
                max_grad_r: f64::NAN,
                min_metric_ratio: f64::NAN,
            },
        };
        let v = validate_pair(&p, margin);
        p.flags = v.flags;
        Ok(p)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.h.spec
    }

    /// Dimension `n + 1` of the Euclidean space containing `h`.
    pub fn euclid_dim(&self) -> usize {
        self.h.dim
    }

    pub fn to_file(&self) -> PairFile {
        PairFile {
            format_version: PAIR_FORMAT_VERSION,
            pair: self.clone(),
        }
    }

    pub fn from_file(f: PairFile) -> Result<Self> {
        if f.format_version != PAIR_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: f.format_version,
                expected: PAIR_FORMAT_VERSION,
            });
        }
        Ok(f.pair)
    }

    /// Point cloud `u,v,h1,...,r`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["u".to_string(), "v".to_string()];
        header.extend((1..=self.h.dim).map(|c| format!("h{c}")));
        header.push("r".into());
        wr.write_record(&header)?;
        let spec = *self.spec();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let mut rec = vec![spec.u(i).to_string(), spec.v(j).to_string()];
                rec.extend(self.h.node(i, j).iter().map(|x| x.to_string()));
                rec.push(self.r.at(i, j).to_string());
                wr.write_record(&rec)?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Largest all-true axis-aligned rectangle of a row-major `nu x nv` mask.
pub fn largest_true_rect(mask: &[bool], nu: usize, nv: usize) -> Option<IndexRect> {
    let mut heights = vec![0usize; nv];
    let mut best: Option<(usize, IndexRect)> = None;
    for i in 0..nu {
        for j in 0..nv {
            heights[j] = if mask[i * nv + j] { heights[j] + 1 } else { 0 };
        }
        // Largest rectangle in the histogram ending at row i.
        let mut stack: Vec<usize> = Vec::new();
        for j in 0..=nv {
            let h = if j < nv { heights[j] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] <= h {
                    break;
                }
                stack.pop();
                let height = heights[top];
                let left = stack.last().map_or(0, |&s| s + 1);
                let area = height * (j - left);
                if best.is_none_or(|(a, _)| area > a) {
                    best = Some((
                        area,
                        IndexRect {
                            i0: i + 1 - height,
                            i1: i,
                            j0: left,
                            j1: j - 1,
                        },
                    ));
                }
            }
            stack.push(j);
        }
    }
    best.map(|(_, r)| r)
}

/// Extracts `(h, r)` from `g`, flipping `g -> -g` if `g_1 < 0` and trimming
/// to the largest rectangle where `g_1` keeps one sign.
pub fn pair_from_g(patch: &SurfacePatch, margin: f64) -> Result<PairExtraction> {
    pair_from_g_values(patch.values(), margin)
}

/// [`pair_from_g`] on raw values.
pub fn pair_from_g_values(g: &VectorGrid, margin: f64) -> Result<PairExtraction> {
    let spec = g.spec;
    let d = g.dim;
    let g1: Vec<f64> = (0..spec.len()).map(|k| g.data[k * d]).collect();
    let tiny = 1e-12 * g1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if g1.iter().all(|x| x.abs() <= tiny) {
        return Err(Error::G1Vanishes);
    }
    let pos: Vec<bool> = g1.iter().map(|x| *x > tiny).collect();
    let neg: Vec<bool> = g1.iter().map(|x| *x < -tiny).collect();
    let (mut trimmed, mut flipped) = (None, false);
    let work: VectorGrid = if pos.iter().all(|b| *b) {
        g.clone()
    } else if neg.iter().all(|b| *b) {
        flipped = true;
        negate(g)
    } else {
        let rp = largest_true_rect(&pos, spec.nu, spec.nv);
        let rn = largest_true_rect(&neg, spec.nu, spec.nv);
        let area = |r: &Option<IndexRect>| r.map_or(0, |r| (r.i1 - r.i0 + 1) * (r.j1 - r.j0 + 1));
        let (rect, neg_side) = if area(&rn) > area(&rp) { (rn, true) } else { (rp, false) };
        let ok = rect.is_some_and(|r| r.i1 - r.i0 + 1 >= MIN_TRIM_SIDE && r.j1 - r.j0 + 1 >= MIN_TRIM_SIDE);
        if !ok {
            return Err(Error::RSignChange { rect });
        }
        let rect = rect.unwrap();
        trimmed = Some(rect);
        flipped = neg_side;
        let sub = g.restrict(rect)?;
        if neg_side {
            negate(&sub)
        } else {
            sub
        }
    };
    let pair = pair_from_values(&work, margin)?;
    Ok(PairExtraction {
        pair,
        trimmed,
        flipped,
    })
}

fn negate(g: &VectorGrid) -> VectorGrid {
    VectorGrid {
        spec: g.spec,
        dim: g.dim,
        data: g.data.iter().map(|x| -x).collect(),
    }
}

/// Componentwise extraction without trimming; requires `g_1 > 0`.
pub fn pair_from_values(g: &VectorGrid, margin: f64) -> Result<SpecialPair> {
    let spec = g.spec;
    let d = g.dim;
    if d < 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: d });
    }
    let n1 = d - 2;
    let mut h = VectorGrid::zeros(spec, n1);
    let mut r = GridFunction::constant(spec, 0.0)?;
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let x = g.node(i, j);
            if !(x[0] > 0.0) {
                return Err(Error::RNonPositive {
                    at: spec.location(i, j),
                });
            }
            let ri = 1.0 / x[0];
            r.set(i, j, ri);
            for (hc, xc) in h.node_mut(i, j).iter_mut().zip(&x[1..d - 1]) {
                *hc = ri * xc;
            }
        }
    }
    SpecialPair::new(h, r, margin)
}

/// `g = r^{-1} (1, h, |h|^2 - r^2)` in the pseudo-orthonormal basis.
pub fn g_values_from_pair(pair: &SpecialPair) -> Result<VectorGrid> {
    let spec = *pair.spec();
    let n1 = pair.euclid_dim();
    let d = n1 + 2;
    let mut g = VectorGrid::zeros(spec, d);
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let r = pair.r.at(i, j);
            if !(r > 0.0) {
                return Err(Error::RNonPositive {
                    at: spec.location(i, j),
                });
            }
            let h = pair.h.node(i, j);
            let hh: f64 = h.iter().map(|x| x * x).sum();
            let out = g.node_mut(i, j);
            out[0] = 1.0 / r;
            for c in 0..n1 {
                out[c + 1] = h[c] / r;
            }
            out[d - 1] = (hh - r * r) / r;
        }
    }
    Ok(g)
}

pub fn g_from_pair(pair: &SpecialPair) -> Result<SurfacePatch> {
    SurfacePatch::new(g_values_from_pair(pair)?)
}

#[derive(Debug, Clone)]
pub struct PairValidation {
    pub flags: PairFlags,
    pub immersion: Check,
    pub gradient: Check,
}

impl PairValidation {
    pub fn pass(&self) -> bool {
        self.flags.immersion_ok && self.flags.gradient_ok
    }
}

/// Threshold on `det(I_h) / (E G)` below which `h` is not an immersion.
pub const IMMERSION_RATIO_TOL: f64 = 1e-10;

/// Induced metric of `h`, gradient of `r` in that metric, and the two
/// conditions under which `g` has a Riemannian metric.
pub fn validate_pair(pair: &SpecialPair, margin: f64) -> PairValidation {
    let spec = *pair.spec();
    let n1 = pair.euclid_dim();
    let hj = Jets::compute(&spec, &pair.h.data, n1);
    let rj = Jets::compute(&spec, &pair.r.values, 1);
    let mut ratio = MaxTracker::new();
    let mut min_ratio = f64::INFINITY;
    let mut grad = MaxTracker::new();
    let mut immersion_ok = true;
    for k in 0..spec.len() {
        let loc = spec.location_of(k);
        let hu = &hj.du[k * n1..(k + 1) * n1];
        let hv = &hj.dv[k * n1..(k + 1) * n1];
        let e: f64 = hu.iter().map(|x| x * x).sum();
        let f: f64 = hu.iter().zip(hv).map(|(a, b)| a * b).sum();
        let g: f64 = hv.iter().map(|x| x * x).sum();
        let det = e * g - f * f;
        let rel = if e * g > 0.0 { det / (e * g) } else { 0.0 };
        // Tracker keeps the worst (smallest) ratio via its complement.
        ratio.update(1.0 - rel, loc);
        min_ratio = min_ratio.min(rel);
        if !(rel > IMMERSION_RATIO_TOL) {
            immersion_ok = false;
            grad.update(f64::INFINITY, loc);
            continue;
        }
        let (ru, rv) = (rj.du[k], rj.dv[k]);
        let norm2 = (g * ru * ru - 2.0 * f * ru * rv + e * rv * rv) / det;
        grad.update(norm2.max(0.0).sqrt(), loc);
    }
    let gradient_ok = immersion_ok && grad.value < 1.0 - margin;
    let immersion = Check::new(
        "pair_immersion",
        ratio,
        Tol::absolute(1.0 - IMMERSION_RATIO_TOL),
        spec.spacing(),
    )
    .with_hypothesis("h is an immersion");
    let gradient = Check::new("pair_grad_r_lt_1", grad, Tol::absolute(1.0 - margin), spec.spacing())
        .with_hypothesis("|grad r| < 1 in the metric of h");
    PairValidation {
        flags: PairFlags {
            immersion_ok,
            gradient_ok,
            max_grad_r: grad.value,
            min_metric_ratio: min_ratio,
        },
        immersion,
        gradient,
    }
}

/// The error a failed validation maps to.
pub fn validation_error(v: &PairValidation) -> Option<Error> {
    if !v.flags.immersion_ok {
        return Some(Error::NotImmersion {
            at: v.immersion.location.expect("tracked"),
        });
    }
    if !v.flags.gradient_ok {
        return Some(Error::GradientTooLarge {
            at: v.gradient.location.expect("tracked"),
            norm: v.flags.max_grad_r,
        });
    }
    None
}

/// Largest coordinate deviation of the round trips `g -> (h,r) -> g` and
/// `(h,r) -> g -> (h,r)`.
pub fn round_trip_errors(g: &VectorGrid) -> Result<(f64, f64)> {
    let pair = pair_from_values(g, GRADIENT_MARGIN)?;
    let g2 = g_values_from_pair(&pair)?;
    let e1 = g.data.iter().zip(&g2.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let pair2 = pair_from_values(&g2, GRADIENT_MARGIN)?;
    let mut e2 = pair.h.data.iter().zip(&pair2.h.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    e2 = pair.r.values.iter().zip(&pair2.r.values).fold(e2, |m, (a, b)| m.max((a - b).abs()));
    Ok((e1, e2))
}
