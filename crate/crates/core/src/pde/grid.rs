use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IndexRect, Location, Result};

/// Rectangular sampling of the coordinate domain `[u0,u1] x [v0,v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

impl GridSpec {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64, nu: usize, nv: usize) -> Result<Self> {
        let s = GridSpec {
            u0,
            u1,
            v0,
            v1,
            nu,
            nv,
        };
        s.validate()?;
        Ok(s)
    }

    /// Square grid `[a,b]^2` with `n` samples per side.
    pub fn square(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(a, b, a, b, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.u0, self.u1, self.v0, self.v1]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if self.u1 <= self.u0 || self.v1 <= self.v0 {
            return Err(Error::InvalidGrid("empty interval".into()));
        }
        if self.nu < 4 || self.nv < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 samples per axis, got {}x{}",
                self.nu, self.nv
            )));
        }
        Ok(())
    }

    pub fn du(&self) -> f64 {
        (self.u1 - self.u0) / (self.nu - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        (self.v1 - self.v0) / (self.nv - 1) as f64
    }

    /// Largest spacing; the `Delta` in all `C * Delta^p` tolerances.
    pub fn spacing(&self) -> f64 {
        self.du().max(self.dv())
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.du()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.dv()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn location(&self, i: usize, j: usize) -> Location {
        Location {
            i,
            j,
            u: self.u(i),
            v: self.v(j),
        }
    }

    pub fn location_of(&self, idx: usize) -> Location {
        self.location(idx / self.nv, idx % self.nv)
    }

    /// Sub-grid on an index rectangle.
    pub fn sub(&self, r: IndexRect) -> Result<GridSpec> {
        if r.i1 >= self.nu || r.j1 >= self.nv || r.i0 >= r.i1 || r.j0 >= r.j1 {
            return Err(Error::InvalidGrid(format!("bad sub-rectangle {r:?}")));
        }
        GridSpec::new(
            self.u(r.i0),
            self.u(r.i1),
            self.v(r.j0),
            self.v(r.j1),
            r.i1 - r.i0 + 1,
            r.j1 - r.j0 + 1,
        )
    }

    /// Samples a function at every node, row-major (u outer).
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.nu {
            for j in 0..self.nv {
                out.push(f(self.u(i), self.v(j)));
            }
        }
        out
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.nu == other.nu
            && self.nv == other.nv
            && (self.u0 - other.u0).abs() <= 1e-12 * (1.0 + self.u0.abs())
            && (self.u1 - other.u1).abs() <= 1e-12 * (1.0 + self.u1.abs())
            && (self.v0 - other.v0).abs() <= 1e-12 * (1.0 + self.v0.abs())
            && (self.v1 - other.v1).abs() <= 1e-12 * (1.0 + self.v1.abs())
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// True for nodes at least `margin` away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.nu && j + margin < self.nv
    }
}

/// Scalar field sampled on a grid, row-major with `u` as the outer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(spec.location_of(k)));
        }
        Ok(GridFunction { spec, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(spec: GridSpec, f: F) -> Result<Self> {
        GridFunction::new(spec, spec.sample(f))
    }

    pub fn constant(spec: GridSpec, c: f64) -> Result<Self> {
        GridFunction::new(spec, vec![c; spec.len()])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        let k = self.spec.index(i, j);
        self.values[k] = x;
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        GridFunction {
            spec: self.spec,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.spec.check_same(&other.spec)?;
        Ok(GridFunction {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Row of values on `v = v0` (indexed by `i`).
    pub fn row_v0(&self) -> Vec<f64> {
        (0..self.spec.nu).map(|i| self.at(i, 0)).collect()
    }

    /// Column of values on `u = u0` (indexed by `j`).
    pub fn col_u0(&self) -> Vec<f64> {
        (0..self.spec.nv).map(|j| self.at(0, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Restriction to an index rectangle.
    pub fn restrict(&self, r: IndexRect) -> Result<GridFunction> {
        let spec = self.spec.sub(r)?;
        let mut values = Vec::with_capacity(spec.len());
        for i in r.i0..=r.i1 {
            for j in r.j0..=r.j1 {
                values.push(self.at(i, j));
            }
        }
        Ok(GridFunction { spec, values })
    }

    /// CSV with header `u,v,value`, rows in row-major node order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["u", "v", "value"])?;
        for i in 0..self.spec.nu {
            for j in 0..self.spec.nv {
                wr.write_record(&[
                    self.spec.u(i).to_string(),
                    self.spec.v(j).to_string(),
                    self.at(i, j).to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV format of [`GridFunction::write_csv`] onto a known grid.
    pub fn read_csv<R: Read>(spec: GridSpec, r: R) -> Result<GridFunction> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.len() != 3 || &headers[0] != "u" || &headers[1] != "v" || &headers[2] != "value" {
            return Err(Error::Parse("expected header u,v,value".into()));
        }
        let mut values = Vec::with_capacity(spec.len());
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", k + 2)))
            };
            let (u, v, x) = (parse(&rec[0])?, parse(&rec[1])?, parse(&rec[2])?);
            if k >= spec.len() {
                return Err(Error::DimensionMismatch {
                    expected: spec.len(),
                    got: k + 1,
                });
            }
            let loc = spec.location_of(k);
            let tol = 1e-9 * (1.0 + loc.u.abs() + loc.v.abs());
            if (u - loc.u).abs() > tol || (v - loc.v).abs() > tol {
                return Err(Error::Parse(format!(
                    "row {} at ({u},{v}) does not match grid node ({},{})",
                    k + 2,
                    loc.u,
                    loc.v
                )));
            }
            values.push(x);
        }
        GridFunction::new(spec, values)
    }
}

/// Vector-valued field, stored node-major: component `c` of node `(i,j)` is
/// `data[(i * nv + j) * dim + c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorGrid {
    pub spec: GridSpec,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl VectorGrid {
    pub fn zeros(spec: GridSpec, dim: usize) -> Self {
        VectorGrid {
            spec,
            dim,
            data: vec![0.0; spec.len() * dim],
        }
    }

    pub fn new(spec: GridSpec, dim: usize, data: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if data.len() != spec.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: spec.len() * dim,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(spec.location_of(k / dim)));
        }
        Ok(VectorGrid { spec, dim, data })
    }

    /// Stacks scalar components (all on the same grid).
    pub fn from_components(comps: &[GridFunction]) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::Config("no components".into()))?;
        let spec = first.spec;
        let dim = comps.len();
        let mut out = VectorGrid::zeros(spec, dim);
        for (c, f) in comps.iter().enumerate() {
            spec.check_same(&f.spec)?;
            for k in 0..spec.len() {
                out.data[k * dim + c] = f.values[k];
            }
        }
        Ok(out)
    }

    pub fn component(&self, c: usize) -> GridFunction {
        GridFunction {
            spec: self.spec,
            values: (0..self.spec.len()).map(|k| self.data[k * self.dim + c]).collect(),
        }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> &[f64] {
        let k = self.spec.index(i, j) * self.dim;
        &self.data[k..k + self.dim]
    }

    #[inline]
    pub fn node_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = self.spec.index(i, j) * self.dim;
        &mut self.data[k..k + self.dim]
    }

    pub fn restrict(&self, r: IndexRect) -> Result<VectorGrid> {
        let spec = self.spec.sub(r)?;
        let mut data = Vec::with_capacity(spec.len() * self.dim);
        for i in r.i0..=r.i1 {
            for j in r.j0..=r.j1 {
                data.extend_from_slice(self.node(i, j));
            }
        }
        Ok(VectorGrid {
            spec,
            dim: self.dim,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let s = GridSpec::new(0.0, 1.0, -1.0, 1.0, 5, 9).unwrap();
        assert_eq!(s.du(), 0.25);
        assert_eq!(s.dv(), 0.25);
        assert_eq!(s.u(4), 1.0);
        assert_eq!(s.v(0), -1.0);
        assert_eq!(s.index(1, 2), 11);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 3, 8).is_err());
        assert!(GridSpec::new(1.0, 1.0, 0.0, 1.0, 8, 8).is_err());
        assert!(GridSpec::new(0.0, f64::NAN, 0.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        let s = GridSpec::square(0.0, 1.0, 4).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = f64::INFINITY;
        match GridFunction::new(s, v) {
            Err(Error::NonFinite(loc)) => assert_eq!((loc.i, loc.j), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = GridSpec::new(0.0, 1.0, 2.0, 3.0, 4, 5).unwrap();
        let f = GridFunction::from_fn(s, |u, v| u * v - 0.1).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("u,v,value\n"));
        let g = GridFunction::read_csv(s, buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_with_wrong_nodes_rejected() {
        let s = GridSpec::square(0.0, 1.0, 4).unwrap();
        let other = GridSpec::square(0.0, 2.0, 4).unwrap();
        let f = GridFunction::constant(other, 1.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(GridFunction::read_csv(s, buf.as_slice()).is_err());
    }

    #[test]
    fn restrict_sub_rectangle() {
        let s = GridSpec::square(0.0, 1.0, 6).unwrap();
        let f = GridFunction::from_fn(s, |u, v| u + 10.0 * v).unwrap();
        let r = IndexRect {
            i0: 1,
            i1: 4,
            j0: 2,
            j1: 5,
        };
        let g = f.restrict(r).unwrap();
        assert_eq!(g.spec.nu, 4);
        assert_eq!(g.at(0, 0), f.at(1, 2));
        assert!((g.spec.u0 - 0.2).abs() < 1e-15);
    }
}
