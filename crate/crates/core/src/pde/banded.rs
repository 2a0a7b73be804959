//! Banded LU factorization with partial pivoting.
//!
//! Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl`
//! super-diagonals hold the fill produced by row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= i && c <= i + self.kl + self.ku);
        i * self.width + (c + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, c: usize) -> f64 {
        if c + self.kl < i || c > i + self.kl + self.ku {
            0.0
        } else {
            self.data[self.slot(i, c)]
        }
    }

    /// Sets an entry inside the original band (`|i - c|` within `kl`/`ku`).
    pub fn set(&mut self, i: usize, c: usize, x: f64) {
        assert!(c + self.kl >= i && c <= i + self.ku, "entry outside band");
        let s = self.slot(i, c);
        self.data[s] = x;
    }

    /// `y = A x` using the unfactored matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(i, c) * x[c]).sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Factorizes in place. A pivot below `rel_tol * max|A|` is reported as
    /// [`Error::Resonant`].
    pub fn factor(mut self, rel_tol: f64) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let a = self.get(i, k).abs();
                if a > best {
                    best = a;
                    p = i;
                }
            }
            if best <= rel_tol * scale {
                return Err(Error::Resonant { row: k, pivot: best });
            }
            piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / d;
                self.data[s] = l;
                if l == 0.0 {
                    continue;
                }
                for c in k + 1..=last_col {
                    let kc = self.data[self.slot(k, c)];
                    let ic = self.slot(i, c);
                    self.data[ic] -= l * kc;
                }
            }
        }
        Ok(BandLu { lu: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.lu.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.lu;
        let n = m.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + m.kl).min(n - 1) {
                    b[i] -= m.data[m.slot(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + m.kl + m.ku).min(n - 1) {
                s -= m.data[m.slot(k, c)] * b[c];
            }
            b[k] = s / m.data[m.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (40, 3, 5);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for c in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // Small diagonal forces row interchanges.
                let x = if i == c { 0.01 } else { rng.random_range(-1.0..1.0) };
                band.set(i, c, x);
                dense[(i, c)] = x;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expect = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let lu = band.clone().factor(1e-14).unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        for i in 0..n {
            assert!((x[i] - expect[i]).abs() < 1e-9, "{i}: {} vs {}", x[i], expect[i]);
        }
        let r = band.mul_vec(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.set(0, 0, 1.0);
        band.set(0, 1, 1.0);
        band.set(1, 0, 1.0);
        band.set(1, 1, 1.0);
        band.set(2, 2, 1.0);
        assert!(matches!(band.factor(1e-12), Err(Error::Resonant { row: 1, .. })));
    }
}
