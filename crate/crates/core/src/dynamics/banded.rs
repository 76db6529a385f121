//! Banded LU with partial pivoting for complex systems.
//!
//! Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl`
//! super-diagonals absorb fill-in from row interchanges.

use crate::fock::C64;

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            C64::new(0.0, 0.0)
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; the entry must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Factorises in place. A pivot below `rel_tol · max|A|` is reported as singular.
    pub fn factor(mut self, rel_tol: f64) -> Result<BandLu, Singular> {
        let n = self.n;
        let threshold = rel_tol * self.max_abs();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for r in k + 1..=last_row {
                let v = self.get(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > threshold) {
                return Err(Singular);
            }
            pivots[k] = p;
            let last_col = (k + self.kl + self.ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for r in k + 1..=last_row {
                let s = self.slot(r, k);
                let factor = self.data[s] / pivot;
                self.data[s] = factor;
                if factor == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let src = self.data[self.slot(k, j)];
                    let dst = self.slot(r, j);
                    self.data[dst] -= factor * src;
                }
            }
        }
        Ok(BandLu { a: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let a = &self.a;
        let n = a.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + a.kl).min(n - 1) {
                x[r] -= a.get(r, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + a.kl + a.ku).min(n - 1) {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_lu_on_random_band() {
        let (n, kl, ku) = (40, 5, 3);
        let mut seed = 0.37_f64;
        let mut rnd = || {
            seed = (seed * 7919.0 + 0.131).fract();
            seed - 0.5
        };
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = C64::new(rnd(), rnd());
                band.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<C64> = (0..n).map(|_| C64::new(rnd(), rnd())).collect();
        let x = band.factor(1e-14).unwrap().solve(&b);
        let xd = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).norm() < 1e-9 * (1.0 + xd[i].norm()), "row {i}");
        }
        let resid = &dense * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(resid.norm() < 1e-10);
    }

    #[test]
    fn detects_singular_matrix() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.set(0, 0, C64::new(1.0, 0.0));
        band.set(1, 0, C64::new(2.0, 0.0));
        assert_eq!(band.factor(1e-12).err(), Some(Singular));
    }
}
