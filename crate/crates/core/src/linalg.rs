//! Banded direct solver (LU with partial pivoting, LAPACK band layout).
//!
//! The discretized operators here are banded: the 1D plate operator has
//! bandwidth 2, the 2D elliptic operator bandwidth n_eta - 1. Grids stay at
//! desk scale (<= ~10^5 unknowns), so an unblocked band factorization is
//! robust and fast enough.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
///
/// Storage follows the LAPACK `gbtrf` convention with `kl` extra fill-in
/// rows: entry (i, j) lives at `ab[j * ldab + kl + ku + i - j]`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ab: vec![0.0; ldab * n] }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        // storage admits kl + ku superdiagonals: the extra kl rows hold the
        // fill-in produced by pivoting during factorization
        debug_assert!(
            i + self.ku + self.kl >= j && j + self.kl >= i,
            "({i},{j}) outside band storage"
        );
        j * self.ldab() + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            0.0
        } else {
            self.ab[self.slot(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, val: f64) {
        let s = self.slot(i, j);
        self.ab[s] = val;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, val: f64) {
        let s = self.slot(i, j);
        self.ab[s] += val;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Banded matrix product; the result has bandwidths kl1+kl2, ku1+ku2.
    pub fn matmul(&self, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.n, other.n);
        let kl = self.kl + other.kl;
        let ku = self.ku + other.ku;
        let mut out = BandedMatrix::new(self.n, kl, ku);
        for i in 0..self.n {
            let klo = i.saturating_sub(self.kl);
            let khi = (i + self.ku).min(self.n - 1);
            for k in klo..=khi {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let jlo = k.saturating_sub(other.kl);
                let jhi = (k + other.ku).min(self.n - 1);
                for j in jlo..=jhi {
                    let b = other.get(k, j);
                    if b != 0.0 {
                        out.add(i, j, aik * b);
                    }
                }
            }
        }
        out
    }

    /// out = alpha * self + beta * other (bands widened as needed).
    pub fn lin_comb(&self, alpha: f64, other: &BandedMatrix, beta: f64) -> BandedMatrix {
        assert_eq!(self.n, other.n);
        let kl = self.kl.max(other.kl);
        let ku = self.ku.max(other.ku);
        let mut out = BandedMatrix::new(self.n, kl, ku);
        for i in 0..self.n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(self.n - 1);
            for j in lo..=hi {
                let v = alpha * self.get(i, j) + beta * other.get(i, j);
                if v != 0.0 {
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Adds `alpha` to the diagonal, in place.
    pub fn shift_diagonal(&mut self, alpha: f64) {
        for i in 0..self.n {
            self.add(i, i, alpha);
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting (dgbtf2). Consumes the matrix;
    /// fill-in occupies the extra `kl` superdiagonal rows.
    pub fn factorize(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // superdiagonals in the factored form
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j
            let mut jp = 0;
            let mut pmax = self.ab[self.slot(j, j)].abs();
            for p in 1..=km {
                let v = self.ab[self.slot(j + p, j)].abs();
                if v > pmax {
                    pmax = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            let ju = (j + kv).min(n - 1);
            if pmax == 0.0 {
                return Err(Error::InternalConsistency(format!(
                    "zero pivot in banded LU at column {j}"
                )));
            }
            if jp != 0 {
                for jj in j..=ju {
                    let s1 = self.slot(j, jj);
                    let s2 = self.slot(j + jp, jj);
                    self.ab.swap(s1, s2);
                }
            }
            if km > 0 {
                let piv = self.ab[self.slot(j, j)];
                for p in 1..=km {
                    let s = self.slot(j + p, j);
                    self.ab[s] /= piv;
                }
                for jj in (j + 1)..=ju {
                    let t = self.ab[self.slot(j, jj)];
                    if t != 0.0 {
                        for p in 1..=km {
                            let m = self.ab[self.slot(j + p, j)];
                            let s = self.slot(j + p, jj);
                            self.ab[s] -= m * t;
                        }
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ab: self.ab, ipiv })
    }
}

/// Factored form produced by [`BandedMatrix::factorize`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        j * (2 * self.kl + self.ku + 1) + self.kl + self.ku + i - j
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kv = self.kl + self.ku;
        // P and L (unit lower, multipliers stored below the diagonal)
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=km {
                    b[j + i] -= self.ab[self.slot(j + i, j)] * bj;
                }
            }
        }
        // U (bandwidth kl + ku after fill-in)
        for j in (0..n).rev() {
            b[j] /= self.ab[self.slot(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.ab[self.slot(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
