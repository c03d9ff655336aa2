//! LU factorization with partial pivoting for complex five-diagonal
//! matrices (two sub- and two super-diagonals).
//!
//! Storage follows the LAPACK `gbtrf` layout column by column: entry
//! `(i, j)` lives at `ab[j][KV + i - j]` with `KV = KL + KU`. The extra `KL`
//! slots above the band hold fill-in created by row interchanges.

use crate::error::{CmvError, Result};
use crate::C64;

/// Sub- and super-diagonal count.
pub const KL: usize = 2;
pub const KU: usize = 2;
const KV: usize = KL + KU;
const LDAB: usize = 2 * KL + KU + 1;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Assembles a five-diagonal matrix before factorization.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    ab: Vec<[C64; LDAB]>,
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    ab: Vec<[C64; LDAB]>,
    inv_diag: Vec<C64>,
    ipiv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { ab: vec![[ZERO; LDAB]; n] }
    }

    pub fn dim(&self) -> usize {
        self.ab.len()
    }

    /// Sets entry `(i, j)`; panics outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(j <= i + KU && i <= j + KL, "({i}, {j}) outside band");
        self.ab[j][KV + i - j] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j > i + KU || i > j + KL || i >= self.dim() || j >= self.dim() {
            return ZERO;
        }
        self.ab[j][KV + i - j]
    }

    /// `A x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = vec![ZERO; n];
        for j in 0..n {
            for i in j.saturating_sub(KU)..=(j + KL).min(n - 1) {
                y[i] += self.ab[j][KV + i - j] * x[j];
            }
        }
        y
    }

    /// LU with partial pivoting (`zgbtf2` algorithm).
    pub fn factor(self) -> Result<BandedLu> {
        let mut ab = self.ab;
        let n = ab.len();
        let mut ipiv = vec![0usize; n];
        let mut inv_diag = vec![ZERO; n];
        let mut ju = 0usize;
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            let km = KL.min(n - 1 - j);
            let mut jp = 0;
            let mut best = ab[j][KV].norm_sqr();
            for r in 1..=km {
                let v = ab[j][KV + r].norm_sqr();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            let best = best.sqrt();
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(CmvError::NearSpectrum { detail: format!("zero pivot in column {j}") });
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            ju = ju.max((j + jp + KU).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let col = &mut ab[c];
                    col.swap(KV + j + jp - c, KV + j - c);
                }
            }
            let inv = ab[j][KV].inv();
            inv_diag[j] = inv;
            let mut l = [ZERO; KL];
            for r in 1..=km {
                ab[j][KV + r] *= inv;
            }
            l[..km].copy_from_slice(&ab[j][KV + 1..=KV + km]);
            for c in (j + 1)..=ju {
                let col = &mut ab[c];
                let top = col[KV + j - c];
                if top == ZERO {
                    continue;
                }
                for r in 1..=km {
                    col[KV + j + r - c] -= l[r - 1] * top;
                }
            }
        }
        Ok(BandedLu { ab, inv_diag, ipiv, min_pivot, max_pivot })
    }
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.ab.len()
    }

    /// Ratio of smallest to largest pivot modulus, a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let km = KL.min(n - 1 - j);
            let col = &self.ab[j];
            for r in 1..=km {
                b[j + r] -= col[KV + r] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] *= self.inv_diag[j];
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let col = &self.ab[j];
            for i in j.saturating_sub(KV)..j {
                b[i] -= col[KV + i - j] * bj;
            }
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
