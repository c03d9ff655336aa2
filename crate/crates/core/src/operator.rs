//! The five-diagonal full-line CMV matrix, its edge-decoupled finite
//! sections, and the finite-rank defect `C - C_n`.
//!
//! Entry table (rows `k`, absolute site labels):
//!
//! ```text
//! k odd : (k,k-1) = -α_{k+1} ρ_k      (k,k)   = -conj(α_k) α_{k+1}
//!         (k,k+1) = -α_{k+2} ρ_{k+1}  (k,k+2) =  ρ_{k+1} ρ_{k+2}
//! k even: (k,k-2) =  ρ_{k-1} ρ_k      (k,k-1) =  conj(α_{k-1}) ρ_k
//!         (k,k)   = -conj(α_k) α_{k+1} (k,k+1) =  conj(α_k) ρ_{k+1}
//! ```
//!
//! With `α_n = 1` every entry carrying `ρ_n` vanishes and the matrix splits
//! into a block on `(-∞, n-1]` and a block on `[n, ∞)`.

use std::collections::BTreeMap;
use std::io::Write;

use crate::coefficients::CoefficientSequence;
use crate::error::{CmvError, Result};
use crate::C64;

/// Minimum `b - a` for a window.
pub const MIN_WINDOW_SPAN: i64 = 8;

/// Finite section `[a, b]` of the integer line. Site labels are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Window {
    a: i64,
    b: i64,
}

impl Window {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if b - a < MIN_WINDOW_SPAN {
            return Err(CmvError::WindowTooShort { a, b, min: MIN_WINDOW_SPAN });
        }
        Ok(Self { a, b })
    }

    /// `[center - half, center + half]`.
    pub fn centered(center: i64, half: i64) -> Result<Self> {
        Self::new(center - half, center + half)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn len(&self) -> usize {
        (self.b - self.a + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i64) -> bool {
        self.a <= k && k <= self.b
    }

    /// Parity of the left endpoint (`true` when even).
    pub fn left_parity_even(&self) -> bool {
        self.a.rem_euclid(2) == 0
    }

    pub fn right_parity_even(&self) -> bool {
        self.b.rem_euclid(2) == 0
    }

    /// Same center, twice the length.
    pub fn doubled(&self) -> Self {
        let grow = (self.b - self.a + 1) / 2;
        Self { a: self.a - grow, b: self.b + grow }
    }

    pub fn index_of(&self, k: i64) -> Result<usize> {
        if !self.contains(k) {
            return Err(CmvError::OutsideWindow { site: k, a: self.a, b: self.b });
        }
        Ok((k - self.a) as usize)
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        self.a..=self.b
    }
}

/// `⟨δ_i, C δ_j⟩` for the operator built from `seq`.
pub fn entry(seq: &CoefficientSequence, i: i64, j: i64) -> C64 {
    entry_with(|k| seq.alpha_at(k), |k| seq.rho_at(k), i, j)
}

/// The entry table over arbitrary coefficient accessors.
#[inline]
fn entry_with(alpha: impl Fn(i64) -> C64, rho: impl Fn(i64) -> f64, i: i64, j: i64) -> C64 {
    let k = i;
    let zero = C64::new(0.0, 0.0);
    if k.rem_euclid(2) == 1 {
        match j - k {
            -1 => -alpha(k + 1) * rho(k),
            0 => -alpha(k).conj() * alpha(k + 1),
            1 => -alpha(k + 2) * rho(k + 1),
            2 => C64::new(rho(k + 1) * rho(k + 2), 0.0),
            _ => zero,
        }
    } else {
        match j - k {
            -2 => C64::new(rho(k - 1) * rho(k), 0.0),
            -1 => alpha(k - 1).conj() * rho(k),
            0 => -alpha(k).conj() * alpha(k + 1),
            1 => alpha(k).conj() * rho(k + 1),
            _ => zero,
        }
    }
}

/// Half bandwidth of the CMV matrix.
pub const HALF_BAND: usize = 2;
const BAND: usize = 2 * HALF_BAND + 1;

/// Unitary finite section stored as five diagonals.
///
/// Row `r = i - a` holds columns `i-2 ..= i+2` at offsets `0..5`.
#[derive(Debug, Clone)]
pub struct BandedUnitary {
    window: Window,
    band: Vec<[C64; BAND]>,
    decoupled: Vec<i64>,
}

/// Edge-decoupled section of the operator on `window`: `α_a := 1` and
/// `α_{b+1} := 1` are applied on top of whatever decoupling `seq` carries,
/// so the block is an exact direct summand of a unitary.
pub fn truncate(seq: &CoefficientSequence, window: Window) -> BandedUnitary {
    let edged = seq.decouple(window.a).decouple(window.b + 1);
    // coefficients on [a-1, b+2] cover every entry inside the window
    let lo = window.a - 1;
    let span = window.len() + 3;
    let alphas: Vec<C64> = (0..span as i64).map(|o| edged.alpha_at(lo + o)).collect();
    let rhos: Vec<f64> = (0..span as i64).map(|o| edged.rho_at(lo + o)).collect();
    let alpha = |k: i64| alphas[(k - lo) as usize];
    let rho = |k: i64| rhos[(k - lo) as usize];
    let n = window.len();
    let mut band = vec![[C64::new(0.0, 0.0); BAND]; n];
    for (r, i) in window.sites().enumerate() {
        for (d, slot) in band[r].iter_mut().enumerate() {
            let j = i + d as i64 - HALF_BAND as i64;
            if window.contains(j) {
                *slot = entry_with(alpha, rho, i, j);
            }
        }
    }
    BandedUnitary { window, band, decoupled: edged.decoupled_sites().to_vec() }
}

impl BandedUnitary {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.band.len()
    }

    /// All decoupling sites applied, including the two edge cuts.
    pub fn decoupling_sites(&self) -> &[i64] {
        &self.decoupled
    }

    pub fn get(&self, i: i64, j: i64) -> C64 {
        if !self.window.contains(i) || !self.window.contains(j) || (i - j).abs() > HALF_BAND as i64 {
            return C64::new(0.0, 0.0);
        }
        self.band[(i - self.window.a) as usize][(j - i + HALF_BAND as i64) as usize]
    }

    /// Raw band row for local row index `r`.
    pub(crate) fn band_row(&self, r: usize) -> &[C64; BAND] {
        &self.band[r]
    }

    /// `U x` with `x` indexed locally.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = vec![C64::new(0.0, 0.0); n];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for r in 0..n {
            let row = &self.band[r];
            let mut acc = C64::new(0.0, 0.0);
            for (d, &u) in row.iter().enumerate() {
                let c = r as i64 + d as i64 - HALF_BAND as i64;
                if c >= 0 && (c as usize) < n {
                    acc += u * x[c as usize];
                }
            }
            y[r] = acc;
        }
    }

    /// `U* x` with `x` indexed locally.
    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = vec![C64::new(0.0, 0.0); n];
        self.apply_adjoint_into(x, &mut y);
        y
    }

    pub fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for r in 0..n {
            let row = &self.band[r];
            let xr = x[r];
            for (d, &u) in row.iter().enumerate() {
                let c = r as i64 + d as i64 - HALF_BAND as i64;
                if c >= 0 && (c as usize) < n {
                    y[c as usize] += u.conj() * xr;
                }
            }
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let n = self.dim();
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        for r in 0..n {
            for (d, &u) in self.band[r].iter().enumerate() {
                let c = r as i64 + d as i64 - HALF_BAND as i64;
                if c >= 0 && (c as usize) < n {
                    m[r][c as usize] = u;
                }
            }
        }
        m
    }

    /// `‖U*U - I‖∞` (max entry modulus), computed in the band.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim() as i64;
        let a = self.window.a;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in (p - 4).max(0)..=(p + 4).min(n - 1) {
                let mut acc = C64::new(0.0, 0.0);
                for r in (p.max(q) - 2).max(0)..=(p.min(q) + 2).min(n - 1) {
                    acc += self.get(a + r, a + p).conj() * self.get(a + r, a + q);
                }
                if p == q {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Debug dump: one `i,j,re,im` line per stored nonzero entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,re,im")?;
        for (r, i) in self.window.sites().enumerate() {
            for (d, u) in self.band[r].iter().enumerate() {
                let j = i + d as i64 - HALF_BAND as i64;
                if u.norm() != 0.0 {
                    writeln!(w, "{i},{j},{:.17e},{:.17e}", u.re, u.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Sparse `C - C_n`, keyed by column (domain site).
#[derive(Debug, Clone)]
pub struct DefectOperator {
    n: i64,
    columns: BTreeMap<i64, Vec<(i64, C64)>>,
}

/// `C - C_n` computed entrywise from the two entry tables.
pub fn defect(seq: &CoefficientSequence, n: i64) -> DefectOperator {
    let coupled = seq.clone();
    let split = seq.decouple(n);
    let mut columns: BTreeMap<i64, Vec<(i64, C64)>> = BTreeMap::new();
    for j in (n - 4)..=(n + 4) {
        for i in (j - 2)..=(j + 2) {
            let d = entry(&coupled, i, j) - entry(&split, i, j);
            if d.norm() != 0.0 {
                columns.entry(j).or_default().push((i, d));
            }
        }
    }
    DefectOperator { n, columns }
}

impl DefectOperator {
    pub fn site(&self) -> i64 {
        self.n
    }

    /// `(C - C_n) δ_j` as `(row, value)` pairs.
    pub fn column(&self, j: i64) -> &[(i64, C64)] {
        self.columns.get(&j).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `(C - C_n)* δ_q` as `(site, value)` pairs.
    pub fn adjoint_column(&self, q: i64) -> Vec<(i64, C64)> {
        self.columns
            .iter()
            .filter_map(|(&j, col)| col.iter().find(|(i, _)| *i == q).map(|(_, v)| (j, v.conj())))
            .collect()
    }

    /// `⟨δ_i, (C - C_n) δ_j⟩`.
    pub fn get(&self, i: i64, j: i64) -> C64 {
        self.column(j).iter().find(|(r, _)| *r == i).map(|(_, v)| *v).unwrap_or_default()
    }

    /// Sites `j` with a nonzero column.
    pub fn domain_sites(&self) -> Vec<i64> {
        self.columns.keys().copied().collect()
    }

    /// Sites `i` that appear in some column.
    pub fn range_sites(&self) -> Vec<i64> {
        let mut rows: Vec<i64> = self.columns.values().flat_map(|c| c.iter().map(|(i, _)| *i)).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    /// Numerical rank of the defect block.
    pub fn rank(&self) -> usize {
        let rows = self.range_sites();
        let cols = self.domain_sites();
        let mut m: Vec<Vec<C64>> = rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect();
        let scale = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0;
        }
        let mut rank = 0;
        let ncols = cols.len();
        for c in 0..ncols {
            let pivot = (rank..m.len()).max_by(|&p, &q| m[p][c].norm().total_cmp(&m[q][c].norm()));
            let Some(p) = pivot else { break };
            if m[p][c].norm() <= 1e-12 * scale {
                continue;
            }
            m.swap(rank, p);
            for r in (rank + 1)..m.len() {
                let f = m[r][c] / m[rank][c];
                for cc in c..ncols {
                    let v = m[rank][cc];
                    m[r][cc] -= f * v;
                }
            }
            rank += 1;
        }
        rank
    }
}
