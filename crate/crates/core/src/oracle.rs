//! Brute-force reference computations for tests and cross-checks: dense
//! inverses and a time-domain (Abel-summed) estimate of `s - 1`.

use nalgebra::DMatrix;

use crate::coefficients::CoefficientSequence;
use crate::dynamics::{edge_mass, EDGE_MASS_LIMIT};
use crate::error::{CmvError, Result};
use crate::operator::{defect, truncate, BandedUnitary, Window};
use crate::C64;

pub const MAX_ORACLE_DIM: usize = 512;

/// Dense square matrix indexed by the sites of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    window: Window,
    data: DMatrix<C64>,
}

impl DenseMatrix {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: i64, j: i64) -> Result<C64> {
        Ok(self.data[(self.window.index_of(i)?, self.window.index_of(j)?)])
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }
}

fn check_dim(window: Window) -> Result<()> {
    if window.len() > MAX_ORACLE_DIM {
        return Err(CmvError::OracleTooLarge { dim: window.len(), max: MAX_ORACLE_DIM });
    }
    Ok(())
}

fn to_dmatrix(u: &BandedUnitary) -> DMatrix<C64> {
    let dense = u.to_dense();
    let n = dense.len();
    DMatrix::from_fn(n, n, |i, j| dense[i][j])
}

/// The truncation as a dense matrix.
pub fn dense_unitary(seq: &CoefficientSequence, window: Window) -> Result<DenseMatrix> {
    check_dim(window)?;
    Ok(DenseMatrix { window, data: to_dmatrix(&truncate(seq, window)) })
}

/// `(U - z)^{-1}` by dense LU.
pub fn dense_green(seq: &CoefficientSequence, window: Window, z: C64) -> Result<DenseMatrix> {
    let mut a = dense_unitary(seq, window)?.data;
    for i in 0..a.nrows() {
        a[(i, i)] -= z;
    }
    let inv = a.lu().try_inverse().ok_or(CmvError::Singular)?;
    if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CmvError::Singular);
    }
    Ok(DenseMatrix { window, data: inv })
}

/// A pair of test states: one incoming from the left of the cut, one from
/// the right.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPackets {
    pub left: Vec<C64>,
    pub right: Vec<C64>,
}

fn gaussian_on(window: Window, center: i64, width: f64, parity: i64) -> Vec<C64> {
    let mut v: Vec<C64> = window
        .sites()
        .map(|k| {
            if k.rem_euclid(2) != parity {
                return C64::new(0.0, 0.0);
            }
            let d = (k - center) as f64;
            C64::new((-d * d / (4.0 * width * width)).exp(), 0.0)
        })
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

impl ChannelPackets {
    /// Gaussians at `n ∓ offset`: even sites on the left (moving right in a
    /// free region), odd sites on the right (moving left).
    pub fn standard(window: Window, n: i64, offset: i64, width: f64) -> Self {
        Self { left: gaussian_on(window, n - offset, width, 0), right: gaussian_on(window, n + offset, width, 1) }
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn guard(v: &[C64], step: i64) -> Result<()> {
    let e = edge_mass(v);
    if e > EDGE_MASS_LIMIT {
        return Err(CmvError::EdgeContact { step, mass: e });
    }
    Ok(())
}

/// Abel-summed time-domain estimate of `⟨f, (s - 1) g⟩`:
/// `-Σ_{k=-M}^{M-1} t^{|k|} ⟨(C - C_n) C_n^{-k-1} f, C^{-k} w⟩`
/// with `w = C^M C_n^{-M} g` standing in for the incoming wave operator.
pub fn finite_time_matrix_element(
    seq: &CoefficientSequence,
    n: i64,
    window: Window,
    m_max: i64,
    t: f64,
    f: &[C64],
    g: &[C64],
) -> Result<C64> {
    if !(0.0..1.0).contains(&t) {
        return Err(CmvError::InvalidParameter(format!("Abel parameter t must lie in [0, 1), got {t}")));
    }
    if m_max < 1 {
        return Err(CmvError::InvalidParameter(format!("m_max must be >= 1, got {m_max}")));
    }
    let u = truncate(seq, window);
    let un = truncate(&seq.decouple(n), window);
    if f.len() != u.dim() || g.len() != u.dim() {
        return Err(CmvError::InvalidParameter("state length does not match the window".into()));
    }
    let d = defect(seq, n);
    let apply_defect = |x: &[C64]| -> Result<Vec<(usize, C64)>> {
        let mut out: Vec<(usize, C64)> = Vec::new();
        for j in d.domain_sites() {
            let xj = x[window.index_of(j)?];
            for &(i, v) in d.column(j) {
                out.push((window.index_of(i)?, v * xj));
            }
        }
        Ok(out)
    };
    let sparse_inner = |da: &[(usize, C64)], b: &[C64]| -> C64 { da.iter().map(|(i, v)| v.conj() * b[*i]).sum() };

    let mut w = g.to_vec();
    for s in 0..m_max {
        w = un.apply_adjoint(&w);
        guard(&w, -s - 1)?;
    }
    for s in 0..m_max {
        w = u.apply(&w);
        guard(&w, s + 1)?;
    }

    let mut total = C64::new(0.0, 0.0);
    // k >= 0: a = (C_n^*)^{k+1} f, b = (C^*)^k w
    let mut a = un.apply_adjoint(f);
    let mut b = w.clone();
    for k in 0..m_max {
        guard(&a, k)?;
        guard(&b, k)?;
        let weight = t.powi(k as i32);
        if weight == 0.0 && k > 0 {
            break;
        }
        total += sparse_inner(&apply_defect(&a)?, &b) * weight;
        a = un.apply_adjoint(&a);
        b = u.apply_adjoint(&b);
    }
    // k = -j < 0: a = C_n^{j-1} f, b = C^j w
    let mut a = f.to_vec();
    let mut b = u.apply(&w);
    for j in 1..=m_max {
        let weight = t.powi(j as i32);
        if weight == 0.0 {
            break;
        }
        guard(&a, -j)?;
        guard(&b, -j)?;
        total += sparse_inner(&apply_defect(&a)?, &b) * weight;
        a = un.apply(&a);
        b = u.apply(&b);
    }
    Ok(-total)
}

/// `⟨f_i, (s - 1) f_j⟩` for `i, j ∈ {l, r}`.
pub fn finite_time_scattering(
    seq: &CoefficientSequence,
    n: i64,
    window: Window,
    m_max: i64,
    t: f64,
    packets: &ChannelPackets,
) -> Result<[[C64; 2]; 2]> {
    let states = [&packets.left, &packets.right];
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = finite_time_matrix_element(seq, n, window, m_max, t, states[i], states[j])?;
        }
    }
    Ok(out)
}

/// `⟨(C - C_n) C_n^{-1} f, w⟩` computed directly with dense matrices: the
/// single term left at `t = 0`.
pub fn single_defect_term(
    seq: &CoefficientSequence,
    n: i64,
    window: Window,
    m_max: i64,
    f: &[C64],
    g: &[C64],
) -> Result<C64> {
    let u = dense_unitary(seq, window)?.data;
    let un = dense_unitary(&seq.decouple(n), window)?.data;
    let col = |v: &[C64]| nalgebra::DVector::from_column_slice(v);
    let mut w = col(g);
    for _ in 0..m_max {
        w = un.adjoint() * w;
    }
    for _ in 0..m_max {
        w = &u * w;
    }
    let a = (&u - &un) * (un.adjoint() * col(f));
    Ok(-inner(a.as_slice(), w.as_slice()))
}
