//! Transfer matrices, the M / M̂ Möbius transforms of half-line m-functions,
//! Weyl solutions and the Green's function assembled from them.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSequence;
use crate::error::{CmvError, Result};
use crate::operator::Window;
use crate::resolvent::{m_function, Side, SolveOptions};
use crate::C64;

const MOEBIUS_EPS: f64 = 1e-12;
const OVERFLOW: f64 = 1e150;

/// A 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix(pub [[C64; 2]; 2]);

impl TransferMatrix {
    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, x: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return Err(CmvError::Singular);
        }
        let m = &self.0;
        Ok(Self([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }
}

/// `T(z, k)`: `(1/ρ_k)[[α_k, z], [1/z, ᾱ_k]]` for odd `k`,
/// `(1/ρ_k)[[ᾱ_k, 1], [1, α_k]]` for even `k`.
pub fn transfer(seq: &CoefficientSequence, z: C64, k: i64) -> Result<TransferMatrix> {
    let a = seq.alpha_at(k);
    let r = seq.rho_at(k);
    if r == 0.0 {
        return Err(CmvError::TransferUndefined { site: k, detail: "decoupled site (rho = 0)".into() });
    }
    let one = C64::new(1.0, 0.0);
    let m = if k.rem_euclid(2) == 1 {
        if z.norm() == 0.0 {
            return Err(CmvError::TransferUndefined { site: k, detail: "z = 0 at an odd site".into() });
        }
        [[a, z], [z.inv(), a.conj()]]
    } else {
        [[a.conj(), one], [one, a]]
    };
    let s = 1.0 / r;
    Ok(TransferMatrix([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]))
}

fn guarded_quotient(num: C64, den: C64) -> Result<C64> {
    if den.norm() < MOEBIUS_EPS {
        return Err(CmvError::MoebiusPole { modulus: den.norm() });
    }
    Ok(num / den)
}

/// `M^{(l)}_n` from `α_n` and `m^{(l)}_{n-1}`.
pub fn m_cap_left(alpha_n: C64, m_l: C64) -> Result<C64> {
    let i = C64::i();
    let p = C64::new(1.0, 0.0) + alpha_n;
    let q = C64::new(1.0, 0.0) - alpha_n;
    guarded_quotient(p.re + i * q.im * m_l, i * p.im + q.re * m_l)
}

/// `M̂^{(r)}_n` from `α_{n+1}` and `m^{(r)}_{n+1}`.
pub fn mhat_cap_right(alpha_next: C64, m_r: C64) -> Result<C64> {
    let i = C64::i();
    let p = C64::new(1.0, 0.0) + alpha_next;
    let q = C64::new(1.0, 0.0) - alpha_next;
    guarded_quotient(p.re - i * p.im * m_r, -i * q.im + q.re * m_r)
}

/// `M^{(side)}_n(z)`.
pub fn m_cap(seq: &CoefficientSequence, side: Side, n: i64, z: C64, opts: &SolveOptions) -> Result<C64> {
    match side {
        Side::Right => m_function(seq, Side::Right, n, z, opts),
        Side::Left => m_cap_left(seq.alpha_at(n), m_function(seq, Side::Left, n - 1, z, opts)?),
    }
}

/// `M̂^{(side)}_n(z)`.
pub fn mhat_cap(seq: &CoefficientSequence, side: Side, n: i64, z: C64, opts: &SolveOptions) -> Result<C64> {
    match side {
        Side::Left => m_function(seq, Side::Left, n, z, opts),
        Side::Right => mhat_cap_right(seq.alpha_at(n + 1), m_function(seq, Side::Right, n + 1, z, opts)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Hat,
}

/// Initial vector `(u_n, v_n)` for a given M (or M̂) value.
pub fn weyl_seed(variant: Variant, n: i64, z: C64, m: C64) -> [C64; 2] {
    let one = C64::new(1.0, 0.0);
    let even = n.rem_euclid(2) == 0;
    match (variant, even) {
        (Variant::Plain, true) => [m - one, one + m],
        (Variant::Plain, false) => [z + z * m, m - one],
        (Variant::Hat, true) => [z - z * m, one + m],
        (Variant::Hat, false) => [one + m, one - m],
    }
}

/// Pair `(u, v)` over a site range, solving
/// `(u_k, v_k) = T(z, k)(u_{k-1}, v_{k-1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylPair {
    pub range: Window,
    pub n: i64,
    pub side: Side,
    pub variant: Variant,
    pub z: C64,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl WeylPair {
    pub fn u_at(&self, k: i64) -> Result<C64> {
        Ok(self.u[self.range.index_of(k)?])
    }

    pub fn v_at(&self, k: i64) -> Result<C64> {
        Ok(self.v[self.range.index_of(k)?])
    }

    /// `max_k |(u_k, v_k) - T(z,k)(u_{k-1}, v_{k-1})|`, relative to the local size.
    pub fn recursion_residual(&self, seq: &CoefficientSequence) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in (self.range.a() + 1)..=self.range.b() {
            let i = self.range.index_of(k)?;
            let t = transfer(seq, self.z, k)?;
            let p = t.apply([self.u[i - 1], self.v[i - 1]]);
            let scale = self.u[i].norm().max(self.v[i].norm()).max(1.0);
            worst = worst.max((p[0] - self.u[i]).norm().max((p[1] - self.v[i]).norm()) / scale);
        }
        Ok(worst)
    }

    /// `Σ |u_k|² + |v_k|²` over sites `≥ from` (or `≤ from` for side l).
    pub fn tail_mass(&self, from: i64) -> f64 {
        self.range
            .sites()
            .zip(self.u.iter().zip(&self.v))
            .filter(|(k, _)| match self.side {
                Side::Right => *k >= from,
                Side::Left => *k <= from,
            })
            .map(|(_, (u, v))| u.norm_sqr() + v.norm_sqr())
            .sum()
    }
}

/// Propagates `seed` placed at site `n` across `range` in both directions.
pub fn propagate(
    seq: &CoefficientSequence,
    n: i64,
    z: C64,
    range: Window,
    seed: [C64; 2],
) -> Result<(Vec<C64>, Vec<C64>)> {
    let idx = range.index_of(n)?;
    let len = range.len();
    let mut u = vec![C64::new(0.0, 0.0); len];
    let mut v = vec![C64::new(0.0, 0.0); len];
    u[idx] = seed[0];
    v[idx] = seed[1];
    let check = |x: [C64; 2], site: i64| -> Result<()> {
        if !(x[0].norm() < OVERFLOW && x[1].norm() < OVERFLOW) {
            return Err(CmvError::PropagationOverflow { site });
        }
        Ok(())
    };
    let mut x = seed;
    for i in (idx + 1)..len {
        let k = range.a() + i as i64;
        x = transfer(seq, z, k)?.apply(x);
        check(x, k)?;
        u[i] = x[0];
        v[i] = x[1];
    }
    let mut x = seed;
    for i in (0..idx).rev() {
        let k = range.a() + i as i64;
        x = transfer(seq, z, k + 1)?.inverse()?.apply(x);
        check(x, k)?;
        u[i] = x[0];
        v[i] = x[1];
    }
    Ok((u, v))
}

/// Weyl solutions seeded at `n` from `M^{(side)}_n` (plain) or
/// `M̂^{(side)}_n` (hat).
///
/// The recursion is unstable into the decaying direction, so ranges should
/// stay within a few dozen sites of `n`.
pub fn weyl_solutions(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    z: C64,
    range: Window,
    variant: Variant,
    opts: &SolveOptions,
) -> Result<WeylPair> {
    let m = match variant {
        Variant::Plain => m_cap(seq, side, n, z, opts)?,
        Variant::Hat => mhat_cap(seq, side, n, z, opts)?,
    };
    let (u, v) = propagate(seq, n, z, range, weyl_seed(variant, n, z, m))?;
    Ok(WeylPair { range, n, side, variant, z, u, v })
}

/// `G_{k,k'}(z)` from Weyl solutions seeded at `k0`:
/// `(-1)^{k0+1} u^{(a)}_k v^{(b)}_{k'} / (z (u^{(r)}_{k0} v^{(l)}_{k0} - u^{(l)}_{k0} v^{(r)}_{k0}))`
/// with `(a, b) = (l, r)` for `k < k'` or `k = k'` odd and `(r, l)` otherwise.
pub fn green_weyl(
    seq: &CoefficientSequence,
    k: i64,
    kp: i64,
    z: C64,
    k0: i64,
    variant: Variant,
    opts: &SolveOptions,
) -> Result<C64> {
    let lo = k.min(kp).min(k0) - 4;
    let hi = (k.max(kp).max(k0) + 4).max(lo + crate::operator::MIN_WINDOW_SPAN);
    let range = Window::new(lo, hi)?;
    let left = weyl_solutions(seq, Side::Left, k0, z, range, variant, opts)?;
    let right = weyl_solutions(seq, Side::Right, k0, z, range, variant, opts)?;
    let w = z * (right.u_at(k0)? * left.v_at(k0)? - left.u_at(k0)? * right.v_at(k0)?);
    if w.norm() < 1e-12 {
        return Err(CmvError::WronskianDegenerate { modulus: w.norm() });
    }
    let num = if k < kp || (k == kp && k.rem_euclid(2) == 1) {
        left.u_at(k)? * right.v_at(kp)?
    } else {
        right.u_at(k)? * left.v_at(kp)?
    };
    let sign = if (k0 + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(num / w * sign)
}
