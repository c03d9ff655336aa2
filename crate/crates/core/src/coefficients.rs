//! Verblunsky coefficient sequences `k ↦ α_k` on the full integer line.
//!
//! A [`CoefficientSequence`] is built from a [`Generator`] (the serializable
//! description) and is immutable afterwards. Decoupling at a site sets
//! `α_n = 1` exactly; such sites are tracked explicitly so that an
//! intentional split can never be confused with bad input.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CmvError, Result};
use crate::C64;

/// A complex number as written in a config: either a bare real or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn to_c64(self) -> C64 {
        match self {
            ComplexValue::Real(re) => C64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        if z.im == 0.0 {
            ComplexValue::Real(z.re)
        } else {
            ComplexValue::Pair([z.re, z.im])
        }
    }
}

impl From<f64> for ComplexValue {
    fn from(x: f64) -> Self {
        ComplexValue::Real(x)
    }
}

/// Generator families for coefficient sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `α_k = 0` for all `k`.
    Free {},
    /// `α_k = value` for all `k`.
    Constant { value: ComplexValue },
    /// `α_site = value`, zero elsewhere.
    SingleBarrier { site: i64, value: ComplexValue },
    /// `α_k = e^{-rate |k|} · u_k · e^{2πi φ_k}` with `(u_k, φ_k)` uniform on
    /// `[0, 1)²`, drawn from ChaCha8 seeded with `seed`, visiting sites in the
    /// order `0, 1, -1, 2, -2, ...`.
    RandomDecay { seed: u64, rate: f64 },
    /// `α_k = period[k mod p]` (euclidean remainder).
    Periodic { period: Vec<ComplexValue> },
    /// `α_{start + i} = values[i]`, `default` everywhere else.
    Explicit {
        start: i64,
        values: Vec<ComplexValue>,
        #[serde(default = "zero_value")]
        default: ComplexValue,
    },
}

fn zero_value() -> ComplexValue {
    ComplexValue::Real(0.0)
}

/// Smallest decay rate accepted by `random_decay`; keeps the precomputed
/// table below ~150k entries.
pub const MIN_DECAY_RATE: f64 = 0.01;

// e^{-745} is below the smallest subnormal double.
const UNDERFLOW_EXPONENT: f64 = 745.0;

#[derive(Debug, Clone)]
enum Source {
    Constant(C64),
    Barrier {
        site: i64,
        value: C64,
    },
    /// `table[i]` holds the site `centered_index(i)`; zero beyond `reach`.
    Table {
        reach: i64,
        table: Arc<Vec<C64>>,
    },
    Periodic(Arc<Vec<C64>>),
    Explicit {
        start: i64,
        values: Arc<Vec<C64>>,
        default: C64,
    },
}

/// An immutable rule `k ↦ α_k`, optionally decoupled at a finite set of sites.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    generator: Generator,
    source: Source,
    decoupled: Vec<i64>,
}

fn check_disc(index: i64, a: C64) -> Result<C64> {
    let modulus = a.norm();
    if !modulus.is_finite() || modulus >= 1.0 {
        return Err(CmvError::CoefficientOutOfDisc { index, modulus });
    }
    Ok(a)
}

fn table_slot(k: i64) -> usize {
    // 0, 1, -1, 2, -2, ...
    if k > 0 {
        (2 * k - 1) as usize
    } else {
        (-2 * k) as usize
    }
}

impl CoefficientSequence {
    pub fn new(generator: Generator) -> Result<Self> {
        let source = match &generator {
            Generator::Free {} => Source::Constant(C64::new(0.0, 0.0)),
            Generator::Constant { value } => Source::Constant(check_disc(0, value.to_c64())?),
            Generator::SingleBarrier { site, value } => {
                Source::Barrier { site: *site, value: check_disc(*site, value.to_c64())? }
            }
            Generator::RandomDecay { seed, rate } => {
                if !rate.is_finite() || *rate < MIN_DECAY_RATE {
                    return Err(CmvError::InvalidParameter(format!(
                        "random_decay rate must be finite and >= {MIN_DECAY_RATE}, got {rate}"
                    )));
                }
                let reach = (UNDERFLOW_EXPONENT / rate).ceil() as i64;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut table = vec![C64::new(0.0, 0.0); (2 * reach + 1) as usize];
                for slot in 0..table.len() {
                    let k = if slot % 2 == 1 { (slot as i64 + 1) / 2 } else { -(slot as i64) / 2 };
                    let u: f64 = rng.random();
                    let phase: f64 = rng.random();
                    let envelope = (-rate * k.abs() as f64).exp();
                    table[slot] = C64::from_polar(envelope * u, 2.0 * PI * phase);
                }
                Source::Table { reach, table: Arc::new(table) }
            }
            Generator::Periodic { period } => {
                if period.is_empty() {
                    return Err(CmvError::InvalidParameter("periodic: empty period".into()));
                }
                let vals = period
                    .iter()
                    .enumerate()
                    .map(|(i, v)| check_disc(i as i64, v.to_c64()))
                    .collect::<Result<Vec<_>>>()?;
                Source::Periodic(Arc::new(vals))
            }
            Generator::Explicit { start, values, default } => {
                let vals = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| check_disc(start + i as i64, v.to_c64()))
                    .collect::<Result<Vec<_>>>()?;
                let default = default.to_c64();
                let modulus = default.norm();
                if !modulus.is_finite() || modulus >= 1.0 {
                    return Err(CmvError::InvalidParameter(format!(
                        "explicit: default value has modulus {modulus} (must be < 1)"
                    )));
                }
                Source::Explicit { start: *start, values: Arc::new(vals), default }
            }
        };
        Ok(Self { generator, source, decoupled: Vec::new() })
    }

    pub fn free() -> Self {
        Self::new(Generator::Free {}).expect("free sequence is valid")
    }

    pub fn constant(value: C64) -> Result<Self> {
        Self::new(Generator::Constant { value: value.into() })
    }

    pub fn single_barrier(site: i64, value: C64) -> Result<Self> {
        Self::new(Generator::SingleBarrier { site, value: value.into() })
    }

    pub fn random_decay(seed: u64, rate: f64) -> Result<Self> {
        Self::new(Generator::RandomDecay { seed, rate })
    }

    pub fn periodic(period: &[C64]) -> Result<Self> {
        Self::new(Generator::Periodic { period: period.iter().map(|&z| z.into()).collect() })
    }

    pub fn explicit(start: i64, values: &[C64], default: C64) -> Result<Self> {
        Self::new(Generator::Explicit {
            start,
            values: values.iter().map(|&z| z.into()).collect(),
            default: default.into(),
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// Coefficient before any decoupling is applied.
    fn base_alpha(&self, k: i64) -> C64 {
        match &self.source {
            Source::Constant(a) => *a,
            Source::Barrier { site, value } => {
                if k == *site {
                    *value
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Source::Table { reach, table } => {
                if k.abs() > *reach {
                    C64::new(0.0, 0.0)
                } else {
                    table[table_slot(k)]
                }
            }
            Source::Periodic(p) => p[k.rem_euclid(p.len() as i64) as usize],
            Source::Explicit { start, values, default } => {
                let off = k - start;
                if off >= 0 && (off as usize) < values.len() {
                    values[off as usize]
                } else {
                    *default
                }
            }
        }
    }

    /// `α_k`; exactly `1` at decoupled sites.
    #[inline]
    pub fn alpha_at(&self, k: i64) -> C64 {
        if self.is_decoupled_at(k) {
            C64::new(1.0, 0.0)
        } else {
            self.base_alpha(k)
        }
    }

    /// `ρ_k = sqrt(1 - |α_k|²)`; exactly `0` at decoupled sites.
    #[inline]
    pub fn rho_at(&self, k: i64) -> f64 {
        if self.is_decoupled_at(k) {
            0.0
        } else {
            let m = self.base_alpha(k).norm();
            ((1.0 - m) * (1.0 + m)).sqrt()
        }
    }

    #[inline]
    pub fn is_decoupled_at(&self, k: i64) -> bool {
        self.decoupled.contains(&k)
    }

    pub fn decoupled_sites(&self) -> &[i64] {
        &self.decoupled
    }

    pub fn is_decoupled(&self) -> bool {
        !self.decoupled.is_empty()
    }

    /// Same sequence with `α_n := 1`. The result is only meant as input to
    /// operator construction.
    pub fn decouple(&self, n: i64) -> Self {
        let mut out = self.clone();
        if !out.decoupled.contains(&n) {
            out.decoupled.push(n);
            out.decoupled.sort_unstable();
        }
        out
    }

    /// Same coefficients with every decoupling removed.
    pub fn coupled(&self) -> Self {
        Self { decoupled: Vec::new(), ..self.clone() }
    }
}
