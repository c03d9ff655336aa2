//! Discrete-time evolution `U^m ψ` on truncations and a wave-packet probe of
//! dynamical reflection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSequence;
use crate::error::{CmvError, Result};
use crate::operator::{truncate, BandedUnitary, Window};
use crate::C64;

/// Mass allowed within band distance of a window edge.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;
/// Mass allowed near the edges of an initial state.
pub const INITIAL_TAIL_LIMIT: f64 = 1e-10;
/// Sites counted as "at the edge" on each side.
pub const EDGE_ZONE: usize = 3;

/// Gaussian packet on even sites,
/// `ψ_k ∝ exp(-(k - center)² / (4 width²)) e^{-i θ₀ k / 2}`.
///
/// Even sites move right under the free evolution, so the packet is
/// incoming from the left when placed left of the cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacket {
    pub center: i64,
    pub width: f64,
    pub theta0: f64,
}

impl WavePacket {
    pub fn new(center: i64, width: f64, theta0: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(CmvError::InvalidParameter(format!("packet width must be positive, got {width}")));
        }
        Ok(Self { center, width, theta0 })
    }

    /// Normalized state vector on `window`.
    pub fn state(&self, window: Window) -> Result<Vec<C64>> {
        let mut psi: Vec<C64> = window
            .sites()
            .map(|k| {
                if k.rem_euclid(2) != 0 {
                    return C64::new(0.0, 0.0);
                }
                let d = (k - self.center) as f64;
                let amp = (-d * d / (4.0 * self.width * self.width)).exp();
                C64::from_polar(amp, -self.theta0 * k as f64 / 2.0)
            })
            .collect();
        let norm = norm(&psi);
        if norm == 0.0 {
            return Err(CmvError::InvalidParameter("packet has no mass inside the window".into()));
        }
        psi.iter_mut().for_each(|v| *v /= norm);
        let tail = edge_mass(&psi);
        if tail > INITIAL_TAIL_LIMIT {
            return Err(CmvError::InvalidParameter(format!("packet tail at the window edge is {tail:e}")));
        }
        Ok(psi)
    }
}

pub fn norm(psi: &[C64]) -> f64 {
    psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Mass within [`EDGE_ZONE`] sites of either end.
pub fn edge_mass(psi: &[C64]) -> f64 {
    let n = psi.len();
    let z = EDGE_ZONE.min(n / 2);
    psi[..z].iter().chain(&psi[n - z..]).map(|v| v.norm_sqr()).sum()
}

/// `U^m ψ` (`U^*` for negative `m`), stopping with `EdgeContact` once the
/// edge mass exceeds [`EDGE_MASS_LIMIT`].
pub fn evolve(u: &BandedUnitary, psi: &[C64], m: i64) -> Result<Vec<C64>> {
    if psi.len() != u.dim() {
        return Err(CmvError::InvalidParameter(format!("state length {} vs dimension {}", psi.len(), u.dim())));
    }
    let tail = edge_mass(psi);
    if tail > INITIAL_TAIL_LIMIT {
        return Err(CmvError::EdgeContact { step: 0, mass: tail });
    }
    let mut cur = psi.to_vec();
    let mut next = vec![C64::new(0.0, 0.0); psi.len()];
    for step in 1..=m.abs() {
        if m > 0 {
            u.apply_into(&cur, &mut next);
        } else {
            u.apply_adjoint_into(&cur, &mut next);
        }
        std::mem::swap(&mut cur, &mut next);
        let e = edge_mass(&cur);
        if e > EDGE_MASS_LIMIT {
            return Err(CmvError::EdgeContact { step: step * m.signum(), mass: e });
        }
    }
    Ok(cur)
}

/// Masses at one step of a probe run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeStep {
    pub step: i64,
    pub left_mass: f64,
    pub right_mass: f64,
    pub escaped: f64,
}

impl ProbeStep {
    pub const CSV_HEADER: [&'static str; 4] = ["step", "left_mass", "right_mass", "escaped"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            format!("{:e}", self.left_mass),
            format!("{:e}", self.right_mass),
            format!("{:e}", self.escaped),
        ]
    }
}

/// Outcome of [`reflection_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub left_mass: f64,
    pub right_mass: f64,
    pub escaped: f64,
    /// Last step evolved.
    pub steps: i64,
    /// The run stopped before the horizon because mass reached an edge.
    pub edge_contact: bool,
    pub series: Vec<ProbeStep>,
}

/// Splits `ψ` into mass left of the cut (`k ≤ n - 1`), right of it
/// (`k ≥ n`) and near the window edges.
pub fn mass_split(window: Window, n: i64, psi: &[C64]) -> ProbeStep {
    let len = psi.len();
    let z = EDGE_ZONE.min(len / 2);
    let (mut l, mut r, mut e) = (0.0, 0.0, 0.0);
    for (i, (k, v)) in window.sites().zip(psi).enumerate() {
        let w = v.norm_sqr();
        if i < z || i >= len - z {
            e += w;
        } else if k < n {
            l += w;
        } else {
            r += w;
        }
    }
    ProbeStep { step: 0, left_mass: l, right_mass: r, escaped: e }
}

/// Launches `packet` (left of `n`) under `seq` and reports the left/right
/// mass split after `horizon` steps or at first edge contact, whichever
/// comes first. `record_every` controls the stored time series
/// (0 keeps only the final step).
pub fn reflection_probe(
    seq: &CoefficientSequence,
    n: i64,
    packet: &WavePacket,
    horizon: i64,
    window: Window,
    record_every: i64,
) -> Result<ProbeResult> {
    if horizon < 0 {
        return Err(CmvError::InvalidParameter(format!("horizon must be non-negative, got {horizon}")));
    }
    if !window.contains(n) {
        return Err(CmvError::OutsideWindow { site: n, a: window.a(), b: window.b() });
    }
    let u = truncate(seq, window);
    let mut psi = packet.state(window)?;
    let initial = mass_split(window, n, &psi);
    if initial.right_mass >= 1e-6 {
        return Err(CmvError::NotLeftConcentrated { mass: initial.right_mass });
    }
    let mut series = vec![initial];
    let mut next = vec![C64::new(0.0, 0.0); psi.len()];
    let mut last = initial;
    let mut contact = false;
    for step in 1..=horizon {
        u.apply_into(&psi, &mut next);
        let split = ProbeStep { step, ..mass_split(window, n, &next) };
        if split.escaped > EDGE_MASS_LIMIT {
            contact = true;
            break;
        }
        std::mem::swap(&mut psi, &mut next);
        last = split;
        if record_every > 0 && step % record_every == 0 {
            series.push(split);
        }
    }
    if series.last().map(|s| s.step) != Some(last.step) {
        series.push(last);
    }
    Ok(ProbeResult {
        left_mass: last.left_mass,
        right_mass: last.right_mass,
        escaped: last.escaped,
        steps: last.step,
        edge_contact: contact,
        series,
    })
}

/// First step at which the mass right of `n` exceeds one half.
pub fn crossing_time(
    seq: &CoefficientSequence,
    n: i64,
    packet: &WavePacket,
    window: Window,
    horizon: i64,
) -> Result<Option<i64>> {
    let r = reflection_probe(seq, n, packet, horizon, window, 1)?;
    Ok(r.series.iter().find(|s| s.right_mass > 0.5).map(|s| s.step))
}

/// Writes a probe time series as CSV.
pub fn write_series_csv<W: Write>(series: &[ProbeStep], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CmvError::Io(e.to_string());
    wr.write_record(ProbeStep::CSV_HEADER).map_err(io)?;
    for s in series {
        wr.write_record(s.csv_record()).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_is_normalized_on_even_sites() {
        let w = Window::new(-300, 300).unwrap();
        let p = WavePacket::new(-100, 10.0, 0.4).unwrap();
        let psi = p.state(w).unwrap();
        assert!((norm(&psi) - 1.0).abs() < 1e-12);
        for (k, v) in w.sites().zip(&psi) {
            if k % 2 != 0 {
                assert_eq!(*v, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn packet_near_edge_rejected() {
        let w = Window::new(-100, 100).unwrap();
        assert!(WavePacket::new(-95, 10.0, 0.0).unwrap().state(w).is_err());
    }

    #[test]
    fn evolve_round_trip() {
        let seq = CoefficientSequence::random_decay(3, 0.2).unwrap();
        let w = Window::new(-400, 400).unwrap();
        let u = truncate(&seq, w);
        let psi = WavePacket::new(0, 12.0, 1.0).unwrap().state(w).unwrap();
        let fwd = evolve(&u, &psi, 60).unwrap();
        assert!((norm(&fwd) - 1.0).abs() < 1e-12);
        let back = evolve(&u, &fwd, -60).unwrap();
        let err = back.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn free_evolution_hits_edge() {
        let seq = CoefficientSequence::free();
        let w = Window::new(-200, 200).unwrap();
        let u = truncate(&seq, w);
        let psi = WavePacket::new(0, 8.0, 0.0).unwrap().state(w).unwrap();
        assert!(matches!(evolve(&u, &psi, 500), Err(CmvError::EdgeContact { .. })));
    }

    #[test]
    fn mass_partition_sums_to_one() {
        let seq = CoefficientSequence::single_barrier(0, C64::new(0.9, 0.0)).unwrap();
        let w = Window::new(-600, 600).unwrap();
        let p = WavePacket::new(-150, 20.0, std::f64::consts::FRAC_PI_2).unwrap();
        let r = reflection_probe(&seq, 0, &p, 200, w, 10).unwrap();
        for s in &r.series {
            assert!((s.left_mass + s.right_mass + s.escaped - 1.0).abs() < 1e-10);
        }
        assert!(!r.edge_contact);
    }
}
