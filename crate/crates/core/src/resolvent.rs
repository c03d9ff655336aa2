//! Green's functions, half-line m-functions, radial boundary values and
//! a.c. densities, all by banded solves on unitary truncations.
//!
//! Infinite-volume quantities are obtained from windows that grow until
//! a recomputation on the doubled window changes the result by no more
//! than [`SolveOptions::doubling_tol`] (relative, in max norm over the
//! bundle of quantities computed together). For `|z| = 1 - ε` the edge of
//! a window at distance `L` contributes roughly `e^{-εL}`, so the starting
//! half-width is at least `RETURN_FACTOR / ε`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::banded::{BandedLu, BandedMatrix};
use crate::coefficients::CoefficientSequence;
use crate::error::{CmvError, Result};
use crate::operator::{truncate, BandedUnitary, Window, HALF_BAND};
use crate::C64;

const RETURN_FACTOR: f64 = 16.0;

/// Half-line selector. `Left` carries the sign `-1`, `Right` carries `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// `∓_{l/r}`.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Smallest half-width tried.
    pub min_half_width: i64,
    /// Hard cap on the half-width.
    pub max_half_width: i64,
    /// Relative change tolerated between a window and its double.
    pub doubling_tol: f64,
    /// Accepted residual `‖(U - z)x - b‖∞ / max(1, ‖x‖∞)`.
    pub residual_tol: f64,
    /// Smallest accepted ratio of pivot moduli.
    pub min_pivot_ratio: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            min_half_width: 64,
            max_half_width: 1 << 21,
            doubling_tol: 1e-6,
            residual_tol: 1e-12,
            min_pivot_ratio: 1e-14,
        }
    }
}

fn check_off_circle(z: C64) -> Result<()> {
    if (z.norm() - 1.0).abs() < 1e-14 {
        return Err(CmvError::OnUnitCircle { z: format!("{z}") });
    }
    Ok(())
}

/// Factorization of `U - z` for one truncation.
#[derive(Debug, Clone)]
pub struct ShiftedResolvent {
    unitary: BandedUnitary,
    z: C64,
    lu: BandedLu,
    residual_tol: f64,
}

impl ShiftedResolvent {
    pub fn new(unitary: BandedUnitary, z: C64, opts: &SolveOptions) -> Result<Self> {
        check_off_circle(z)?;
        let n = unitary.dim();
        let mut m = BandedMatrix::zeros(n);
        for r in 0..n {
            let row = unitary.band_row(r);
            for (d, &u) in row.iter().enumerate() {
                let c = r as i64 + d as i64 - HALF_BAND as i64;
                if c >= 0 && (c as usize) < n {
                    let v = if c as usize == r { u - z } else { u };
                    m.set(r, c as usize, v);
                }
            }
        }
        let lu = m.factor()?;
        if lu.pivot_ratio() < opts.min_pivot_ratio {
            return Err(CmvError::NearSpectrum { detail: format!("pivot ratio {:e} at z = {z}", lu.pivot_ratio()) });
        }
        Ok(Self { unitary, z, lu, residual_tol: opts.residual_tol })
    }

    pub fn window(&self) -> Window {
        self.unitary.window()
    }

    pub fn unitary(&self) -> &BandedUnitary {
        &self.unitary
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    /// `(U - z)^{-1} b` over absolute-site sparse input, with residual check.
    pub fn solve_sparse(&self, rhs: &[(i64, C64)]) -> Result<Vec<C64>> {
        let w = self.window();
        let mut b = vec![C64::new(0.0, 0.0); w.len()];
        for &(site, v) in rhs {
            b[w.index_of(site)?] += v;
        }
        self.solve(&b)
    }

    /// `(U - z)^{-1} b` with `b` indexed locally.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let x = self.lu.solve(b);
        let residual = self.residual(&x, b);
        let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if !(residual <= self.residual_tol * scale) {
            return Err(CmvError::NearSpectrum { detail: format!("residual {residual:e} at z = {}", self.z) });
        }
        Ok(x)
    }

    /// `‖(U - z)x - b‖∞`.
    pub fn residual(&self, x: &[C64], b: &[C64]) -> f64 {
        let ux = self.unitary.apply(x);
        ux.iter().zip(x).zip(b).map(|((u, xi), bi)| (u - self.z * xi - bi).norm()).fold(0.0, f64::max)
    }

    /// `⟨δ_i, (U - z)^{-1} δ_j⟩`.
    pub fn entry(&self, i: i64, j: i64) -> Result<C64> {
        let x = self.solve_sparse(&[(j, C64::new(1.0, 0.0))])?;
        Ok(x[self.window().index_of(i)?])
    }
}

/// Max-norm relative change between two bundles.
pub fn relative_change(old: &[C64], new: &[C64]) -> f64 {
    let diff = old.iter().zip(new).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = new.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

/// Starting half-width for a spectral parameter at distance `|1 - |z||` from
/// the circle.
pub fn initial_half_width(z: C64, opts: &SolveOptions) -> i64 {
    let dist = (1.0 - z.norm()).abs().max(1e-12);
    let want = (RETURN_FACTOR / dist).ceil();
    let want = if want.is_finite() { want as i64 } else { opts.max_half_width };
    want.clamp(opts.min_half_width, opts.max_half_width.max(opts.min_half_width))
}

/// Evaluates `f(half_width)` on growing windows until doubling changes the
/// bundle by at most `opts.doubling_tol`. Returns the value on the larger
/// window and that half-width.
pub fn with_window_doubling<F>(start: i64, opts: &SolveOptions, what: &str, f: F) -> Result<(Vec<C64>, i64)>
where
    F: Fn(i64) -> Result<Vec<C64>>,
{
    let mut half = start.max(opts.min_half_width);
    let mut prev = f(half)?;
    loop {
        let next_half = half * 2;
        if next_half > opts.max_half_width {
            return Err(CmvError::NotConverged {
                detail: format!("{what}: window doubling did not settle below half-width {}", opts.max_half_width),
            });
        }
        let next = f(next_half)?;
        let change = relative_change(&prev, &next);
        if change <= opts.doubling_tol {
            return Ok((next, next_half));
        }
        prev = next;
        half = next_half;
    }
}

/// `⟨δ_i, (U - z)^{-1} δ_j⟩` on `window`, confirmed by a recomputation on the
/// doubled window.
pub fn green(seq: &CoefficientSequence, window: Window, i: i64, j: i64, z: C64, opts: &SolveOptions) -> Result<C64> {
    let value = ShiftedResolvent::new(truncate(seq, window), z, opts)?.entry(i, j)?;
    let check = ShiftedResolvent::new(truncate(seq, window.doubled()), z, opts)?.entry(i, j)?;
    let change = relative_change(&[value], &[check]);
    if change > opts.doubling_tol {
        return Err(CmvError::NotConverged {
            detail: format!("green({i},{j}) changed by {change:e} under window doubling"),
        });
    }
    Ok(value)
}

/// Infinite-volume `G_{ij}(z)` with the window centered between `i` and `j`
/// and grown until stable.
pub fn green_adaptive(seq: &CoefficientSequence, i: i64, j: i64, z: C64, opts: &SolveOptions) -> Result<C64> {
    check_off_circle(z)?;
    let center = (i + j).div_euclid(2);
    let start = initial_half_width(z, opts) + (i - j).abs();
    let (v, _) = with_window_doubling(start, opts, "green", |half| {
        let res = ShiftedResolvent::new(truncate(seq, Window::centered(center, half)?), z, opts)?;
        Ok(vec![res.entry(i, j)?])
    })?;
    Ok(v[0])
}

/// Window realizing the half-line operator `C^{(side)}_n` with `len + 1` sites.
pub fn half_line_window(side: Side, n: i64, len: i64) -> Result<Window> {
    match side {
        Side::Right => Window::new(n, n + len),
        Side::Left => Window::new(n - len, n),
    }
}

/// Sequence whose truncation on [`half_line_window`] is `C^{(side)}_n`.
pub fn half_line_sequence(seq: &CoefficientSequence, side: Side, n: i64) -> CoefficientSequence {
    match side {
        Side::Right => seq.decouple(n),
        Side::Left => seq.decouple(n + 1),
    }
}

/// `m` from the diagonal Green's function of a half-line operator:
/// `∓(1 + 2 z G'_{nn}(z))`.
pub fn m_from_green(side: Side, z: C64, g_nn: C64) -> C64 {
    (C64::new(1.0, 0.0) + 2.0 * z * g_nn) * side.sign()
}

/// Half-line m-function on a fixed length.
pub fn m_function_on(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    z: C64,
    len: i64,
    opts: &SolveOptions,
) -> Result<C64> {
    let w = half_line_window(side, n, len)?;
    let res = ShiftedResolvent::new(truncate(&half_line_sequence(seq, side, n), w), z, opts)?;
    Ok(m_from_green(side, z, res.entry(n, n)?))
}

/// `m^{(side)}_n(z) = ∓⟨δ_n, (C' + z)(C' - z)^{-1} δ_n⟩` for the half-line
/// operator `C' = C^{(side)}_n`.
pub fn m_function(seq: &CoefficientSequence, side: Side, n: i64, z: C64, opts: &SolveOptions) -> Result<C64> {
    check_off_circle(z)?;
    let (v, _) = with_window_doubling(initial_half_width(z, opts), opts, "m_function", |len| {
        Ok(vec![m_function_on(seq, side, n, z, len, opts)?])
    })?;
    Ok(v[0])
}

/// Extrapolation mode for radial limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    None,
    Richardson,
}

/// Which side of the circle the limit is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitSide {
    Inside,
    Outside,
}

/// Radii `r_j` with `|1 - r_j| = eps0 · contraction^j`, `j = 0 .. levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSchedule {
    pub eps0: f64,
    pub levels: usize,
    pub contraction: f64,
    pub extrapolation: Extrapolation,
    pub limit_side: LimitSide,
    /// Boundary-value tolerance on the extrapolation error estimate.
    pub tol: f64,
}

impl Default for RadialSchedule {
    fn default() -> Self {
        Self {
            eps0: 1e-2,
            levels: 6,
            contraction: 0.5,
            extrapolation: Extrapolation::Richardson,
            limit_side: LimitSide::Inside,
            tol: 1e-4,
        }
    }
}

impl RadialSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CmvError::InvalidParameter(m));
        if self.levels < 3 {
            return bad(format!("radial levels must be >= 3, got {}", self.levels));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad(format!("contraction must lie in (0, 1), got {}", self.contraction));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return bad(format!("eps0 must lie in (0, 1), got {}", self.eps0));
        }
        if !(self.eps0 * self.contraction.powi(self.levels as i32) > 1e-12) {
            return bad("eps0 * contraction^levels must exceed 1e-12".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        Ok(())
    }

    /// Distances from the circle, largest first.
    pub fn distances(&self) -> Vec<f64> {
        (0..self.levels).map(|j| self.eps0 * self.contraction.powi(j as i32)).collect()
    }

    /// Spectral parameter at distance `eps` on the ray of angle `theta`.
    pub fn point(&self, theta: f64, eps: f64) -> C64 {
        let r = match self.limit_side {
            LimitSide::Inside => 1.0 - eps,
            LimitSide::Outside => 1.0 / (1.0 - eps),
        };
        C64::from_polar(r, theta)
    }
}

/// One extrapolated boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryValue {
    pub value: C64,
    /// Difference between the last two extrapolation levels.
    pub err_est: f64,
    pub converged: bool,
}

impl BoundaryValue {
    pub fn into_result(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(CmvError::NotConverged { detail: format!("{what}: boundary value error estimate {:e}", self.err_est) })
        }
    }
}

/// Extrapolated bundle: the final estimate and the one before it.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBundle {
    pub best: Vec<C64>,
    pub previous: Vec<C64>,
}

impl RadialBundle {
    pub fn err_est(&self, i: usize) -> f64 {
        (self.best[i] - self.previous[i]).norm()
    }

    pub fn boundary_value(&self, i: usize, tol: f64) -> BoundaryValue {
        let err_est = self.err_est(i);
        BoundaryValue { value: self.best[i], err_est, converged: err_est <= tol }
    }
}

/// Richardson table in the distance `ε` with ratio `c` between levels,
/// eliminating `ε, ε², ...` in turn. Returns the last two diagonal entries.
fn richardson(levels: &[Vec<C64>], c: f64) -> (Vec<C64>, Vec<C64>) {
    let mut row: Vec<Vec<C64>> = vec![levels[0].clone()];
    let mut prev_diag = levels[0].clone();
    let mut diag = levels[0].clone();
    for (j, vals) in levels.iter().enumerate().skip(1) {
        let mut new_row = vec![vals.clone()];
        for k in 1..=j {
            let ck = c.powi(k as i32);
            let lower = &new_row[k - 1];
            let upper = &row[k - 1];
            let next: Vec<C64> = lower.iter().zip(upper).map(|(l, u)| (l - u * ck) / (1.0 - ck)).collect();
            new_row.push(next);
        }
        prev_diag = diag;
        diag = new_row[j].clone();
        row = new_row;
    }
    (diag, prev_diag)
}

/// Radial limit of a bundle of functions along the ray at angle `theta`.
pub fn radial_limit_many<F>(f: F, theta: f64, schedule: &RadialSchedule) -> Result<RadialBundle>
where
    F: Fn(C64) -> Result<Vec<C64>>,
{
    schedule.validate()?;
    let values: Vec<Vec<C64>> =
        schedule.distances().into_iter().map(|eps| f(schedule.point(theta, eps))).collect::<Result<_>>()?;
    let (best, previous) = match schedule.extrapolation {
        Extrapolation::None => (values[values.len() - 1].clone(), values[values.len() - 2].clone()),
        Extrapolation::Richardson => richardson(&values, schedule.contraction),
    };
    Ok(RadialBundle { best, previous })
}

/// `lim_{r↗1} f(r e^{iθ})` by the schedule.
pub fn radial_limit<F>(f: F, theta: f64, schedule: &RadialSchedule) -> Result<BoundaryValue>
where
    F: Fn(C64) -> Result<C64>,
{
    let bundle = radial_limit_many(|z| Ok(vec![f(z)?]), theta, schedule)?;
    Ok(bundle.boundary_value(0, schedule.tol))
}

/// Boundary value `m^{(side)}_n(e^{iθ})`.
pub fn m_boundary(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    theta: f64,
    schedule: &RadialSchedule,
    opts: &SolveOptions,
) -> Result<BoundaryValue> {
    radial_limit(|z| m_function(seq, side, n, z, opts), theta, schedule)
}

/// Clamps a density estimate: tiny negatives become zero, larger ones are
/// reported.
pub fn clamp_density(value: f64, theta: f64, tol: f64) -> Result<f64> {
    if value < -tol {
        return Err(CmvError::NegativeDensity { value, theta, tol });
    }
    Ok(value.max(0.0))
}

/// `dμ_ac / dμ_0 (θ) = ∓ Re m^{(side)}_n(e^{iθ})`.
pub fn ac_density(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    theta: f64,
    schedule: &RadialSchedule,
    opts: &SolveOptions,
) -> Result<f64> {
    let bv = m_boundary(seq, side, n, theta, schedule, opts)?.into_result("ac_density")?;
    clamp_density(side.sign() * bv.value.re, theta, schedule.tol)
}

/// Uniform grid `θ_j = 2π (j + offset) / count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaGrid {
    pub count: usize,
    /// Offset in units of the grid step.
    pub offset: f64,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self { count: 64, offset: 0.5 }
    }
}

impl ThetaGrid {
    pub fn new(count: usize, offset: f64) -> Self {
        Self { count, offset }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|j| 2.0 * PI * (j as f64 + self.offset) / self.count as f64).collect()
    }

    /// Weight of each point under `dμ_0 = dθ / 2π`.
    pub fn weight(&self) -> f64 {
        1.0 / self.count as f64
    }
}

/// Densities on a grid; `None` where the boundary value did not converge.
pub fn ac_densities(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    grid: &[f64],
    schedule: &RadialSchedule,
    opts: &SolveOptions,
) -> Vec<Result<f64>> {
    grid.iter().map(|&t| ac_density(seq, side, n, t, schedule, opts)).collect()
}

/// `density > threshold` per grid point; non-converged points are `false`.
pub fn ac_support(
    seq: &CoefficientSequence,
    side: Side,
    n: i64,
    grid: &[f64],
    threshold: f64,
    schedule: &RadialSchedule,
    opts: &SolveOptions,
) -> Vec<bool> {
    support_flags(&ac_densities(seq, side, n, grid, schedule, opts), threshold)
}

/// Thresholds precomputed densities.
pub fn support_flags(densities: &[Result<f64>], threshold: f64) -> Vec<bool> {
    densities.iter().map(|d| matches!(d, Ok(v) if *v > threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn resolvent_residual_and_z_zero() {
        let seq = CoefficientSequence::random_decay(2, 0.4).unwrap();
        let w = Window::new(-30, 30).unwrap();
        let u = truncate(&seq, w);
        let opts = SolveOptions::default();
        let res = ShiftedResolvent::new(u.clone(), c(0.4, 0.2), &opts).unwrap();
        let mut b = vec![c(0.0, 0.0); w.len()];
        b[7] = c(1.0, 0.0);
        let x = res.solve(&b).unwrap();
        assert!(res.residual(&x, &b) <= 1e-12);

        let at_zero = ShiftedResolvent::new(u.clone(), c(0.0, 0.0), &opts).unwrap();
        for i in -5..5 {
            for j in -5..5 {
                let g = at_zero.entry(i, j).unwrap();
                assert!((g - u.get(j, i).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn on_circle_rejected() {
        let seq = CoefficientSequence::free();
        let w = Window::new(0, 20).unwrap();
        assert!(matches!(
            green(&seq, w, 1, 1, C64::from_polar(1.0, 0.3), &SolveOptions::default()),
            Err(CmvError::OnUnitCircle { .. })
        ));
    }

    #[test]
    fn m_at_zero_is_normalized() {
        let seq = CoefficientSequence::random_decay(5, 0.3).unwrap();
        let opts = SolveOptions::default();
        for n in [-2, 0, 3] {
            let ml = m_function(&seq, Side::Left, n, c(0.0, 0.0), &opts).unwrap();
            let mr = m_function(&seq, Side::Right, n, c(0.0, 0.0), &opts).unwrap();
            assert!((ml + 1.0).norm() < 1e-14);
            assert!((mr - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn free_m_is_one() {
        let seq = CoefficientSequence::free();
        let m = m_function(&seq, Side::Right, 0, c(0.0, 0.3), &SolveOptions::default()).unwrap();
        assert!((m - 1.0).norm() <= 1e-6);
    }

    #[test]
    fn radial_limit_elementary() {
        let s = RadialSchedule::default();
        let bv = radial_limit(|_| Ok(c(2.0, -1.0)), 0.7, &s).unwrap();
        assert_eq!(bv.value, c(2.0, -1.0));
        assert_eq!(bv.err_est, 0.0);
        assert!(bv.converged);

        let bv = radial_limit(Ok, 0.0, &s).unwrap();
        assert!((bv.value - 1.0).norm() <= s.eps0 * s.contraction.powi(s.levels as i32));

        let plain = RadialSchedule { extrapolation: Extrapolation::None, ..s };
        let bv = radial_limit(Ok, 0.0, &plain).unwrap();
        let last = s.eps0 * s.contraction.powi(s.levels as i32 - 1);
        assert!((bv.value - 1.0).norm() <= last * (1.0 + 1e-12));
    }

    #[test]
    fn richardson_kills_polynomial_error() {
        let s = RadialSchedule::default();
        // f(z) = z^3 is a cubic in eps along the ray
        let bv = radial_limit(|z| Ok(z * z * z), 1.1, &s).unwrap();
        assert!((bv.value - C64::from_polar(1.0, 3.3)).norm() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        let s = RadialSchedule { levels: 2, ..Default::default() };
        assert!(s.validate().is_err());
        let s = RadialSchedule { eps0: 1e-6, contraction: 0.01, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn density_clamp() {
        assert_eq!(clamp_density(-1e-9, 0.0, 1e-4).unwrap(), 0.0);
        assert!(matches!(clamp_density(-1e-2, 0.0, 1e-4), Err(CmvError::NegativeDensity { .. })));
    }

    #[test]
    fn support_thresholding_is_monotone() {
        let d: Vec<Result<f64>> = vec![Ok(0.2), Ok(1.0), Err(CmvError::Singular), Ok(0.6)];
        let mut last = usize::MAX;
        for t in [0.0, 0.1, 0.5, 0.9, 2.0] {
            let count = support_flags(&d, t).iter().filter(|f| **f).count();
            assert!(count <= last);
            last = count;
        }
        assert_eq!(last, 0);
    }

    #[test]
    fn theta_grid_offset() {
        let g = ThetaGrid::new(4, 0.5);
        let p = g.points();
        assert!((p[0] - PI / 4.0).abs() < 1e-15);
        assert!((p[3] - 7.0 * PI / 4.0).abs() < 1e-15);
    }
}
