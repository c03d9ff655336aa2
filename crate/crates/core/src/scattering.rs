//! The 2×2 scattering matrix of the pair `(C, C_n)` on the unit circle, its
//! diagonal through the M-functions, and the reflectionless classification.
//!
//! Boundary values are taken along the ray `r e^{iθ}`, `r ↗ 1`. At each
//! radius the building blocks are four resolvent inner products
//! `⟨(C - z)^{-1}(C - C_n)δ_p, (C - C_n)^*δ_q⟩` and the two m-functions
//! adjacent to the cut; these are extrapolated to the circle and only then
//! combined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSequence;
use crate::error::{CmvError, Result};
use crate::operator::{defect, truncate, DefectOperator, Window};
use crate::resolvent::{
    clamp_density, initial_half_width, m_function, radial_limit_many, with_window_doubling, BoundaryValue,
    RadialBundle, RadialSchedule, ShiftedResolvent, Side, SolveOptions,
};
use crate::weyl::{m_cap_left, mhat_cap_right};
use crate::C64;

const DENOMINATOR_EPS: f64 = 1e-12;

/// Numerical settings shared by every scattering computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringConfig {
    pub schedule: RadialSchedule,
    pub solve: SolveOptions,
    /// Densities above this value count as a.c. support.
    pub support_threshold: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            schedule: RadialSchedule::default(),
            solve: SolveOptions { min_half_width: 2048, ..SolveOptions::default() },
            support_threshold: 1e-6,
        }
    }
}

pub type Matrix2 = [[C64; 2]; 2];

/// One θ of a scattering sweep. Indices `0 = l`, `1 = r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringSample {
    pub theta: f64,
    pub n: i64,
    pub s: Matrix2,
    /// Per-entry extrapolation error estimates.
    pub s_err: [[f64; 2]; 2],
    /// `-Re m^{(l)}_{n-1}(e^{iθ})`.
    pub density_l: f64,
    /// `Re m^{(r)}_n(e^{iθ})`.
    pub density_r: f64,
    pub support_l: bool,
    pub support_r: bool,
    pub unitarity_defect: f64,
    /// `|M^{(l)}_n + conj M^{(r)}_n|` on the circle.
    pub refl_residual: f64,
    pub refl_err: f64,
    pub converged: bool,
    /// Error kind and message when the sample could not be computed.
    pub error: Option<String>,
}

impl ScatteringSample {
    pub const CSV_HEADER: [&'static str; 19] = [
        "theta",
        "n",
        "s_ll_re",
        "s_ll_im",
        "s_lr_re",
        "s_lr_im",
        "s_rl_re",
        "s_rl_im",
        "s_rr_re",
        "s_rr_im",
        "density_l",
        "density_r",
        "support_l",
        "support_r",
        "unitarity_defect",
        "refl_residual",
        "err_est",
        "converged",
        "error",
    ];

    pub fn failed(theta: f64, n: i64, err: &CmvError) -> Self {
        let nan = C64::new(f64::NAN, f64::NAN);
        Self {
            theta,
            n,
            s: [[nan; 2]; 2],
            s_err: [[f64::NAN; 2]; 2],
            density_l: f64::NAN,
            density_r: f64::NAN,
            support_l: false,
            support_r: false,
            unitarity_defect: f64::NAN,
            refl_residual: f64::NAN,
            refl_err: f64::NAN,
            converged: false,
            error: Some(format!("{}: {}", err.kind(), err)),
        }
    }

    /// Largest error estimate over the entries and the residual.
    pub fn err_est(&self) -> f64 {
        self.s_err.iter().flatten().copied().fold(self.refl_err, f64::max)
    }

    pub fn two_channel(&self) -> bool {
        self.support_l && self.support_r
    }

    pub fn csv_record(&self) -> Vec<String> {
        let s = &self.s;
        let mut r = vec![format!("{}", self.theta), self.n.to_string()];
        for z in [s[0][0], s[0][1], s[1][0], s[1][1]] {
            r.push(format!("{:e}", z.re));
            r.push(format!("{:e}", z.im));
        }
        r.push(format!("{:e}", self.density_l));
        r.push(format!("{:e}", self.density_r));
        r.push(self.support_l.to_string());
        r.push(self.support_r.to_string());
        r.push(format!("{:e}", self.unitarity_defect));
        r.push(format!("{:e}", self.refl_residual));
        r.push(format!("{:e}", self.err_est()));
        r.push(self.converged.to_string());
        r.push(self.error.clone().unwrap_or_default());
        r
    }
}

/// `‖s*s - I‖∞` over the active channels; `||s_ii| - 1|` for one channel.
pub fn unitarity_defect(s: &Matrix2, support_l: bool, support_r: bool) -> f64 {
    match (support_l, support_r) {
        (true, true) => {
            let mut worst: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        acc += s[k][i].conj() * s[k][j];
                    }
                    if i == j {
                        acc -= 1.0;
                    }
                    worst = worst.max(acc.norm());
                }
            }
            worst
        }
        (true, false) => (s[0][0].norm() - 1.0).abs(),
        (false, true) => (s[1][1].norm() - 1.0).abs(),
        (false, false) => 0.0,
    }
}

fn check_coupled(seq: &CoefficientSequence, n: i64) -> Result<()> {
    for k in (n - 2)..=(n + 2) {
        if seq.is_decoupled_at(k) {
            return Err(CmvError::InvalidParameter(format!("sequence is already decoupled at {k}, next to n = {n}")));
        }
    }
    Ok(())
}

/// Pairs `(p, q)` of the four inner products, in the order used by
/// [`assemble`].
fn inner_product_sites(n: i64) -> [(i64, i64); 4] {
    if n.rem_euclid(2) == 0 {
        [(n - 2, n - 1), (n - 2, n), (n + 1, n - 1), (n + 1, n)]
    } else {
        [(n - 1, n - 2), (n - 1, n + 1), (n, n - 2), (n, n + 1)]
    }
}

/// `⟨(U - z)^{-1} D δ_p, D^* δ_q⟩` (antilinear in the first slot) for every
/// requested pair, with one solve per distinct `p`.
pub fn defect_inner_products(res: &ShiftedResolvent, d: &DefectOperator, pairs: &[(i64, i64)]) -> Result<Vec<C64>> {
    let w = res.window();
    let mut cache: Vec<(i64, Vec<C64>)> = Vec::new();
    let mut out = Vec::with_capacity(pairs.len());
    for &(p, q) in pairs {
        if !cache.iter().any(|(s, _)| *s == p) {
            let x = res.solve_sparse(d.column(p))?;
            cache.push((p, x));
        }
        let x = &cache.iter().find(|(s, _)| *s == p).expect("cached").1;
        // (D x)_q, then conjugate
        let mut dq = C64::new(0.0, 0.0);
        for j in d.domain_sites() {
            let v = d.get(q, j);
            if v != C64::new(0.0, 0.0) {
                dq += v * x[w.index_of(j)?];
            }
        }
        out.push(dq.conj());
    }
    Ok(out)
}

/// The six analytic building blocks at one `z`: four inner products, then
/// `m^{(l)}_{n-1}` and `m^{(r)}_n`, on a window of half-width `half` around
/// `n`.
pub fn building_blocks(seq: &CoefficientSequence, n: i64, z: C64, half: i64, opts: &SolveOptions) -> Result<Vec<C64>> {
    let window = Window::centered(n, half)?;
    let d = defect(seq, n);
    let full = ShiftedResolvent::new(truncate(seq, window), z, opts)?;
    let mut out = defect_inner_products(&full, &d, &inner_product_sites(n))?;
    let split = ShiftedResolvent::new(truncate(&seq.decouple(n), window), z, opts)?;
    let x_l = split.solve_sparse(&[(n - 1, C64::new(1.0, 0.0))])?;
    let x_r = split.solve_sparse(&[(n, C64::new(1.0, 0.0))])?;
    let one = C64::new(1.0, 0.0);
    out.push(-(one + 2.0 * z * x_l[window.index_of(n - 1)?]));
    out.push(one + 2.0 * z * x_r[window.index_of(n)?]);
    Ok(out)
}

/// Building blocks on a window grown until stable.
pub fn building_blocks_adaptive(seq: &CoefficientSequence, n: i64, z: C64, opts: &SolveOptions) -> Result<Vec<C64>> {
    let start = initial_half_width(z, opts);
    let (v, _) =
        with_window_doubling(start, opts, "scattering building blocks", |half| building_blocks(seq, n, z, half, opts))?;
    Ok(v)
}

struct Assembled {
    s: Matrix2,
    density_l: f64,
    density_r: f64,
    refl: f64,
}

/// Scattering matrix from boundary values of the building blocks.
fn assemble(seq: &CoefficientSequence, n: i64, b: &[C64], densities: (f64, f64)) -> Result<Assembled> {
    let a = seq.alpha_at(n);
    let rho = |k: i64| seq.rho_at(k);
    let (dl, dr) = densities;
    let sq = (dl * dr).sqrt();
    let one = C64::new(1.0, 0.0);
    let (i1, i2, i3, i4) = (b[0], b[1], b[2], b[3]);
    let s_ll = one + (one - a.conj() - i1 / rho(n - 1)) * dl;
    let s_rr = one + (one - a + i4 / rho(n + 1)) * dr;
    let (s_lr, s_rl) = if n.rem_euclid(2) == 0 {
        ((rho(n) - i2 / rho(n - 1)) * sq, (-rho(n) + i3 / rho(n + 1)) * sq)
    } else {
        ((-rho(n) + i2 / rho(n + 1)) * sq, (rho(n) - i3 / rho(n - 1)) * sq)
    };
    let m_l = m_cap_left(a, b[4])?;
    let refl = (m_l + b[5].conj()).norm();
    Ok(Assembled { s: [[s_ll, s_lr], [s_rl, s_rr]], density_l: dl, density_r: dr, refl })
}

fn raw_densities(b: &[C64]) -> (f64, f64) {
    (-b[4].re, b[5].re)
}

/// `s^{(n)}(θ)` with densities, support flags and residuals.
pub fn scattering_matrix(
    seq: &CoefficientSequence,
    n: i64,
    theta: f64,
    cfg: &ScatteringConfig,
) -> Result<ScatteringSample> {
    check_coupled(seq, n)?;
    let tol = cfg.schedule.tol;
    let bundle = radial_limit_many(|z| building_blocks_adaptive(seq, n, z, &cfg.solve), theta, &cfg.schedule)?;
    let (dl, dr) = raw_densities(&bundle.best);
    let best = assemble(seq, n, &bundle.best, (clamp_density(dl, theta, tol)?, clamp_density(dr, theta, tol)?))?;
    let (pl, pr) = raw_densities(&bundle.previous);
    let prev = assemble(seq, n, &bundle.previous, (pl.max(0.0), pr.max(0.0)))?;

    let mut s_err = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s_err[i][j] = (best.s[i][j] - prev.s[i][j]).norm();
        }
    }
    let refl_err = (best.refl - prev.refl).abs();
    let density_err = bundle.err_est(4).max(bundle.err_est(5));
    let converged = s_err.iter().flatten().all(|e| *e <= tol) && refl_err <= tol && density_err <= tol;
    let support_l = best.density_l > cfg.support_threshold;
    let support_r = best.density_r > cfg.support_threshold;
    Ok(ScatteringSample {
        theta,
        n,
        s: best.s,
        s_err,
        density_l: best.density_l,
        density_r: best.density_r,
        support_l,
        support_r,
        unitarity_defect: unitarity_defect(&best.s, support_l, support_r),
        refl_residual: best.refl,
        refl_err,
        converged,
        error: None,
    })
}

/// Samples over a θ grid, in grid order; failures become excluded samples.
pub fn scattering_sweep(
    seq: &CoefficientSequence,
    n: i64,
    grid: &[f64],
    cfg: &ScatteringConfig,
) -> Vec<ScatteringSample> {
    grid.par_iter()
        .map(|&t| scattering_matrix(seq, n, t, cfg).unwrap_or_else(|e| ScatteringSample::failed(t, n, &e)))
        .collect()
}

/// Boundary values of `m^{(l)}_{n-1}` and `m^{(r)}_n` computed on half-line
/// windows, independently of the full-line solves.
pub fn half_line_m_boundary(
    seq: &CoefficientSequence,
    n: i64,
    theta: f64,
    cfg: &ScatteringConfig,
) -> Result<RadialBundle> {
    radial_limit_many(
        |z| {
            Ok(vec![
                m_function(seq, Side::Left, n - 1, z, &cfg.solve)?,
                m_function(seq, Side::Right, n, z, &cfg.solve)?,
            ])
        },
        theta,
        &cfg.schedule,
    )
}

fn quotient(num: C64, den: C64) -> Result<C64> {
    if den.norm() < DENOMINATOR_EPS {
        return Err(CmvError::MDenominatorDegenerate { modulus: den.norm() });
    }
    Ok(num / den)
}

/// `(s_ll, s_rr)` from `M̂_{n-1}` and `M_n` given `m^{(l)}_{n-1}`, `m^{(r)}_n`.
pub fn diagonal_from_m(alpha_n: C64, m_l: C64, m_r: C64) -> Result<(C64, C64)> {
    let hat_l = m_l;
    let hat_r = mhat_cap_right(alpha_n, m_r)?;
    let cap_l = m_cap_left(alpha_n, m_l)?;
    let cap_r = m_r;
    let s_ll = quotient(hat_r.conj() + hat_l, hat_r.conj() - hat_l.conj())?;
    let s_rr = quotient(cap_l.conj() + cap_r, cap_l.conj() - cap_r.conj())?;
    Ok((s_ll, s_rr))
}

/// Diagonal of `s^{(n)}(θ)` through the M-functions.
pub fn diagonal_via_m(
    seq: &CoefficientSequence,
    n: i64,
    theta: f64,
    cfg: &ScatteringConfig,
) -> Result<(BoundaryValue, BoundaryValue)> {
    check_coupled(seq, n)?;
    let a = seq.alpha_at(n);
    let bundle = half_line_m_boundary(seq, n, theta, cfg)?;
    let (ll, rr) = diagonal_from_m(a, bundle.best[0], bundle.best[1])?;
    let (pll, prr) = diagonal_from_m(a, bundle.previous[0], bundle.previous[1])?;
    let tol = cfg.schedule.tol;
    let bv = |v: C64, p: C64| {
        let err_est = (v - p).norm();
        BoundaryValue { value: v, err_est, converged: err_est <= tol }
    };
    Ok((bv(ll, pll), bv(rr, prr)))
}

/// `|M^{(l)}_n(e^{iθ}) + conj M^{(r)}_n(e^{iθ})|`.
pub fn reflectionless_residual(
    seq: &CoefficientSequence,
    n: i64,
    theta: f64,
    cfg: &ScatteringConfig,
) -> Result<BoundaryValue> {
    let a = seq.alpha_at(n);
    let bundle = half_line_m_boundary(seq, n, theta, cfg)?;
    let r = |m: &[C64]| -> Result<f64> { Ok((m_cap_left(a, m[0])? + m[1].conj()).norm()) };
    let value = r(&bundle.best)?;
    let err_est = (value - r(&bundle.previous)?).abs();
    Ok(BoundaryValue { value: C64::new(value, 0.0), err_est, converged: err_est <= cfg.schedule.tol })
}

/// Per-θ off-diagonality verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub theta: f64,
    pub converged: bool,
    /// `None` for excluded samples and samples without any a.c. channel.
    pub off_diagonal: Option<bool>,
    /// `refl_residual ≤ tol`; `None` for excluded samples.
    pub reflectionless: Option<bool>,
    /// Some error bar crosses the tolerance.
    pub straddles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalitySummary {
    pub total: usize,
    pub converged: usize,
    pub classified: usize,
    pub off_diagonal: usize,
    pub off_diagonal_fraction: f64,
    /// Classified samples where both tests agree.
    pub agreement: usize,
    pub agreement_fraction: f64,
    pub straddling: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalityReport {
    pub n: i64,
    pub tol: f64,
    pub samples: Vec<ScatteringSample>,
    pub classes: Vec<Classification>,
    pub summary: OffDiagonalitySummary,
}

fn straddles(value: f64, err: f64, tol: f64) -> bool {
    value - err <= tol && tol < value + err
}

/// Classifies one sample: off-diagonal iff every supported diagonal entry is
/// below `tol`.
pub fn classify(sample: &ScatteringSample, tol: f64) -> Classification {
    if !sample.converged {
        return Classification {
            theta: sample.theta,
            converged: false,
            off_diagonal: None,
            reflectionless: None,
            straddles: false,
        };
    }
    let mut strad = straddles(sample.refl_residual, sample.refl_err, tol);
    let mut off = true;
    for (i, active) in [sample.support_l, sample.support_r].into_iter().enumerate() {
        if active {
            let v = sample.s[i][i].norm();
            strad |= straddles(v, sample.s_err[i][i], tol);
            off &= v <= tol;
        }
    }
    let any = sample.support_l || sample.support_r;
    Classification {
        theta: sample.theta,
        converged: true,
        off_diagonal: any.then_some(off),
        reflectionless: Some(sample.refl_residual <= tol),
        straddles: strad,
    }
}

/// Off-diagonality over a grid, cross-checked against the reflectionless
/// residual.
pub fn off_diagonality_report(
    seq: &CoefficientSequence,
    n: i64,
    grid: &[f64],
    tol: f64,
    cfg: &ScatteringConfig,
) -> OffDiagonalityReport {
    report_from_samples(n, tol, scattering_sweep(seq, n, grid, cfg))
}

pub fn report_from_samples(n: i64, tol: f64, samples: Vec<ScatteringSample>) -> OffDiagonalityReport {
    let classes: Vec<Classification> = samples.iter().map(|s| classify(s, tol)).collect();
    let converged = classes.iter().filter(|c| c.converged).count();
    let classified: Vec<&Classification> = classes.iter().filter(|c| c.off_diagonal.is_some()).collect();
    let off = classified.iter().filter(|c| c.off_diagonal == Some(true)).count();
    let agree = classified.iter().filter(|c| c.off_diagonal == c.reflectionless).count();
    let frac = |k: usize, of: usize| if of == 0 { 0.0 } else { k as f64 / of as f64 };
    let summary = OffDiagonalitySummary {
        total: samples.len(),
        converged,
        classified: classified.len(),
        off_diagonal: off,
        off_diagonal_fraction: frac(off, classified.len()),
        agreement: agree,
        agreement_fraction: frac(agree, classified.len()),
        straddling: classes.iter().filter(|c| c.straddles).count(),
    };
    OffDiagonalityReport { n, tol, samples, classes, summary }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitarity_defect_cases() {
        let o = c(0.0, 0.0);
        let swap = [[o, c(1.0, 0.0)], [c(0.0, 1.0), o]];
        assert!(unitarity_defect(&swap, true, true) < 1e-15);
        let half = [[c(0.5, 0.0), o], [o, c(1.0, 0.0)]];
        assert!((unitarity_defect(&half, true, false) - 0.5).abs() < 1e-15);
        assert_eq!(unitarity_defect(&half, false, true), 0.0);
    }

    #[test]
    fn conjugate_m_values_give_zero_diagonal() {
        let m_r = c(0.7, 0.2);
        // choose m_l so that M^{(l)}_n = -conj(m_r) with α_n = 0: 1/m_l = -conj(m_r)
        let m_l = (-m_r.conj()).inv();
        let (_, s_rr) = diagonal_from_m(c(0.0, 0.0), m_l, m_r).unwrap();
        assert!(s_rr.norm() < 1e-15);
    }

    #[test]
    fn free_diagonal_from_m() {
        let (ll, rr) = diagonal_from_m(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(ll, c(0.0, 0.0));
        assert_eq!(rr, c(0.0, 0.0));
    }

    #[test]
    fn classification_rules() {
        let o = c(0.0, 0.0);
        let mut s = ScatteringSample {
            theta: 0.1,
            n: 0,
            s: [[o, c(1.0, 0.0)], [c(1.0, 0.0), o]],
            s_err: [[1e-6; 2]; 2],
            density_l: 1.0,
            density_r: 1.0,
            support_l: true,
            support_r: true,
            unitarity_defect: 0.0,
            refl_residual: 0.0,
            refl_err: 0.0,
            converged: true,
            error: None,
        };
        let c0 = classify(&s, 1e-3);
        assert_eq!(c0.off_diagonal, Some(true));
        assert_eq!(c0.reflectionless, Some(true));
        assert!(!c0.straddles);
        s.s[1][1] = c(1e-3, 0.0);
        assert!(classify(&s, 1e-3).straddles);
        s.support_l = false;
        s.support_r = false;
        assert_eq!(classify(&s, 1e-3).off_diagonal, None);
        s.converged = false;
        assert!(!classify(&s, 1e-3).converged);
    }

    #[test]
    fn rejects_decoupled_neighbourhood() {
        let seq = CoefficientSequence::free().decouple(1);
        assert!(scattering_matrix(&seq, 0, 0.3, &ScatteringConfig::default()).is_err());
    }
}
