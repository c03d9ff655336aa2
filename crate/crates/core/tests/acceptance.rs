//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary lines always reach the
//! console; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use cmv_scatter::dynamics::{reflection_probe, WavePacket};
use cmv_scatter::operator::{defect, Window};
use cmv_scatter::oracle::dense_green;
use cmv_scatter::resolvent::{m_function, Side, SolveOptions, ThetaGrid};
use cmv_scatter::scattering::{classify, diagonal_via_m, scattering_sweep, ScatteringConfig, ScatteringSample};
use cmv_scatter::weyl::{green_weyl, transfer, weyl_solutions, Variant};
use cmv_scatter::{CoefficientSequence, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_disc(rng: &mut ChaCha8Rng, max: f64) -> C64 {
    C64::from_polar(max * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
}

fn random_seq(rng: &mut ChaCha8Rng) -> CoefficientSequence {
    let seed = rng.random::<u64>();
    let rate = 0.3 + 0.5 * rng.random::<f64>();
    CoefficientSequence::random_decay(seed, rate).unwrap()
}

fn grid() -> Vec<f64> {
    ThetaGrid::new(64, 0.5).points()
}

struct Sweeps {
    free: Vec<Vec<ScatteringSample>>,
    barrier: Vec<Vec<ScatteringSample>>,
    random: Vec<ScatteringSample>,
}

fn free_case(s: &Sweeps) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut converged = 0;
    let mut total = 0;
    for samples in &s.free[..2] {
        for x in samples {
            total += 1;
            if x.converged {
                converged += 1;
                worst = worst.max(x.s[0][0].norm()).max(x.s[1][1].norm()).max(x.refl_residual);
            }
        }
    }
    outcome(
        worst <= 1e-4 && converged == total,
        format!(
            "max(|s_ll|, |s_rr|, residual) = {worst:.2e} over {converged}/{total} converged samples, n in {{0, 1}}"
        ),
    )
}

fn unitarity(s: &Sweeps) -> Outcome {
    let conv: Vec<&ScatteringSample> = s.random.iter().filter(|x| x.converged).collect();
    let two: Vec<&&ScatteringSample> = conv.iter().filter(|x| x.two_channel()).collect();
    let worst = two.iter().map(|x| x.unitarity_defect).fold(0.0, f64::max);
    let frac = conv.len() as f64 / s.random.len() as f64;
    outcome(
        worst <= 1e-3 && frac >= 0.9,
        format!(
            "max ||s*s - I|| = {worst:.2e} over {} two-channel samples; converged {}/{}",
            two.len(),
            conv.len(),
            s.random.len()
        ),
    )
}

fn diagonal_consistency(s: &Sweeps, cfg: &ScatteringConfig, seq: &CoefficientSequence) -> Outcome {
    let mut within_err = true;
    let mut small = 0;
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for x in s.random.iter().filter(|x| x.converged) {
        count += 1;
        let Ok((ll, rr)) = diagonal_via_m(seq, 0, x.theta, cfg) else {
            within_err = false;
            continue;
        };
        let d_ll = (x.s[0][0] - ll.value).norm();
        let d_rr = (x.s[1][1] - rr.value).norm();
        within_err &= d_ll <= x.s_err[0][0] + ll.err_est && d_rr <= x.s_err[1][1] + rr.err_est;
        worst = worst.max(d_ll).max(d_rr);
        if d_ll.max(d_rr) <= 1e-3 {
            small += 1;
        }
    }
    let frac = if count == 0 { 0.0 } else { small as f64 / count as f64 };
    outcome(
        within_err && frac >= 0.95 && count > 0,
        format!("max |resolvent formula - M-function formula| = {worst:.2e}; within error estimates: {within_err}; <= 1e-3 at {small}/{count}"),
    )
}

fn weyl_green() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let opts = SolveOptions::default();
    let radii = [0.3, 0.7, 1.5];
    let mut worst_dense: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    let mut failures = Vec::new();
    for t in 0..20 {
        let seq = random_seq(&mut rng);
        let z = C64::from_polar(radii[t % 3], 2.0 * PI * rng.random::<f64>());
        let k = rng.random_range(-6..=6);
        let kp = rng.random_range(-6..=6);
        let k0 = rng.random_range(-4..=4);
        let window = Window::new(-250, 250).unwrap();
        let reference = match dense_green(&seq, window, z).and_then(|g| g.get(k, kp)) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("dense {e}"));
                continue;
            }
        };
        for variant in [Variant::Plain, Variant::Hat] {
            let a = green_weyl(&seq, k, kp, z, k0, variant, &opts);
            let b = green_weyl(&seq, k, kp, z, k0 + 1, variant, &opts);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    worst_dense = worst_dense.max((a - reference).norm() / reference.norm());
                    worst_shift = worst_shift.max((a - b).norm() / b.norm());
                }
                (Err(e), _) | (_, Err(e)) => failures.push(e.to_string()),
            }
        }
    }
    outcome(
        worst_dense <= 1e-8 && worst_shift <= 1e-8 && failures.is_empty(),
        format!(
            "20 tuples, both variants: rel. error vs dense {worst_dense:.2e}, k0 shift {worst_shift:.2e}, failures {}",
            failures.len()
        ),
    )
}

fn class_key(x: &ScatteringSample, tol: f64) -> Option<Option<bool>> {
    let c = classify(x, tol);
    (c.converged && !c.straddles).then_some(c.off_diagonal)
}

fn parity_invariance(s: &Sweeps) -> Outcome {
    let tol = 1e-3;
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, sweeps) in [("free", &s.free), ("barrier", &s.barrier)] {
        let total = sweeps[0].len();
        let mut excluded = 0;
        let mut mismatched = 0;
        let mut off = 0;
        for i in 0..total {
            let keys: Vec<Option<Option<bool>>> = sweeps.iter().map(|v| class_key(&v[i], tol)).collect();
            if keys.iter().any(Option::is_none) {
                excluded += 1;
                continue;
            }
            if keys.iter().any(|k| *k != keys[0]) {
                mismatched += 1;
            }
            if keys[0] == Some(Some(true)) {
                off += 1;
            }
        }
        pass &= mismatched == 0 && excluded as f64 <= 0.05 * total as f64;
        lines.push(format!("{name}: {mismatched} mismatches, {excluded}/{total} excluded, {off} off-diagonal"));
    }
    outcome(pass, lines.join("; "))
}

fn transfer_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = SolveOptions::default();
    let mut worst_det: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let k: i64 = rng.random_range(-50..=50);
        let alpha = random_disc(&mut rng, 0.95);
        let z = random_disc(&mut rng, 0.9) + C64::new(0.0, 0.0);
        let z = if z.norm() < 1e-3 { C64::new(0.5, 0.0) } else { z };
        let single = CoefficientSequence::explicit(k, &[alpha], C64::new(0.0, 0.0)).unwrap();
        match transfer(&single, z, k) {
            Ok(t) => worst_det = worst_det.max((t.det() + 1.0).norm()),
            Err(_) => failures += 1,
        }
        let seq = random_seq(&mut rng);
        let n = rng.random_range(-5..=5);
        let range = Window::new(n - 6, n + 6).unwrap();
        let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
        let variant = if rng.random::<bool>() { Variant::Plain } else { Variant::Hat };
        match weyl_solutions(&seq, side, n, z, range, variant, &opts).and_then(|p| p.recursion_residual(&seq)) {
            Ok(r) => worst_rec = worst_rec.max(r),
            Err(_) => failures += 1,
        }
    }
    outcome(
        worst_det <= 1e-12 && worst_rec <= 1e-10 && failures == 0,
        format!("|det T + 1| <= {worst_det:.2e}, recursion residual <= {worst_rec:.2e}, failures {failures}"),
    )
}

fn defect_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let seq = random_seq(&mut rng);
        // alternate parities; the column identities belong to even n and the
        // adjoint identities to odd n
        let n = 2 * rng.random_range(-5i64..=5) + (t % 2);
        let d = defect(&seq, n);
        let a = |k: i64| seq.alpha_at(k);
        let r = |k: i64| seq.rho_at(k);
        let sites: Vec<i64> = (n - 4..=n + 4).collect();
        let col = |j: i64| sites.iter().map(|&i| d.get(i, j)).collect::<Vec<_>>();
        let adj = |q: i64| sites.iter().map(|&j| d.get(q, j).conj()).collect::<Vec<_>>();
        let diff =
            |x: Vec<C64>, y: Vec<C64>, c: C64| x.iter().zip(&y).map(|(p, q)| (p - c * q).norm()).fold(0.0, f64::max);
        let e = if n.rem_euclid(2) == 0 {
            diff(col(n), col(n + 1), -a(n + 1) / r(n + 1)).max(diff(col(n - 1), col(n - 2), a(n - 1).conj() / r(n - 1)))
        } else {
            diff(adj(n), adj(n + 1), -a(n + 1).conj() / r(n + 1)).max(diff(adj(n - 1), adj(n - 2), a(n - 1) / r(n - 1)))
        };
        worst = worst.max(e);
    }
    outcome(worst <= 1e-14, format!("max entrywise residual {worst:.2e} over 100 sequences (50 even n, 50 odd n)"))
}

fn dynamics_probe() -> Outcome {
    let packet = WavePacket::new(-400, 40.0, FRAC_PI_2).unwrap();
    let free = CoefficientSequence::free();
    let barrier = CoefficientSequence::single_barrier(0, C64::new(0.9, 0.0)).unwrap();
    let w1 = Window::new(-4096, 4096).unwrap();
    let w2 = Window::new(-8192, 8192).unwrap();
    let run = |seq: &CoefficientSequence, w: Window| reflection_probe(seq, 0, &packet, 6000, w, 0);
    match (run(&free, w1), run(&barrier, w1), run(&barrier, w2)) {
        (Ok(f), Ok(b1), Ok(b2)) => {
            let stable = (b1.left_mass - b2.left_mass).abs() <= 0.1 * b2.left_mass;
            outcome(
                f.left_mass <= 1e-3 && b1.left_mass > 0.05 && stable,
                format!(
                    "free left mass {:.2e} (stopped at step {}); barrier left mass {:.4} / {:.4} on doubled window",
                    f.left_mass, f.steps, b1.left_mass, b2.left_mass
                ),
            )
        }
        (a, b, c) => outcome(false, format!("probe failed: {:?} {:?} {:?}", a.err(), b.err(), c.err())),
    }
}

fn m_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SolveOptions::default();
    let mut worst: f64 = 0.0;
    let mut bad_sign = 0;
    let mut failures = 0;
    for _ in 0..20 {
        let seq = random_seq(&mut rng);
        let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
        let n = rng.random_range(-10..=10);
        match m_function(&seq, side, n, C64::new(0.0, 0.0), &opts) {
            Ok(m) => worst = worst.max((m - side.sign()).norm()),
            Err(_) => failures += 1,
        }
    }
    for _ in 0..50 {
        let seq = random_seq(&mut rng);
        let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
        let n = rng.random_range(-10..=10);
        let z = random_disc(&mut rng, 0.9);
        match m_function(&seq, side, n, z, &opts) {
            Ok(m) => {
                if m.re * side.sign() <= 0.0 {
                    bad_sign += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        worst <= 1e-12 && bad_sign == 0 && failures == 0,
        format!("|m(0) -/+ 1| <= {worst:.2e} over 20 cases; wrong Herglotz sign at {bad_sign}/50; failures {failures}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = ScatteringConfig::default();
    let g = grid();
    let free = CoefficientSequence::free();
    let barrier = CoefficientSequence::single_barrier(0, C64::new(0.9, 0.0)).unwrap();
    let random = CoefficientSequence::random_decay(1, 0.5).unwrap();

    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let t = Instant::now();
    let sweeps = Sweeps {
        free: (0..3).map(|n| scattering_sweep(&free, n, &g, &cfg)).collect(),
        barrier: (0..3).map(|n| scattering_sweep(&barrier, n, &g, &cfg)).collect(),
        random: scattering_sweep(&random, 0, &g, &cfg),
    };
    let sweep_time = t.elapsed().as_secs_f64();

    let mut timed = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((name, o, t.elapsed().as_secs_f64()));
    };
    timed("1 free-case reflectionlessness", &|| free_case(&sweeps));
    timed("2 scattering-matrix unitarity", &|| unitarity(&sweeps));
    timed("3 diagonal consistency", &|| diagonal_consistency(&sweeps, &cfg, &random));
    timed("4 Green's functions from Weyl solutions", &weyl_green);
    timed("5 parity and decoupling-point invariance", &|| parity_invariance(&sweeps));
    timed("6 transfer-matrix algebra", &transfer_algebra);
    timed("7 defect identities", &defect_identities);
    timed("8 dynamics probe", &dynamics_probe);
    timed("9 m-function normalization and sign", &m_normalization);

    println!("scattering sweeps (7 x 64 samples): {sweep_time:.1}s");
    let mut all = true;
    for (name, o, secs) in &results {
        all &= o.pass;
        println!("[{}] {name}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
