use cmv_scatter::operator::{entry, Window};
use cmv_scatter::oracle::dense_green;
use cmv_scatter::resolvent::{m_function, Side, SolveOptions};
use cmv_scatter::weyl::{green_weyl, m_cap, mhat_cap, transfer, weyl_solutions, Variant, WeylPair};
use cmv_scatter::{CoefficientSequence, C64};
use proptest::prelude::*;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

/// max over interior sites of |(C x)_k - z x_k|, with `transpose` selecting C^T.
fn eigen_residual(seq: &CoefficientSequence, x: &[C64], range: Window, z: C64, transpose: bool) -> f64 {
    let mut worst: f64 = 0.0;
    for k in (range.a() + 2)..=(range.b() - 2) {
        let mut acc = -z * x[range.index_of(k).unwrap()];
        for j in (k - 2)..=(k + 2) {
            let c = if transpose { entry(seq, j, k) } else { entry(seq, k, j) };
            acc += c * x[range.index_of(j).unwrap()];
        }
        let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        worst = worst.max(acc.norm() / scale);
    }
    worst
}

fn pair(seq: &CoefficientSequence, side: Side, n: i64, z: C64, variant: Variant) -> WeylPair {
    weyl_solutions(seq, side, n, z, Window::new(n - 10, n + 10).unwrap(), variant, &opts()).unwrap()
}

#[test]
fn weyl_solutions_solve_eigen_equations() {
    let seq = CoefficientSequence::random_decay(9, 0.4).unwrap();
    let z = C64::new(0.3, 0.45);
    for n in [-2, -1, 0, 1, 4] {
        for side in [Side::Left, Side::Right] {
            for variant in [Variant::Plain, Variant::Hat] {
                let p = pair(&seq, side, n, z, variant);
                assert!(eigen_residual(&seq, &p.u, p.range, z, false) < 1e-8, "u n={n} {side:?} {variant:?}");
                assert!(eigen_residual(&seq, &p.v, p.range, z, true) < 1e-8, "v n={n} {side:?} {variant:?}");
                assert!(p.recursion_residual(&seq).unwrap() < 1e-10);
            }
        }
    }
}

#[test]
fn weyl_solutions_decay_on_their_side() {
    let seq = CoefficientSequence::random_decay(3, 0.7).unwrap();
    let z = C64::new(0.1, 0.5);
    let r = pair(&seq, Side::Right, 0, z, Variant::Plain);
    assert!(r.tail_mass(8) < 1e-2 * r.tail_mass(0));
    let l = pair(&seq, Side::Left, 0, z, Variant::Plain);
    assert!(l.tail_mass(-8) < 1e-2 * l.tail_mass(0));
}

#[test]
fn free_m_functions_are_constant() {
    let seq = CoefficientSequence::free();
    for z in [C64::new(0.2, 0.1), C64::new(-0.5, 0.6), C64::new(0.0, -0.9)] {
        for n in [-1, 0, 3] {
            let mr = m_function(&seq, Side::Right, n, z, &opts()).unwrap();
            let ml = m_function(&seq, Side::Left, n, z, &opts()).unwrap();
            assert!((mr - 1.0).norm() < 1e-9 && (ml + 1.0).norm() < 1e-9);
            let hl = mhat_cap(&seq, Side::Left, n - 1, z, &opts()).unwrap();
            let hr = mhat_cap(&seq, Side::Right, n - 1, z, &opts()).unwrap();
            assert!((hl + hr.conj()).norm() < 1e-9);
            let cl = m_cap(&seq, Side::Left, n, z, &opts()).unwrap();
            let cr = m_cap(&seq, Side::Right, n, z, &opts()).unwrap();
            assert!((cl + cr.conj()).norm() < 1e-9);
        }
    }
}

#[test]
fn green_from_weyl_matches_dense_for_both_parities() {
    let seq = CoefficientSequence::random_decay(21, 0.5).unwrap();
    let z = C64::new(-0.3, 0.4);
    let dense = dense_green(&seq, Window::new(-200, 200).unwrap(), z).unwrap();
    for (k, kp) in [(0, 0), (1, 1), (-1, 2), (2, -1), (3, 3), (-2, -2)] {
        let d = dense.get(k, kp).unwrap();
        for k0 in [-2, -1, 0, 1, 2] {
            for variant in [Variant::Plain, Variant::Hat] {
                let g = green_weyl(&seq, k, kp, z, k0, variant, &opts()).unwrap();
                assert!((g - d).norm() <= 1e-8 * d.norm().max(1e-3), "({k},{kp}) k0={k0} {variant:?}: {g} vs {d}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn transfer_determinant(seed in any::<u64>(), k in -30i64..30, r in 0.05..0.95f64, t in 0.0..std::f64::consts::TAU) {
        let seq = CoefficientSequence::random_decay(seed, 0.3).unwrap();
        let z = C64::from_polar(r, t);
        let m = transfer(&seq, z, k).unwrap();
        prop_assert!((m.det() + 1.0).norm() < 1e-12);
        let x = [C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        let back = m.inverse().unwrap().apply(m.apply(x));
        prop_assert!((back[0] - x[0]).norm() + (back[1] - x[1]).norm() < 1e-10);
    }
}
