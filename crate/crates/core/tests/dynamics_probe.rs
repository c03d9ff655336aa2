use std::f64::consts::FRAC_PI_2;

use cmv_scatter::dynamics::{crossing_time, evolve, mass_split, norm, reflection_probe, write_series_csv, WavePacket};
use cmv_scatter::operator::{truncate, Window};
use cmv_scatter::{CmvError, CoefficientSequence, C64};

#[test]
fn long_runs_preserve_the_norm() {
    let seq = CoefficientSequence::random_decay(2, 0.1).unwrap();
    let w = Window::new(-100, 100).unwrap();
    let u = truncate(&seq, w);
    let mut psi = WavePacket::new(-10, 4.0, 1.0).unwrap().state(w).unwrap();
    let start = norm(&psi);
    let mut next = vec![C64::new(0.0, 0.0); psi.len()];
    for _ in 0..10_000 {
        u.apply_into(&psi, &mut next);
        std::mem::swap(&mut psi, &mut next);
    }
    assert!((norm(&psi) - start).abs() <= 1e-9);
}

#[test]
fn free_packet_crosses_at_unit_speed() {
    let seq = CoefficientSequence::free();
    let packet = WavePacket::new(-200, 20.0, FRAC_PI_2).unwrap();
    let w = Window::new(-1000, 1000).unwrap();
    assert_eq!(crossing_time(&seq, 0, &packet, w, 400).unwrap(), Some(100));
}

#[test]
fn barrier_reflects_its_squared_modulus() {
    let packet = WavePacket::new(-400, 40.0, FRAC_PI_2).unwrap();
    let w = Window::new(-4096, 4096).unwrap();
    let barrier = CoefficientSequence::single_barrier(0, C64::new(0.9, 0.0)).unwrap();
    let r = reflection_probe(&barrier, 0, &packet, 6000, w, 100).unwrap();
    assert!(r.edge_contact);
    assert_eq!(r.steps, 2154);
    assert!((r.left_mass - 0.81).abs() < 1e-3, "{}", r.left_mass);
    assert!((r.left_mass + r.right_mass + r.escaped - 1.0).abs() < 1e-9);
    let free = reflection_probe(&CoefficientSequence::free(), 0, &packet, 6000, w, 0).unwrap();
    assert!(free.left_mass < 1e-6);
    assert!(r.left_mass > free.left_mass);
    let mut buf = Vec::new();
    write_series_csv(&r.series, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("step,left_mass,right_mass,escaped"));
    assert_eq!(text.lines().count(), r.series.len() + 1);
}

#[test]
fn mass_is_partitioned() {
    let seq = CoefficientSequence::random_decay(5, 0.4).unwrap();
    let w = Window::new(-200, 200).unwrap();
    let psi = WavePacket::new(-30, 6.0, 0.3).unwrap().state(w).unwrap();
    let psi = evolve(&truncate(&seq, w), &psi, 40).unwrap();
    let s = mass_split(w, 0, &psi);
    assert!((s.left_mass + s.right_mass + s.escaped - 1.0).abs() < 1e-12);
}

#[test]
fn probe_preconditions() {
    let seq = CoefficientSequence::free();
    let w = Window::new(-200, 200).unwrap();
    let straddling = WavePacket::new(0, 10.0, 0.0).unwrap();
    assert!(matches!(reflection_probe(&seq, 0, &straddling, 10, w, 1), Err(CmvError::NotLeftConcentrated { .. })));
    let packet = WavePacket::new(-100, 10.0, 0.0).unwrap();
    assert!(reflection_probe(&seq, 0, &packet, -1, w, 1).is_err());
    assert!(reflection_probe(&seq, 500, &packet, 10, w, 1).is_err());
    let u = truncate(&seq, Window::new(-60, 60).unwrap());
    let psi = WavePacket::new(-30, 3.0, FRAC_PI_2).unwrap().state(Window::new(-60, 60).unwrap()).unwrap();
    assert!(matches!(evolve(&u, &psi, 200), Err(CmvError::EdgeContact { .. })));
}
