use super::*;
use crate::constants::PhysicalConstants;
use crate::pilot::{EigenTerm, GlobalPhase, PilotSpec};
use crate::spectral::{make_grid, Grid};
use std::f64::consts::PI;

fn natural() -> PhysicalConstants<f64> {
    PhysicalConstants::natural()
}

fn coherent(a: f64) -> PilotWave<f64> {
    PilotWave::new(
        PilotSpec::CoherentState {
            omega: 1.0,
            amplitude: vec![a],
            phase_offsets: None,
            global_phase: GlobalPhase::Dynamical,
        },
        &natural(),
    )
    .unwrap()
}

fn plane(k: &[f64]) -> PilotWave<f64> {
    PilotWave::new(PilotSpec::PlaneWave { k: k.to_vec() }, &natural()).unwrap()
}

fn grid1(n: usize, l: f64) -> Grid<f64> {
    make_grid(1, &[n], &[l]).unwrap()
}

fn bulk(phi: &ComplexField<f64>, rel: f64) -> Vec<usize> {
    let m = phi.max_abs();
    (0..phi.values().len())
        .filter(|&i| phi.values()[i].norm() > rel * m)
        .collect()
}

#[test]
fn gaussian_self_term_is_quadratic() {
    let c = PhysicalConstants {
        hbar: 0.8,
        mass: 1.7,
        ..natural()
    };
    let a0 = 3.0;
    let g = make_grid(2, &[128], &[12.0]).unwrap();
    let phi = ComplexField::from_fn(g.clone(), |x: &Point<f64>| {
        Complex::new((-a0 * (x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0)
    });
    let pilot = PilotWave::new(PilotSpec::PlaneWave { k: vec![0.3, 1.0] }, &c).unwrap();
    let v = nonlinear_potential(&phi, &pilot, 0.4).unwrap();
    let pref = c.hbar * c.hbar / (2.0 * c.mass);
    for i in bulk(&phi, 1e-6) {
        let x = g.node(i);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let expected = pref * (a0 * a0 * r2 - 2.0 * a0);
        let tol = 1e-9 * (1.0 + expected.abs());
        assert!(
            (v.self_term[i] - expected).abs() < tol,
            "{} vs {expected}",
            v.self_term[i]
        );
        assert!(v.cross[i].abs() < 1e-14);
    }
}

#[test]
fn constant_soliton_has_no_self_term() {
    let g = grid1(64, 5.0);
    let phi = ComplexField::from_fn(g, |_: &Point<f64>| Complex::new(0.6, -0.8));
    let v = nonlinear_potential(&phi, &plane(&[1.0]), 0.0).unwrap();
    assert!(v.self_term.iter().all(|s| s.abs() < 1e-14));
}

/// Closed-form derivatives of a Gaussian soliton under a Gaussian pilot.
#[test]
fn matches_symbolic_oracle_for_gaussian_pilot() {
    let (s, sigma, off) = (0.4, 1.1, 0.5);
    let c = natural();
    let pilot = PilotWave::new(
        PilotSpec::FreeGaussian {
            sigma0: vec![sigma],
            center: vec![0.0],
            k0: vec![],
        },
        &c,
    )
    .unwrap();
    let g = grid1(512, 16.0);
    let phi = ComplexField::from_fn(g.clone(), |x: &Point<f64>| {
        Complex::new((-(x[0] - off).powi(2) / (2.0 * s * s)).exp(), 0.0)
    });
    let v = nonlinear_potential(&phi, &pilot, 0.0).unwrap();
    for i in bulk(&phi, 1e-3) {
        let x = g.node(i)[0];
        let dlog_phi = -(x - off) / (s * s);
        let lap_ratio = (x - off).powi(2) / s.powi(4) - 1.0 / (s * s);
        let dlog_r = -x / (2.0 * sigma * sigma);
        let oracle = dlog_r * dlog_phi + 0.5 * lap_ratio;
        assert!((v.values[i] - oracle).abs() < 1e-8, "x = {x}");
    }
}

#[test]
fn quantum_potential_difference_matches() {
    let c = natural();
    let pilot = PilotWave::new(
        PilotSpec::EigenstateSuperposition {
            omega: 1.0,
            terms: vec![
                EigenTerm {
                    n: vec![0],
                    coefficient: Complex::new(1.0, 0.0),
                },
                EigenTerm {
                    n: vec![1],
                    coefficient: Complex::new(0.3, 0.2),
                },
            ],
        },
        &c,
    )
    .unwrap();
    let g = grid1(512, 20.0);
    let phi = profiles::gaussian(&g, &[0.7, 0.0, 0.0], 0.3);
    let v = nonlinear_potential(&phi, &pilot, 0.8).unwrap();
    let q = quantum_potentials(&phi, &pilot, 0.8).unwrap();
    for i in bulk(&phi, 1e-3) {
        let diff = q.linear[i] - q.full[i];
        assert!((diff - v.values[i]).abs() < 1e-8, "{diff} vs {}", v.values[i]);
    }
}

#[test]
fn potential_is_scale_invariant() {
    let pilot = coherent(1.0);
    let g = grid1(256, 12.0);
    let phi = profiles::with_momentum(&profiles::gaussian(&g, &[0.3, 0.0, 0.0], 0.5), &[0.7, 0.0, 0.0]);
    let v = nonlinear_potential(&phi, &pilot, 0.2).unwrap();
    let phi2 = phi.scaled(Complex::new(-4.0e3, 1.5e2));
    let pilot2 = pilot.scaled(Complex::new(2.0e-3, -7.0)).unwrap();
    let w = nonlinear_potential(&phi2, &pilot2, 0.2).unwrap();
    assert_eq!(v.masked, w.masked);
    // Quotients by |phi| amplify roundoff by max|phi| / |phi|; beyond that
    // the two evaluations agree to a small multiple of the unit roundoff.
    let vmax = v.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let m = phi.max_abs();
    let mut worst: f64 = 0.0;
    for i in 0..v.values.len() {
        if v.masked[i] {
            continue;
        }
        let cond = m / phi.values()[i].norm();
        worst = worst.max((v.values[i] - w.values[i]).abs() / (f64::EPSILON * cond * vmax));
    }
    assert!(worst <= 100.0, "deviation {worst} ulps of the conditioned scale");
}

#[test]
fn coherent_pilot_transports_gaussian_rigidly() {
    let pilot = coherent(2.0);
    let g = grid1(256, 12.0);
    let phi = profiles::gaussian(&g, &[0.0; 3], 0.1);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    let n = 628;
    let dt = 2.0 * PI / n as f64;
    let (s1, samples) = evolve_soliton_sampled(&s0, dt, n, 20).unwrap();
    for smp in &samples {
        let expected = -2.0 + 2.0 * smp.t.cos();
        assert!((smp.x0[0] - expected).abs() < 1e-9, "t = {}", smp.t);
        assert!(smp.shape_error < 1e-3);
    }
    let err = shape_error(s1.field(), s0.field(), &[0.0; 3]).unwrap();
    assert!(err < 1e-6, "final shape error {err}");
    assert!((s1.norm_sqr() / s0.norm_sqr() - 1.0).abs() < 1e-10);
}

#[test]
fn coherent_pilot_keeps_real_soliton_real() {
    let pilot = coherent(1.5);
    let g = grid1(256, 12.0);
    let phi = profiles::sech(&g, &[0.0; 3], 0.15);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    let s1 = evolve_soliton(&s0, 2.0 * PI / 400.0, 400).unwrap();
    let f = s1.field();
    let k = f.argmax();
    let ph = f.values()[k] / f.values()[k].norm();
    let max_im = f.values().iter().fold(0.0f64, |m, z| m.max((z / ph).im.abs()));
    assert!(max_im / f.max_abs() < 1e-6, "{max_im}");
}

#[test]
fn plane_pilot_translates_at_group_velocity() {
    let pilot = plane(&[1.3]);
    let g = grid1(256, 20.0);
    let phi = profiles::sech(&g, &[-3.0, 0.0, 0.0], 0.4);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    let s1 = evolve_soliton(&s0, 0.01, 300).unwrap();
    let x = s1.barycentre().unwrap()[0];
    assert!((x - (-3.0 + 1.3 * 3.0)).abs() < 1e-10, "x = {x}");
    assert!((s1.norm_sqr() / s0.norm_sqr() - 1.0).abs() < 1e-8);
    assert!(shape_error(s1.field(), s0.field(), &[3.9, 0.0, 0.0]).unwrap() < 1e-6);
}

#[test]
fn real_pilot_leaves_symmetric_soliton_at_rest() {
    let pilot = PilotWave::new(
        PilotSpec::EigenstateSuperposition {
            omega: 1.0,
            terms: vec![EigenTerm {
                n: vec![0],
                coefficient: Complex::new(1.0, 0.0),
            }],
        },
        &natural(),
    )
    .unwrap();
    let g = grid1(256, 12.0);
    let phi = profiles::gaussian(&g, &[0.4, 0.0, 0.0], 0.2);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    let s1 = evolve_soliton(&s0, 1e-3, 1000).unwrap();
    let x = s1.barycentre().unwrap()[0];
    assert!((x - 0.4).abs() < 1e-6);
}

#[test]
fn self_term_does_not_accelerate_a_symmetric_soliton() {
    let pilot = plane(&[0.0]);
    let g = grid1(512, 16.0);
    let phi = profiles::sech(&g, &[1.3, 0.0, 0.0], 0.5);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    let dt = 1e-3;
    let (_, samples) = evolve_soliton_sampled(&s0, dt, 300, 100).unwrap();
    for w in samples.windows(3) {
        let span = w[1].t - w[0].t;
        let acc = (w[2].x0[0] - 2.0 * w[1].x0[0] + w[0].x0[0]) / (span * span);
        assert!(acc.abs() < 1e-8, "acceleration {acc}");
    }
}

#[test]
fn boosted_soliton_moves_at_pilot_plus_internal_velocity() {
    let g = grid1(256, 20.0);
    let phi = profiles::with_momentum(&profiles::gaussian(&g, &[-2.0, 0.0, 0.0], 0.5), &[0.4, 0.0, 0.0]);
    let pilot = plane(&[0.9]);
    let s0 = SolitonState::new(phi, 0.0, pilot.clone()).unwrap();
    let (s1, samples) = evolve_soliton_sampled(&s0, 0.005, 400, 20).unwrap();
    let r = norm_evolution_check(&samples, &pilot).unwrap();
    assert!(r.max_norm_drift < 1e-8, "{r:?}");
    let x = s1.barycentre().unwrap()[0];
    assert!((x - (-2.0 + 1.3 * 2.0)).abs() < 1e-9, "barycentre {x}");
    for smp in samples.iter().skip(1) {
        let d = smp.drift.unwrap();
        assert!((d.v_int[0] - 0.4).abs() < 1e-10, "v_int {}", d.v_int[0]);
        assert!(d.residual < 1e-8, "residual {}", d.residual);
    }
    let err = shape_error(s1.field(), s0.field(), &[2.6, 0.0, 0.0]).unwrap();
    assert!(err < 1e-8, "shape error {err}");
}

#[test]
fn internal_velocity_examples() {
    let g = grid1(512, 20.0);
    let phi = profiles::sech(&g, &[0.5, 0.0, 0.0], 0.4);
    let s = SolitonState::new(phi.clone(), 0.0, plane(&[0.0])).unwrap();
    assert!(s.v_internal().unwrap()[0].abs() < 1e-15);

    let c = PhysicalConstants {
        hbar: 0.5,
        mass: 2.0,
        ..natural()
    };
    let pilot = PilotWave::new(PilotSpec::PlaneWave { k: vec![0.0] }, &c).unwrap();
    let boosted = profiles::with_momentum(&profiles::gaussian(&g, &[0.0; 3], 0.7), &[1.7, 0.0, 0.0]);
    let s = SolitonState::new(boosted, 0.0, pilot).unwrap();
    assert!((s.v_internal().unwrap()[0] - 0.5 * 1.7 / 2.0).abs() < 1e-12);
}

#[test]
fn drift_decomposition_closes_on_coherent_run() {
    let pilot = coherent(2.0);
    let g = grid1(256, 12.0);
    let phi = profiles::gaussian(&g, &[0.0; 3], 0.1);
    let s0 = SolitonState::new(phi, 0.0, pilot).unwrap();
    assert!(drift_decomposition(&s0).is_err());
    let (_, samples) = evolve_soliton_sampled(&s0, 1e-3, 3000, 50).unwrap();
    for smp in samples.iter().skip(1) {
        let d = smp.drift.unwrap();
        let vd = d.v_drift[0].abs();
        assert!(
            d.residual < 1e-4 * vd,
            "t = {} residual {} v {}",
            d.time,
            d.residual,
            vd
        );
        assert!(d.v_int[0].abs() < 1e-10);
    }
}

#[test]
fn plane_pilot_conserves_norm() {
    let g = grid1(256, 20.0);
    let phi = profiles::sech(&g, &[-2.0, 0.0, 0.0], 0.5);
    let pilot = plane(&[0.9]);
    let s0 = SolitonState::new(phi, 0.0, pilot.clone()).unwrap();
    let (_, samples) = evolve_soliton_sampled(&s0, 0.01, 200, 10).unwrap();
    let r = norm_evolution_check(&samples, &pilot).unwrap();
    assert!(r.max_norm_drift < 1e-8, "{r:?}");
}

#[test]
fn spreading_pilot_obeys_norm_rate_law() {
    let c = natural();
    let pilot = PilotWave::new(
        PilotSpec::FreeGaussian {
            sigma0: vec![1.0],
            center: vec![0.0],
            k0: vec![],
        },
        &c,
    )
    .unwrap();
    let g = grid1(512, 8.0);
    let phi = profiles::gaussian(&g, &[1.0, 0.0, 0.0], 0.05);
    let s0 = SolitonState::new(phi, 0.0, pilot.clone()).unwrap();
    let (_, samples) = evolve_soliton_sampled(&s0, 2e-3, 500, 25).unwrap();
    let r = norm_evolution_check(&samples, &pilot).unwrap();
    assert!(r.max_rate_deviation < 0.05, "{r:?}");
    assert!(r.max_ratio_deviation < 0.02, "{r:?}");
    assert!(r.max_norm_drift > 0.1);
}

#[test]
fn wide_soliton_triggers_breach_warning() {
    let g = grid1(256, 16.0);
    let phi = profiles::gaussian(&g, &[0.0; 3], 0.5);
    let s = SolitonState::new(phi, 0.0, coherent(1.0)).unwrap();
    assert!(s.width_ratio() > 0.2);
    assert!(matches!(
        s.warnings().first(),
        Some(Warning::ApproximationBreach { .. })
    ));
}

#[test]
fn rejects_empty_history() {
    let pilot = plane(&[1.0]);
    assert!(matches!(
        norm_evolution_check(&[], &pilot),
        Err(Error::InsufficientHistory { needed: 3, got: 0 })
    ));
}
