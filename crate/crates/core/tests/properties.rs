use std::f64::consts::TAU;

use dsl_core::gaussian::{integrate_params, GaussianSolitonParams};
use dsl_core::gravity::{
    final_state_soliton, final_state_standard, single_device_dephasing, sphere_potential, theta_soliton,
    theta_standard, ExperimentConfig, SelfGravitySphere,
};
use dsl_core::guidance::{integrate_trajectory, ks_statistic, Ensemble, Sampling};
use dsl_core::pilot::{EigenTerm, GlobalPhase, PilotSpec, PilotWave};
use dsl_core::soliton::{nonlinear_potential, profiles};
use dsl_core::spectral::{make_grid, ComplexField, Spectral};
use dsl_core::Constants;
use num_complex::Complex;
use proptest::prelude::*;

fn coherent(amplitude: f64, offset: f64) -> PilotWave<f64> {
    PilotWave::new(
        PilotSpec::CoherentState {
            omega: 1.0,
            amplitude: vec![amplitude],
            phase_offsets: Some(vec![offset]),
            global_phase: GlobalPhase::Dynamical,
        },
        &Constants::natural(),
    )
    .unwrap()
}

fn superposition(c1: Complex<f64>, c2: Complex<f64>) -> PilotWave<f64> {
    let terms = [(0, Complex::new(1.0, 0.0)), (1, c1), (2, c2)]
        .into_iter()
        .map(|(n, coefficient)| EigenTerm {
            n: vec![n],
            coefficient,
        })
        .collect();
    PilotWave::new(
        PilotSpec::EigenstateSuperposition { omega: 1.0, terms },
        &Constants::natural(),
    )
    .unwrap()
}

fn complex() -> impl Strategy<Value = Complex<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

fn unit_spinor() -> impl Strategy<Value = (Complex<f64>, Complex<f64>)> {
    (0.0..std::f64::consts::PI, 0.0..TAU, 0.0..TAU).prop_map(|(theta, pa, pb)| {
        (
            Complex::from_polar((theta / 2.0).cos(), pa),
            Complex::from_polar((theta / 2.0).sin(), pb),
        )
    })
}

prop_compose! {
    fn experiment()(
        m in 1e-15..1e-13f64,
        r in 1e-7..1e-6f64,
        d in proptest::array::uniform4(3.0..300.0f64),
        intra in proptest::array::uniform2(3.0..300.0f64),
        tau in 0.1..5.0f64,
        a in unit_spinor(),
        b in unit_spinor(),
    ) -> ExperimentConfig<f64> {
        ExperimentConfig {
            m_a: m,
            m_b: 1.3 * m,
            r_a: r,
            r_b: r,
            tau,
            d: [[d[0] * r, d[1] * r], [d[2] * r, d[3] * r]],
            d_intra_a: Some(intra[0] * r),
            d_intra_b: Some(intra[1] * r),
            alpha_a: a.0,
            beta_a: a.1,
            alpha_b: b.0,
            beta_b: b.1,
            branch_probs: None,
        }
    }
}

proptest! {
    #[test]
    fn grid_spacing_is_length_over_points(exp in 3u32..10, length in 0.1..100.0f64) {
        let points = 1usize << exp;
        let g = make_grid(1, &[points], &[length]).unwrap();
        prop_assert_eq!(g.spacing()[0], length / points as f64);
        prop_assert_eq!(g.len(), points);
    }

    #[test]
    fn grids_below_eight_points_are_rejected(points in 0usize..8) {
        prop_assert!(make_grid(1, &[points], &[1.0]).is_err());
    }

    #[test]
    fn non_positive_lengths_are_rejected(length in -10.0..=0.0f64) {
        prop_assert!(make_grid(1, &[16], &[length]).is_err());
    }

    #[test]
    fn translation_round_trips(shift in -3.0..3.0f64, center in -1.0..1.0f64) {
        let g = make_grid(1, &[128], &[16.0]).unwrap();
        let f = profiles::gaussian(&g, &[center, 0.0, 0.0], 0.6);
        let sp = Spectral::new(&g);
        let mut v = f.values().to_vec();
        sp.translate(&mut v, &[shift, 0.0, 0.0]);
        sp.translate(&mut v, &[-shift, 0.0, 0.0]);
        let back = ComplexField::new(g.clone(), v).unwrap();
        prop_assert!(back.l2_distance(&f).unwrap() < 1e-13 * f.l2_norm());
    }

    #[test]
    fn pilot_amplitude_is_non_negative(c1 in complex(), c2 in complex(), t in 0.0..10.0f64, x in -4.0..4.0f64) {
        let p = superposition(c1, c2);
        let pd = p.phase_data_unchecked(t, &[x, 0.0, 0.0]);
        if let Ok(pd) = pd {
            prop_assert!(pd.amplitude >= 0.0);
            prop_assert!(pd.amplitude.is_finite());
        }
    }

    #[test]
    fn coherent_guidance_is_uniform(amplitude in 0.0..3.0f64, offset in 0.0..TAU, t in 0.0..10.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64) {
        // Uniform velocity fields keep pairwise distances fixed.
        let p = coherent(amplitude, offset);
        let v1 = p.guidance_velocity(t, &[x, 0.0, 0.0]).unwrap()[0];
        let v2 = p.guidance_velocity(t, &[y, 0.0, 0.0]).unwrap()[0];
        prop_assert!((v1 - v2).abs() <= 1e-12 * (1.0 + v1.abs()));
        let expect = -amplitude * (t + offset).sin();
        prop_assert!((v1 - expect).abs() <= 1e-12 * (1.0 + amplitude));
    }

    #[test]
    fn guidance_velocity_ignores_pilot_scale(c1 in complex(), mag in -6.0..6.0f64, arg in 0.0..TAU, t in 0.0..5.0f64, x in -2.0..2.0f64) {
        let p = superposition(c1, Complex::new(0.2, -0.1));
        let q = p.scaled(Complex::from_polar(10f64.powf(mag), arg)).unwrap();
        if let (Ok(a), Ok(b)) = (p.guidance_velocity(t, &[x, 0.0, 0.0]), q.guidance_velocity(t, &[x, 0.0, 0.0])) {
            prop_assert!((a[0] - b[0]).abs() <= 1e-13 * (1.0 + a[0].abs()));
        }
    }

    #[test]
    fn real_soliton_potential_is_real_and_scale_free(mag in -6.0..6.0f64, arg in 0.0..TAU, center in -1.0..1.0f64) {
        let g = make_grid(1, &[128], &[12.0]).unwrap();
        let phi = profiles::gaussian(&g, &[center, 0.0, 0.0], 0.5);
        let p = coherent(1.0, 0.0);
        let v = nonlinear_potential(&phi, &p, 0.4).unwrap();
        let w = nonlinear_potential(&phi.scaled(Complex::from_polar(10f64.powf(mag), arg)), &p, 0.4).unwrap();
        let vmax = v.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let m = phi.max_abs();
        for i in 0..v.values.len() {
            prop_assert!(v.values[i].is_finite());
            if !v.masked[i] {
                let cond = m / phi.values()[i].norm();
                prop_assert!((v.values[i] - w.values[i]).abs() <= 100.0 * f64::EPSILON * cond * vmax);
            }
        }
    }

    #[test]
    fn ks_statistic_is_a_distance(xs in proptest::collection::vec(-5.0..5.0f64, 1..200)) {
        let d = ks_statistic(&xs, |x| 1.0 / (1.0 + (-x).exp()));
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn sphere_potential_grows_with_distance(m in 1e-16..1e-12f64, r in 1e-7..1e-5f64, s1 in 0.0..10.0f64, s2 in 0.0..10.0f64) {
        let sphere = SelfGravitySphere::new(m, r).unwrap();
        let c = Constants::si(m);
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let a = sphere_potential(&sphere, lo * r, &c).unwrap();
        let b = sphere_potential(&sphere, hi * r, &c).unwrap();
        prop_assert!(a <= b);
        prop_assert!(b < 0.0);
    }

    #[test]
    fn phases_are_linear_in_tau_and_g(cfg in experiment(), k in 1.5..4.0f64) {
        let c = Constants::si(cfg.m_a);
        let scaled_tau = ExperimentConfig { tau: cfg.tau * k, ..cfg.clone() };
        let scaled_g = Constants { g: c.g * k, ..c };
        let base = theta_standard(&cfg, &c).unwrap();
        let by_tau = theta_standard(&scaled_tau, &c).unwrap();
        let by_g = theta_standard(&cfg, &scaled_g).unwrap();
        let sol = theta_soliton(&cfg, 0, 1, &c).unwrap();
        let sol_tau = theta_soliton(&scaled_tau, 0, 1, &c).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((by_tau[i][j] - k * base[i][j]).abs() <= 1e-13 * by_tau[i][j].abs());
                prop_assert!((by_g[i][j] - k * base[i][j]).abs() <= 1e-13 * by_g[i][j].abs());
                prop_assert!((sol_tau[i][j] - k * sol[i][j]).abs() <= 1e-13 * sol_tau[i][j].abs());
            }
        }
    }

    #[test]
    fn dephasing_exceeds_the_exterior_floor(cfg in experiment()) {
        let c = Constants::si(cfg.m_a);
        let sphere = SelfGravitySphere::new(cfg.m_a, cfg.r_a).unwrap();
        let d = single_device_dephasing(&sphere, cfg.d[0][0], cfg.tau, cfg.alpha_a, cfg.beta_a, &c).unwrap();
        let floor = cfg.tau * c.g * cfg.m_a * cfg.m_a / (2.0 * c.hbar * cfg.r_a);
        prop_assert!(d.magnitude > floor);
        prop_assert_eq!(d.outcomes[0].0, -d.outcomes[1].0);
        prop_assert!((d.outcomes[0].1 + d.outcomes[1].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_matrices_are_physical(cfg in experiment()) {
        let c = Constants::si(cfg.m_a);
        let std = final_state_standard(&cfg, &c).unwrap();
        let sol = final_state_soliton(&cfg, None, &c).unwrap();
        for rho in [&std, &sol] {
            prop_assert!((rho.trace() - Complex::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(rho.eigenvalues().iter().all(|l| *l >= -1e-12));
            prop_assert!(rho.purity() <= 1.0 + 1e-12);
            prop_assert!(rho.negativity() >= 0.0);
        }
        prop_assert!((std.purity() - 1.0).abs() < 1e-12);
        let f = std.fidelity(&sol);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_width_is_a_fixed_point(a0 in 4.0..100.0f64, x0 in -2.0..2.0f64, amplitude in 0.0..2.5f64) {
        let p = coherent(amplitude, 0.0);
        let start = GaussianSolitonParams::real(&[a0], &[x0], 0.0).unwrap();
        let hist = integrate_params(&start, &p, 3.0, 5e-3).unwrap();
        prop_assert!(hist.max_a_drift <= 1e-12 * a0);
        for s in &hist.samples {
            prop_assert!(s.barycentre()[0].is_finite());
        }
        let end = hist.samples.last().unwrap();
        let expect = x0 - amplitude + amplitude * 3.0f64.cos();
        prop_assert!((end.barycentre()[0] - expect).abs() < 1e-8);
    }

    #[test]
    fn trajectory_times_increase(c1 in complex(), x0 in -1.5..1.5f64) {
        let p = superposition(c1, Complex::new(0.3, 0.1));
        if let Ok(tr) = integrate_trajectory(&p, &[x0, 0.0, 0.0], 0.0, 2.0, 0.01) {
            prop_assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(tr.positions.iter().all(|x| x[0].is_finite()));
            prop_assert!((tr.times.last().unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ensembles_are_seeded_and_prefix_stable(seed in any::<u64>(), n in 1usize..300, extra in 0usize..50) {
        let p = coherent(1.0, 0.0);
        let sampling = Sampling::Born { lo: vec![-5.0], hi: vec![5.0], cells: vec![100] };
        let a = Ensemble::sample(&p, sampling.clone(), n, 0.0, seed).unwrap();
        let b = Ensemble::sample(&p, sampling.clone(), n + extra, 0.0, seed).unwrap();
        let again = Ensemble::sample(&p, sampling, n, 0.0, seed).unwrap();
        prop_assert_eq!(&a.positions, &again.positions);
        prop_assert_eq!(&a.positions[..], &b.positions[..n]);
        prop_assert!(a.positions.iter().all(|x| (-5.0..5.0).contains(&x[0])));
    }
}
