//! Module invariants: exact coefficient identities over the full index
//! range, quadrature orthonormality of the basis, parity bookkeeping,
//! spectral tail decay and small-data linearization.

use proptest::prelude::*;

use degregorio::coefficients::{a_coeff, d_coeff, diff_coeff, eps_coeff};
use degregorio::field::FourierField;
use degregorio::linear::{self, evolve_linear, LinearRunConfig};
use degregorio::nonlinear::{NonlinearState, PseudoSpectral, SolverConfig};
use degregorio::rational::{rat, rat_int, to_f64, Rational};
use degregorio::series::TildeSeries;

#[test]
fn coefficient_identities_full_range() {
    // diff_k = d_k - d_{k+2} and ε_k = -2 d_{k+2}^2 + d_k d_{k+2} + d_{k+2} d_{k+4}
    // exactly for 1 <= k <= 1e5, with the form matrix positive definite and
    // |diff_k| inside [3/8, 11/18].
    let bound_lo = rat(3, 8);
    let bound_hi = rat(11, 18);
    let zero = rat_int(0);
    let mut d: [Rational; 5] = [
        d_coeff(1),
        d_coeff(2),
        d_coeff(3),
        d_coeff(4),
        d_coeff(5),
    ];
    for k in 1..=100_000u32 {
        let diff = diff_coeff(k);
        assert_eq!(diff, &d[0] - &d[2], "diff identity at k = {k}");
        let eps = eps_coeff(k);
        assert_eq!(
            eps,
            rat_int(-2) * &d[2] * &d[2] + &d[0] * &d[2] + &d[2] * &d[4],
            "eps identity at k = {k}"
        );
        // positive definiteness via exact minors
        let a = &diff * &diff;
        let dd = diff_coeff(k + 2);
        let a2 = &dd * &dd;
        assert!(a > zero && &a * &a2 - &eps * &eps > zero, "A_{k} not positive definite");
        // |diff| bracket
        let abs = if diff < zero { -diff } else { diff };
        assert!(abs >= bound_lo && abs <= bound_hi, "bracket at k = {k}");

        d.rotate_left(1);
        d[4] = d_coeff(k + 5);
    }
}

#[test]
fn a_coeff_quarter_asymptotic() {
    // |a_k - 1/4| <= C / k^2 with C fitted once and stable under doubling.
    let dev = |k: u32| (to_f64(&a_coeff(k)) - 0.25).abs();
    let c = dev(100) * 100.0 * 100.0;
    for k in [200u32, 400, 800, 1600, 3200] {
        let ck = dev(k) * (k as f64) * (k as f64);
        assert!(
            (ck / c - 1.0).abs() < 0.2,
            "C drifted at k = {k}: {ck} vs {c}"
        );
        assert!(dev(k) <= 1.2 * c / (k as f64 * k as f64));
    }
}

#[test]
fn tilde_basis_gram_matrix_by_quadrature() {
    // ∂_θ ẽ_k = cos((k+2)θ) - cos(kθ); midpoint quadrature of
    // ρ ∂ẽ_k ∂ẽ_l over panels avoiding the singular nodes must reproduce
    // the identity matrix.
    let panels = 4096usize;
    let h = 2.0 * std::f64::consts::PI / panels as f64;
    let d_tilde = |k: u32, theta: f64| {
        ((k + 2) as f64 * theta).cos() - (k as f64 * theta).cos()
    };
    for k in 1..=32u32 {
        for l in k..=32u32 {
            let mut sum = 0.0;
            for i in 0..panels {
                let theta = -std::f64::consts::PI + (i as f64 + 0.5) * h;
                let s = theta.sin();
                sum += d_tilde(k, theta) * d_tilde(l, theta)
                    / (4.0 * std::f64::consts::PI * s * s);
            }
            sum *= h;
            let want = if k == l { 1.0 } else { 0.0 };
            assert!(
                (sum - want).abs() < 1e-8,
                "Gram({k},{l}) = {sum} vs {want}"
            );
        }
    }
}

#[test]
fn spectral_tail_decays_faster_than_k4() {
    // smooth low-mode data: max_t |η_k(t)| below C k^{-4} at fixed T
    let traj = evolve_linear(
        &TildeSeries::unit(1, 4),
        &LinearRunConfig {
            t_final: 5.0,
            dt: 1e-3,
            n: 128,
            snapshot_every: 100,
        },
    )
    .unwrap();
    let mut max_abs = vec![0.0_f64; 129];
    for (_, snap) in &traj.snapshots {
        for k in 1..=128u32 {
            max_abs[k as usize] = max_abs[k as usize].max(snap.coeff(k).abs());
        }
    }
    let c = max_abs[16] * (16.0_f64).powi(4);
    for k in [32usize, 64, 96, 127] {
        assert!(
            max_abs[k] <= c / (k as f64).powi(4),
            "mode {k}: {} exceeds C k^-4 = {}",
            max_abs[k],
            c / (k as f64).powi(4)
        );
    }
}

#[test]
fn energy_identity_second_order_in_dt() {
    // centered difference of the energy matches 2*rayleigh with O(dt^2)
    let run = |dt: f64| {
        let traj = evolve_linear(
            &TildeSeries::new(vec![0.4, -0.2, 0.35]),
            &LinearRunConfig {
                t_final: 0.2,
                dt,
                n: 64,
                snapshot_every: 0,
            },
        )
        .unwrap();
        let mid = traj.times.len() / 2;
        let fd = (traj.energy[mid + 1] - traj.energy[mid - 1]) / (2.0 * dt);
        (fd - 2.0 * traj.rayleigh[mid]).abs()
    };
    let e1 = run(4e-3);
    let e2 = run(2e-3);
    assert!(e2 < e1 / 3.0, "fd error did not shrink ~4x: {e1} vs {e2}");
}

#[test]
fn small_data_linearization_is_first_order() {
    // sup_t ||η_nonlinear - η_linear|| / ε shrinks like ε
    let cfg = SolverConfig {
        m: 256,
        modes: 85,
        ..SolverConfig::default()
    };
    let eta0 = TildeSeries::new(vec![1.0, -0.5, 0.25]);
    let lin = evolve_linear(
        &eta0,
        &LinearRunConfig {
            t_final: 1.0,
            dt: cfg.dt,
            n: 128,
            snapshot_every: 100,
        },
    )
    .unwrap();

    let deviation = |eps: f64| -> f64 {
        let solver = PseudoSpectral::new(cfg.clone()).unwrap();
        let mut state =
            NonlinearState::perturbation(eta0.scaled(eps).resized(cfg.tilde_truncation()));
        let mut worst = 0.0_f64;
        for step in 1..=1000usize {
            solver.step(&mut state).unwrap();
            if step % 100 == 0 {
                let snap_idx = step / 100;
                let (_, lin_state) = &lin.snapshots[snap_idx];
                if let degregorio::nonlinear::StateVector::Perturbation(eta) = &state.vector {
                    let mut diff = 0.0;
                    for k in 1..=128u32 {
                        let d = eta.coeff(k) - eps * lin_state.coeff(k);
                        diff += d * d;
                    }
                    worst = worst.max(diff.sqrt() / eps);
                }
            }
        }
        worst
    };
    let d3 = deviation(1e-3);
    let d4 = deviation(1e-4);
    let ratio = d3 / d4;
    assert!(
        (4.0..=25.0).contains(&ratio),
        "deviation/ε not first order in ε: {d3:.3e} vs {d4:.3e} (ratio {ratio:.2})"
    );
}

proptest! {
    #[test]
    fn hilbert_swaps_parity(odd in proptest::collection::vec(-1.0f64..1.0, 8),
                            even in proptest::collection::vec(-1.0f64..1.0, 8)) {
        // odd field (pure sine) -> even (pure cosine), and conversely
        let mut f = FourierField::zeros(8);
        f.sin.copy_from_slice(&odd);
        let h = f.hilbert();
        prop_assert!(h.sin.iter().all(|&s| s == 0.0));
        prop_assert_eq!(h.mean, 0.0);

        let mut g = FourierField::zeros(8);
        g.cos.copy_from_slice(&even);
        g.mean = 0.3;
        let h = g.hilbert();
        prop_assert!(h.cos.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn velocity_preserves_odd_even_frequency_structure(
        amps in proptest::collection::vec(-1.0f64..1.0, 4)
    ) {
        // ω odd with only even frequencies -> u odd with only even frequencies
        let mut omega = FourierField::zeros(8);
        for (i, &a) in amps.iter().enumerate() {
            omega.sin[2 * i + 1] = a; // frequencies 2, 4, 6, 8
        }
        let u = omega.velocity();
        prop_assert_eq!(u.even_part_mass(), 0.0);
        prop_assert_eq!(u.odd_frequency_sine_mass(), 0.0);
        prop_assert!((u.eval(0.0)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_tilde_sine_tilde(coeffs in proptest::collection::vec(-10.0f64..10.0, 1..48)) {
        let eta = TildeSeries::new(coeffs);
        let proj = degregorio::series::sine_to_tilde(&degregorio::series::tilde_to_sine(&eta));
        prop_assert!(proj.residual <= 1e-12 * eta.hdw_norm().max(1.0));
        for k in 1..=eta.len() as u32 {
            prop_assert!((proj.series.coeff(k) - eta.coeff(k)).abs() <= 1e-12);
        }
    }

    #[test]
    fn even_family_production_bound(amps in proptest::collection::vec(-2.0f64..2.0, 1..6)) {
        // ⟨-Lη,η⟩ <= -(3/8)||η||^2 on the even family
        let pairs: Vec<(u32, f64)> = amps.iter().enumerate()
            .map(|(i, &a)| (2 * (i as u32 + 1), a))
            .collect();
        prop_assume!(pairs.iter().any(|(_, a)| *a != 0.0));
        let eta = linear::build_initial_data(&linear::InitialData::even_family(&pairs)).unwrap();
        let r = linear::rayleigh(&eta);
        prop_assert!(r <= -0.375 * eta.hdw_norm_sq() + 1e-12);
    }

    #[test]
    fn two_mode_window_controls_production(pos in 0.0f64..1.0, k in 2u32..12) {
        let (lo, hi) = linear::two_mode_window(k, 1.0);
        let ak = (lo + pos * (hi - lo)).max(0.0).sqrt();
        prop_assume!(ak > 0.0);
        let eta = linear::build_initial_data(
            &linear::InitialData::two_mode(1.0, k, ak, true)).unwrap();
        linear::check_instability_hypothesis(&eta).unwrap();
    }
}
