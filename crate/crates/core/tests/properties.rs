use proptest::prelude::*;

use singlet_core::curve::{ScanCurve, ScanType};
use singlet_core::experiments::{add_noise, dip_scan, duration_scan};
use singlet_core::fitting::{fit_curve, FitModel};
use singlet_core::io::{curve_from_csv, curve_to_csv};
use singlet_core::rate::{
    level_energy, m2s_efficiency, m2s_efficiency_refined, slic_efficiency, slic_efficiency_refined, stage_trace,
    TransferStage,
};
use singlet_core::sequence::{optimal_slic_duration, PulseSequence, RecordPoints, SequenceElement};
use singlet_core::spin::{hamiltonian, DensityState, SpinSystem};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn evolution_keeps_states_physical(
        j in 1.0f64..30.0,
        dnu in 0.1f64..5.0,
        nu in 0.0f64..40.0,
        phase in 0.0f64..std::f64::consts::TAU,
        t in 0.0f64..2.0,
        third in proptest::option::of((50.0f64..300.0, 0.0f64..10.0, 0.0f64..10.0)),
    ) {
        let system = match third {
            Some((offset, j13, j23)) => SpinSystem::pair_with_third(j, dnu, offset, j13, j23).unwrap(),
            None => SpinSystem::pair(j, dnu).unwrap(),
        };
        let h = hamiltonian(&system, nu, phase).unwrap();
        let asym = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(asym < 1e-12);

        let rho = DensityState::thermal(system.n_spins(), 0.01).unwrap()
            .apply_hard_pulse(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).unwrap();
        let later = rho.propagate(&h, t).unwrap();
        later.validate().unwrap();
        prop_assert!((later.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((later.purity() - rho.purity()).abs() < 1e-12);
        prop_assert!(later.eigenvalues().iter().all(|&e| e > -1e-12));
    }

    #[test]
    fn rate_model_is_dissipative(
        rabi in 0.1f64..5.0,
        t_source in 0.05f64..10.0,
        t_dest in 0.05f64..100.0,
        periods in 0.1f64..3.0,
    ) {
        let stage = TransferStage::new(rabi, t_source, t_dest, periods / rabi).unwrap();
        let trace = stage_trace(1.0, &stage).unwrap();
        for pair in trace.windows(2) {
            let (before, after) = (level_energy(pair[0].1), level_energy(pair[1].1));
            prop_assert!(after <= before * (1.0 + 1e-12) + 1e-15, "{before} -> {after}");
            let pops = |l: [f64; 3]| l[0] + l[1];
            prop_assert!(pops(pair[1].1) <= pops(pair[0].1) + 1e-12);
        }
    }

    #[test]
    fn step_halving_converges(t1_dnu in 0.05f64..20.0, ratio in 1.0f64..1000.0) {
        let ts = ratio * t1_dnu;
        let coarse = slic_efficiency(t1_dnu, ts, 1.0, false).unwrap();
        let fine = slic_efficiency_refined(t1_dnu, ts, 1.0, false, 2).unwrap();
        prop_assert!((coarse - fine).abs() < 1e-4);
        let coarse = m2s_efficiency(t1_dnu, ts, 1.0, None).unwrap();
        let fine = m2s_efficiency_refined(t1_dnu, ts, 1.0, None, 2).unwrap();
        prop_assert!((coarse - fine).abs() < 1e-4);
    }

    #[test]
    fn efficiencies_are_bounded_and_ordered(t1_dnu in 0.01f64..100.0, ratio in 1.0f64..1e4) {
        let ts = ratio * t1_dnu;
        let slic = slic_efficiency(t1_dnu, ts, 1.0, false).unwrap();
        let m2s = m2s_efficiency(t1_dnu, ts, 1.0, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&slic));
        prop_assert!((0.0..=1.0).contains(&m2s));
        prop_assert!(slic >= m2s);
    }

    #[test]
    fn efficiency_depends_only_on_t1_times_dnu(t1_dnu in 0.05f64..20.0, dnu in 0.5f64..10.0) {
        let a = slic_efficiency(t1_dnu, 3.0 * t1_dnu, 1.0, false).unwrap();
        let b = slic_efficiency(t1_dnu / dnu, 3.0 * t1_dnu / dnu, dnu, false).unwrap();
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn lorentzian_fit_is_scale_invariant(
        center in 16.0f64..19.0,
        width in 0.5f64..2.0,
        depth in 0.2f64..0.8,
        scale in 0.01f64..100.0,
    ) {
        let x: Vec<f64> = (0..81).map(|k| 12.5 + 0.125 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - depth / (1.0 + ((v - center) / width).powi(2))).collect();
        let base = fit_curve(&ScanCurve::new(ScanType::Dip, x.clone(), y.clone()).unwrap(), FitModel::Lorentzian).unwrap();
        let scaled_y: Vec<f64> = y.iter().map(|v| v * scale).collect();
        let scaled = fit_curve(&ScanCurve::new(ScanType::Dip, x, scaled_y).unwrap(), FitModel::Lorentzian).unwrap();
        prop_assert!((base.param("center") - center).abs() < 1e-6);
        prop_assert!((scaled.param("center") - base.param("center")).abs() < 1e-8);
        prop_assert!((scaled.param("depth") / scale - base.param("depth")).abs() < 1e-6);
        let rel = |f: &singlet_core::fitting::FitResult| f.derived("relative_depth").unwrap();
        prop_assert!((rel(&scaled) - rel(&base)).abs() < 1e-6);
    }

    #[test]
    fn exponential_fit_is_time_scale_invariant(lifetime in 1.0f64..100.0, stretch in 0.1f64..10.0) {
        let x: Vec<f64> = (0..13).map(|k| 5.0 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 0.4 * (-t / lifetime).exp()).collect();
        let base = fit_curve(&ScanCurve::new(ScanType::Evolve, x.clone(), y.clone()).unwrap(), FitModel::Exponential).unwrap();
        let sx: Vec<f64> = x.iter().map(|t| t * stretch).collect();
        let stretched = fit_curve(&ScanCurve::new(ScanType::Evolve, sx, y).unwrap(), FitModel::Exponential).unwrap();
        let tb = base.derived("lifetime").unwrap();
        let ts = stretched.derived("lifetime").unwrap();
        prop_assert!((tb - lifetime).abs() / lifetime < 1e-8);
        prop_assert!((ts / stretch - tb).abs() / tb < 1e-8);
    }

    #[test]
    fn sequences_round_trip_through_json(
        flips in proptest::collection::vec((0.0f64..6.3, 0.0f64..6.3, 0.0f64..0.5, 1u32..6), 0..6),
        points in 1usize..600,
    ) {
        let mut elements = Vec::new();
        for (flip, phase, t, count) in flips {
            elements.push(SequenceElement::HardPulse { flip, phase });
            elements.push(SequenceElement::SpinLock { nutation_hz: 17.5, phase, duration: t });
            elements.push(SequenceElement::EchoTrain { count, tau: t / 10.0, pulse_phase: phase });
            elements.push(SequenceElement::Delay { duration: t });
            elements.push(SequenceElement::Evolve { duration: t });
        }
        let seq = PulseSequence::new(elements).unwrap().with_record_points(RecordPoints::Uniform(points)).unwrap();
        let back = PulseSequence::from_json(&seq.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn curves_round_trip_through_csv(
        steps in proptest::collection::vec(1e-9f64..10.0, 1..50),
        seed in any::<u64>(),
    ) {
        let x: Vec<f64> = steps.iter().scan(-5.0, |acc, d| { *acc += d; Some(*acc) }).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 1.7).sin() * 1e-7).collect();
        let curve = add_noise(&ScanCurve::new(ScanType::Duration, x, y).unwrap(), 1e-3, seed).unwrap();
        prop_assert_eq!(curve_from_csv(&curve_to_csv(&curve).unwrap()).unwrap(), curve);
    }
}

/// Round-trip signal of complete SLIC with an ideal lock of `tau` seconds at ν_n = J.
fn round_trip_signal(system: &SpinSystem, j: f64, tau: f64) -> f64 {
    duration_scan(system, j, &[tau], 0.5, None).unwrap().y()[0]
}

/// Location of the first maximum of the round-trip signal, by golden-section
/// search around the two-level prediction.
fn first_maximum(system: &SpinSystem, j: f64, guess: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.8 * guess, 1.2 * guess);
    while b - a > 1e-10 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if round_trip_signal(system, j, c) > round_trip_signal(system, j, d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Largest |y(t_max − δ) − y(t_max + δ)| over δ up to one transfer period.
fn worst_asymmetry(j: f64, dnu: f64) -> f64 {
    let system = SpinSystem::pair(j, dnu).unwrap();
    let guess = optimal_slic_duration(dnu).unwrap();
    let t_max = first_maximum(&system, j, guess);
    assert!((t_max - guess).abs() / guess < 1e-3, "maximum at {t_max}, two-level {guess}");
    let offsets: Vec<f64> = (1..=40).map(|k| 0.999 * t_max * k as f64 / 40.0).collect();
    let left: Vec<f64> = offsets.iter().rev().map(|o| t_max - o).collect();
    let right: Vec<f64> = offsets.iter().map(|o| t_max + o).collect();
    let yl = duration_scan(&system, j, &left, 0.5, None).unwrap().y().to_vec();
    let yr = duration_scan(&system, j, &right, 0.5, None).unwrap().y().to_vec();
    yl.iter().rev().zip(&yr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn duration_scan_is_symmetric_about_the_first_maximum() {
    // Exact symmetry holds for the two-level crossing model; the full
    // Hamiltonian adds non-secular terms whose effect falls as (Δν/J)².
    let dnu = 2.15;
    let near = worst_asymmetry(17.5, dnu);
    let far = worst_asymmetry(70.0, dnu);
    for (j, asym) in [(17.5, near), (70.0, far)] {
        assert!(asym <= 0.15 * (dnu / j).powi(2), "J = {j}: asymmetry {asym:e}");
    }
    assert!(far < near / 10.0, "asymmetry does not shrink with J: {near:e} -> {far:e}");
}

#[test]
fn dip_minimum_converges_to_the_crossing() {
    // Refining the nutation grid around the minimum approaches ν_n = J.
    let system = SpinSystem::pair(17.5, 2.15).unwrap();
    let tau = optimal_slic_duration(2.15).unwrap();
    let mut lo = 15.0;
    let mut hi = 20.0;
    let mut previous = f64::INFINITY;
    for _ in 0..4 {
        let grid: Vec<f64> = (0..21).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect();
        let curve = dip_scan(&system, tau, &grid, None).unwrap();
        let (k, value) = curve.argmin().unwrap();
        assert!(value <= previous + 1e-12);
        previous = value;
        let step = (hi - lo) / 20.0;
        lo = grid[k] - step;
        hi = grid[k] + step;
    }
    let center = 0.5 * (lo + hi);
    assert!((center - 17.5).abs() < 0.02, "dip minimum at {center}");
    assert!((previous - 0.5).abs() < 0.01, "dip depth {previous}");
}

#[test]
fn fit_uncertainty_covers_noisy_lorentzian_centers() {
    // Over 100 noise realizations the fitted center lies within 3σ of the
    // truth in all but a handful of cases.
    let x: Vec<f64> = (0..61).map(|k| 15.0 + 0.05 * k as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.5 / (1.0 + ((v - 17.5) / 0.8).powi(2))).collect();
    let clean = ScanCurve::new(ScanType::Dip, x, y).unwrap();
    let mut misses = 0;
    for seed in 0..100 {
        let fit = fit_curve(&add_noise(&clean, 0.01, seed).unwrap(), FitModel::Lorentzian).unwrap();
        let sigma = fit.std_error("center").unwrap();
        if (fit.param("center") - 17.5).abs() > 3.0 * sigma {
            misses += 1;
        }
    }
    assert!(misses <= 3, "{misses} of 100 centers outside 3σ");
}
