use singlet_core::experiments::duration_scan_with;
use singlet_core::sequence::{
    execute, m2s_params, optimal_slic_duration, ExecOptions, PulseSequence, RecordPoints, SequenceElement,
};
use singlet_core::spin::SpinSystem;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Singlet-population trajectory under a continuous lock at ν_n = J after
/// a 90° pulse that puts the pair along the lock axis.
fn locked_singlet(j: f64, dnu: f64, duration: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let seq = PulseSequence::new(vec![
        SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 },
        SequenceElement::SpinLock { nutation_hz: j, phase: 0.0, duration },
    ])
    .unwrap()
    .with_record_points(RecordPoints::Uniform(points))
    .unwrap();
    let traj = execute(&seq, &SpinSystem::pair(j, dnu).unwrap(), None).unwrap();
    (traj.times(), traj.column(3))
}

#[test]
fn singlet_transfer_has_period_sqrt2_over_dnu() {
    for (j, dnu) in [(17.5, 2.15), (17.4, 2.8), (25.0, 5.0), (40.0, 1.0)] {
        let period = SQRT_2 / dnu;
        let (t, singlet) = locked_singlet(j, dnu, 1.75 * period, 3501);
        // First peak at half a period, the next one a full period later.
        let index_at = |x: f64| t.iter().position(|&ti| ti >= x).unwrap_or(t.len());
        let by_abs = |a: &usize, b: &usize| singlet[*a].abs().total_cmp(&singlet[*b].abs());
        let first = (0..index_at(period)).max_by(by_abs).unwrap();
        let second = (index_at(period)..t.len()).max_by(by_abs).unwrap();
        assert!((t[first] - 0.5 * period).abs() / (0.5 * period) < 0.02, "J {j}: peak at {}", t[first]);
        let measured = t[second] - t[first];
        assert!((measured - period).abs() / period < 0.02, "J {j}: period {measured} vs {period}");
    }
}

#[test]
fn round_trip_reaches_the_double_transfer_bound() {
    // No storage and no filter: the second lock continues the first.
    for (j, dnu) in [(17.5, 2.15), (25.0, 5.0), (40.0, 2.0)] {
        let system = SpinSystem::pair(j, dnu).unwrap();
        let t_max = optimal_slic_duration(dnu).unwrap();
        let grid: Vec<f64> = (1..=40).map(|k| 2.0 * t_max * k as f64 / 40.0).collect();
        let curve = duration_scan_with(&system, j, &grid, 0.0, None, &ExecOptions::default()).unwrap();
        for (&tau, &y) in grid.iter().zip(curve.y()) {
            let ideal = (PI * dnu * tau / SQRT_2).sin().powi(4);
            assert!(y.abs() >= 0.95 * ideal - 1e-12, "J {j}, τ {tau}: {y} vs {ideal}");
        }
    }
}

#[test]
fn slic_is_about_forty_percent_faster_than_m2s() {
    for (j, dnu) in [(17.4, 2.8), (17.5, 2.15), (30.0, 3.0), (50.0, 2.0)] {
        let p = m2s_params(j, dnu).unwrap();
        let ratio = optimal_slic_duration(dnu).unwrap() / p.train_duration();
        assert!((ratio - 0.60).abs() / 0.60 < 0.15, "J {j}, Δν {dnu}: ratio {ratio}");
    }
}
