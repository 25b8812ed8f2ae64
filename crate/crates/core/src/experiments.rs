//! Simulated measurement protocols: nutation-frequency dip scans,
//! spin-lock duration scans, storage-time decay scans, and extrapolation of
//! the per-application transfer efficiency.
//!
//! Signals are the final x magnetization divided by that of a single 90°
//! pulse-acquire on the same system. Storage periods keep only the singlet
//! block (the triplet manifold is assumed lost over τ_evolve), so a scan
//! without relaxation still shows what the readout lock recovers from the
//! stored singlet.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::json;

use crate::curve::{ScanCurve, ScanType};
use crate::error::{require_positive, Error, Result};
use crate::rate::TRANSFER_CEILING;
use crate::relaxation::RelaxationParams;
use crate::sequence::{build_slic, run_to_end, ExecOptions, Normalizer, PulseSequence, SequenceElement};
use crate::spin::{DensityState, SpinSystem};

/// Final x magnetization after a single 90° pulse, normalized.
pub fn reference_signal(system: &SpinSystem, options: &ExecOptions) -> Result<f64> {
    let seq = PulseSequence::new(vec![SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 }])?;
    final_mx(&seq, system, None, options)
}

fn final_mx(
    seq: &PulseSequence,
    system: &SpinSystem,
    relax: Option<&RelaxationParams>,
    options: &ExecOptions,
) -> Result<f64> {
    let rho = DensityState::thermal(system.n_spins(), options.polarization)?;
    let end = run_to_end(seq, system, relax, &rho, options)?;
    Normalizer::new(system.n_spins(), options.pair, options.polarization)?.mx(&end)
}

fn check_grid(name: &'static str, grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name, reason: "empty grid".into() });
    }
    if grid.iter().any(|v| !v.is_finite() || *v < 0.0 || (positive && *v == 0.0)) {
        let bound = if positive { "positive" } else { "non-negative" };
        return Err(Error::InvalidParameter { name, reason: format!("grid values must be finite and {bound}") });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name, reason: "grid must be strictly increasing".into() });
    }
    Ok(())
}

fn scan(
    scan_type: ScanType,
    grid: &[f64],
    system: &SpinSystem,
    relax: Option<&RelaxationParams>,
    options: &ExecOptions,
    build: impl Fn(f64) -> Result<PulseSequence> + Sync,
) -> Result<ScanCurve> {
    let reference = reference_signal(system, options)?;
    let y = grid
        .par_iter()
        .map(|&x| Ok(final_mx(&build(x)?, system, relax, options)? / reference))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = ScanCurve::new(scan_type, grid.to_vec(), y)?
        .with_metadata("system", serde_json::to_value(system)?)
        .with_metadata("pair", json!([options.pair.first(), options.pair.second()]));
    if let Some(r) = relax {
        curve = curve.with_metadata("relaxation", serde_json::to_value(r)?);
    }
    Ok(curve)
}

/// Signal after excitation and a spin-lock of duration `tau_sl` at each
/// nutation frequency of `nu_grid`.
pub fn dip_scan(
    system: &SpinSystem,
    tau_sl: f64,
    nu_grid: &[f64],
    relax: Option<&RelaxationParams>,
) -> Result<ScanCurve> {
    dip_scan_with(system, tau_sl, nu_grid, relax, &ExecOptions::default())
}

pub fn dip_scan_with(
    system: &SpinSystem,
    tau_sl: f64,
    nu_grid: &[f64],
    relax: Option<&RelaxationParams>,
    options: &ExecOptions,
) -> Result<ScanCurve> {
    require_positive("tau_sl", tau_sl)?;
    check_grid("nu_grid", nu_grid, false)?;
    let curve = scan(ScanType::Dip, nu_grid, system, relax, options, |nu| build_slic(nu, 0.0, tau_sl, 0.0, false))?;
    Ok(curve.with_metadata("tau_sl_s", tau_sl))
}

/// Full SLIC round trip (lock, storage, readout lock) at each lock duration.
pub fn duration_scan(
    system: &SpinSystem,
    nutation_hz: f64,
    tau_grid: &[f64],
    tau_evolve: f64,
    relax: Option<&RelaxationParams>,
) -> Result<ScanCurve> {
    duration_scan_with(system, nutation_hz, tau_grid, tau_evolve, relax, &storage_options())
}

pub fn duration_scan_with(
    system: &SpinSystem,
    nutation_hz: f64,
    tau_grid: &[f64],
    tau_evolve: f64,
    relax: Option<&RelaxationParams>,
    options: &ExecOptions,
) -> Result<ScanCurve> {
    require_positive("nutation_hz", nutation_hz)?;
    check_grid("tau_grid", tau_grid, false)?;
    if !(tau_evolve.is_finite() && tau_evolve >= 0.0) {
        return Err(Error::InvalidParameter { name: "tau_evolve", reason: "must be finite and non-negative".into() });
    }
    let curve = scan(ScanType::Duration, tau_grid, system, relax, options, |tau| {
        build_slic(nutation_hz, 0.0, tau, tau_evolve, true)
    })?;
    Ok(curve.with_metadata("nutation_hz", nutation_hz).with_metadata("tau_evolve_s", tau_evolve))
}

/// Full SLIC round trip at each storage time; decays as exp(−τ/TS).
pub fn evolve_scan(
    system: &SpinSystem,
    nutation_hz: f64,
    tau_sl: f64,
    tau_evolve_grid: &[f64],
    relax: &RelaxationParams,
) -> Result<ScanCurve> {
    evolve_scan_with(system, nutation_hz, tau_sl, tau_evolve_grid, relax, &storage_options())
}

pub fn evolve_scan_with(
    system: &SpinSystem,
    nutation_hz: f64,
    tau_sl: f64,
    tau_evolve_grid: &[f64],
    relax: &RelaxationParams,
    options: &ExecOptions,
) -> Result<ScanCurve> {
    require_positive("nutation_hz", nutation_hz)?;
    require_positive("tau_sl", tau_sl)?;
    check_grid("tau_evolve_grid", tau_evolve_grid, false)?;
    let curve = scan(ScanType::Evolve, tau_evolve_grid, system, Some(relax), options, |tau| {
        build_slic(nutation_hz, 0.0, tau_sl, tau, true)
    })?;
    Ok(curve.with_metadata("nutation_hz", nutation_hz).with_metadata("tau_sl_s", tau_sl))
}

/// Default options for round-trip scans: storage keeps only the singlet.
pub fn storage_options() -> ExecOptions {
    ExecOptions { singlet_filter: true, ..ExecOptions::default() }
}

/// Round-trip fraction extrapolated to zero storage time: the mean of
/// y·exp(τ/TS) over the curve.
pub fn extrapolated_fraction(curve: &ScanCurve, ts: f64) -> Result<f64> {
    require_positive("ts", ts)?;
    if curve.is_empty() {
        return Err(Error::InvalidParameter { name: "curve", reason: "empty".into() });
    }
    let sum: f64 = curve.x().iter().zip(curve.y()).map(|(x, y)| y * (x / ts).exp()).sum();
    Ok(sum / curve.len() as f64)
}

/// Per-application efficiency √(f/0.5) from a round-trip fraction, on the
/// assumption that preparation and readout transfer equally well.
pub fn efficiency_from_fraction(f: f64) -> Result<f64> {
    if !(0.0..=TRANSFER_CEILING).contains(&f) {
        return Err(Error::UnphysicalFraction(f));
    }
    Ok((f / TRANSFER_CEILING).sqrt())
}

pub fn extrapolated_efficiency(curve: &ScanCurve, ts: f64) -> Result<f64> {
    efficiency_from_fraction(extrapolated_fraction(curve, ts)?)
}

/// Adds seeded Gaussian noise of standard deviation `sigma` to every point.
pub fn add_noise(curve: &ScanCurve, sigma: f64, seed: u64) -> Result<ScanCurve> {
    add_noise_with(curve, seed, |_| sigma)
}

/// Adds seeded Gaussian noise with a per-point standard deviation.
pub fn add_noise_with(curve: &ScanCurve, seed: u64, sigma: impl Fn(f64) -> f64) -> Result<ScanCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let standard = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let noisy = curve.clone().map_y(|_, y| y + sigma(y) * standard.sample(&mut rng))?;
    Ok(noisy.with_metadata("noise_seed", seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::optimal_slic_duration;

    const J: f64 = 17.5;
    const DNU: f64 = 2.15;

    fn pair() -> SpinSystem {
        SpinSystem::pair(J, DNU).unwrap()
    }

    #[test]
    fn reference_is_unity() {
        assert!((reference_signal(&pair(), &ExecOptions::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dip_far_from_crossing_is_shallow() {
        let c = dip_scan(&pair(), 0.3, &[50.0], None).unwrap();
        assert!(c.y()[0] >= 0.95);
    }

    #[test]
    fn ideal_dip_depth_is_half() {
        let t = optimal_slic_duration(DNU).unwrap();
        let c = dip_scan(&pair(), t, &[J], None).unwrap();
        assert!((c.y()[0] - 0.5).abs() < 0.01, "{}", c.y()[0]);
    }

    #[test]
    fn zero_lock_stores_nothing() {
        let relax = RelaxationParams::new(0.912, 25.1).unwrap();
        let c = duration_scan(&pair(), J, &[0.0], 10.0, Some(&relax)).unwrap();
        assert!(c.y()[0].abs() < 1e-12);
    }

    #[test]
    fn evolve_decay_ratios() {
        let relax = RelaxationParams::new(0.912, 25.1).unwrap();
        let c = evolve_scan(&pair(), J, 0.3, &[0.0, 5.0], &relax).unwrap();
        assert!((c.y()[1] / c.y()[0] - (-5.0 / 25.1_f64).exp()).abs() < 1e-12);
        let relax = RelaxationParams::new(0.43, 2.15).unwrap();
        let c = evolve_scan(&pair(), J, 0.3, &[0.0, 0.5], &relax).unwrap();
        assert!((c.y()[1] / c.y()[0] - 0.7925).abs() < 1e-4);
    }

    #[test]
    fn repeated_grid_rejected() {
        let relax = RelaxationParams::new(0.912, 25.1).unwrap();
        assert!(evolve_scan(&pair(), J, 0.3, &[0.0, 0.0], &relax).is_err());
        assert!(dip_scan(&pair(), 0.3, &[], None).is_err());
    }

    #[test]
    fn round_trip_fractions_to_efficiency() {
        assert!((efficiency_from_fraction(0.34).unwrap() - 0.8246).abs() < 1e-4);
        assert!((efficiency_from_fraction(0.24).unwrap() - 0.6928).abs() < 1e-4);
        assert_eq!(efficiency_from_fraction(0.5).unwrap(), 1.0);
        assert!(matches!(efficiency_from_fraction(0.51), Err(Error::UnphysicalFraction(_))));
    }

    #[test]
    fn extrapolation_inverts_decay() {
        let ts: f64 = 25.1;
        let x = vec![0.0, 5.0, 10.0, 20.0];
        let y = x.iter().map(|t: &f64| 0.34 * (-t / ts).exp()).collect();
        let c = ScanCurve::new(ScanType::Evolve, x, y).unwrap();
        assert!((extrapolated_fraction(&c, ts).unwrap() - 0.34).abs() < 1e-14);
    }

    #[test]
    fn noise_is_seeded() {
        let c = ScanCurve::new(ScanType::Dip, vec![1.0, 2.0, 3.0], vec![1.0; 3]).unwrap();
        let a = add_noise(&c, 0.02, 7).unwrap();
        let b = add_noise(&c, 0.02, 7).unwrap();
        let d = add_noise(&c, 0.02, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y(), d.y());
    }
}
