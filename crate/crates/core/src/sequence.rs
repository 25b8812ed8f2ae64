//! Pulse-sequence model, SLIC and M2S builders, and the density-matrix
//! executor that records observables along a sequence.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::relaxation::RelaxationParams;
use crate::spin::{hamiltonian, DensityState, Observable, ObservableKind, Propagator, SpinPair, SpinSystem};

pub const DEFAULT_RECORD_POINTS: usize = 512;

/// One step of a pulse sequence. Angles in radians, durations in seconds,
/// nutation frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceElement {
    HardPulse { flip: f64, phase: f64 },
    Delay { duration: f64 },
    SpinLock { nutation_hz: f64, phase: f64, duration: f64 },
    /// `count` repetitions of delay(τ), π pulse at `pulse_phase`, delay(τ).
    EchoTrain { count: u32, tau: f64, pulse_phase: f64 },
    /// Storage period; relaxation only, no coherent evolution.
    Evolve { duration: f64 },
}

impl SequenceElement {
    pub fn duration(&self) -> f64 {
        match *self {
            SequenceElement::HardPulse { .. } => 0.0,
            SequenceElement::Delay { duration }
            | SequenceElement::SpinLock { duration, .. }
            | SequenceElement::Evolve { duration } => duration,
            SequenceElement::EchoTrain { count, tau, .. } => 2.0 * tau * f64::from(count),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSequence(format!("{name} must be finite and non-negative, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSequence(format!("{name} must be finite")))
            }
        };
        match *self {
            SequenceElement::HardPulse { flip, phase } => {
                finite("flip", flip)?;
                finite("phase", phase)
            }
            SequenceElement::Delay { duration } | SequenceElement::Evolve { duration } => {
                finite_non_negative("duration", duration)
            }
            SequenceElement::SpinLock { nutation_hz, phase, duration } => {
                finite_non_negative("nutation_hz", nutation_hz)?;
                finite("phase", phase)?;
                finite_non_negative("duration", duration)
            }
            SequenceElement::EchoTrain { count, tau, pulse_phase } => {
                if count == 0 {
                    return Err(Error::InvalidSequence("echo train count must be at least 1".into()));
                }
                finite_non_negative("tau", tau)?;
                finite("pulse_phase", pulse_phase)
            }
        }
    }

    /// Primitive elements this element stands for.
    pub fn expand(&self) -> Vec<SequenceElement> {
        match *self {
            SequenceElement::EchoTrain { count, tau, pulse_phase } => (0..count)
                .flat_map(|_| {
                    [
                        SequenceElement::Delay { duration: tau },
                        SequenceElement::HardPulse { flip: PI, phase: pulse_phase },
                        SequenceElement::Delay { duration: tau },
                    ]
                })
                .collect(),
            other => vec![other],
        }
    }
}

/// Where observables are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordPoints {
    /// Evenly spaced samples from 0 to the sequence duration inclusive.
    Uniform(usize),
    /// Sorted sample times in seconds.
    Explicit(Vec<f64>),
}

impl Default for RecordPoints {
    fn default() -> Self {
        RecordPoints::Uniform(DEFAULT_RECORD_POINTS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    elements: Vec<SequenceElement>,
    #[serde(default)]
    record_points: RecordPoints,
}

impl PulseSequence {
    pub fn new(elements: Vec<SequenceElement>) -> Result<Self> {
        let seq = Self { elements, record_points: RecordPoints::default() };
        seq.validate()?;
        Ok(seq)
    }

    pub fn with_record_points(mut self, points: RecordPoints) -> Result<Self> {
        self.record_points = points;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for element in &self.elements {
            element.validate()?;
        }
        if let RecordPoints::Explicit(points) = &self.record_points {
            let total = self.duration();
            if points.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > total * (1.0 + 1e-12)) {
                return Err(Error::InvalidSequence(format!(
                    "record points must lie within [0, {total}] s"
                )));
            }
            if points.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidSequence("record points must be sorted".into()));
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> &[SequenceElement] {
        &self.elements
    }

    pub fn record_points(&self) -> &RecordPoints {
        &self.record_points
    }

    pub fn duration(&self) -> f64 {
        self.elements.iter().map(SequenceElement::duration).sum()
    }

    /// Start time of each element.
    pub fn start_times(&self) -> Vec<f64> {
        let mut clock = 0.0;
        self.elements
            .iter()
            .map(|e| {
                let start = clock;
                clock += e.duration();
                start
            })
            .collect()
    }

    pub fn record_times(&self) -> Vec<f64> {
        match &self.record_points {
            RecordPoints::Explicit(points) => points.clone(),
            RecordPoints::Uniform(count) => {
                let total = self.duration();
                if self.elements.is_empty() || *count == 0 {
                    Vec::new()
                } else if total == 0.0 || *count == 1 {
                    vec![total]
                } else {
                    let step = total / (*count - 1) as f64;
                    (0..*count)
                        .map(|k| if k + 1 == *count { total } else { k as f64 * step })
                        .collect()
                }
            }
        }
    }

    /// Elements with echo trains expanded into delays and π pulses.
    pub fn expanded(&self) -> Vec<SequenceElement> {
        self.elements.iter().flat_map(SequenceElement::expand).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: Self = serde_json::from_str(text)?;
        seq.validate()?;
        Ok(seq)
    }
}

/// SLIC experiment: 90° excitation at `phase + π/2`, spin-lock at `phase`,
/// storage, and optionally the identical readout lock.
pub fn build_slic(
    nutation_hz: f64,
    phase: f64,
    tau_sl: f64,
    tau_evolve: f64,
    readout: bool,
) -> Result<PulseSequence> {
    let lock = SequenceElement::SpinLock { nutation_hz, phase, duration: tau_sl };
    let mut elements = vec![
        SequenceElement::HardPulse { flip: FRAC_PI_2, phase: phase + FRAC_PI_2 },
        lock,
        SequenceElement::Evolve { duration: tau_evolve },
    ];
    if readout {
        elements.push(lock);
    }
    PulseSequence::new(elements)
}

/// t_SL,max = 1/(√2·Δν).
pub fn optimal_slic_duration(delta_nu_hz: f64) -> Result<f64> {
    require_positive("delta_nu_hz", delta_nu_hz)?;
    Ok(1.0 / (SQRT_2 * delta_nu_hz))
}

/// 3π/(8Δν), the ideal M2S conversion time.
pub fn ideal_m2s_duration(delta_nu_hz: f64) -> Result<f64> {
    require_positive("delta_nu_hz", delta_nu_hz)?;
    Ok(3.0 * PI / (8.0 * delta_nu_hz))
}

/// How the echo spacing τ is derived from the couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauConvention {
    /// τ = 1/(4√(J²+Δν²))
    #[default]
    Effective,
    /// τ = 1/(4J)
    JOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M2SParams {
    pub n1: u32,
    pub n2: u32,
    /// Echo half-spacing in seconds.
    pub tau: f64,
    /// √(J²+Δν²) in Hz.
    pub nu_e: f64,
}

impl M2SParams {
    /// Explicit counts, e.g. a train shortened for a fast-relaxing pair.
    pub fn custom(n1: u32, n2: u32, tau: f64, nu_e: f64) -> Result<Self> {
        require_positive("tau", tau)?;
        require_positive("nu_e", nu_e)?;
        Ok(Self { n1, n2, tau, nu_e })
    }

    pub fn with_counts(self, n1: u32, n2: u32) -> Self {
        Self { n1, n2, ..self }
    }

    /// 2τ(n1 + n2): time spent in the two echo trains.
    pub fn train_duration(&self) -> f64 {
        2.0 * self.tau * f64::from(self.n1 + self.n2)
    }

    /// Forward (magnetization-to-singlet) duration including the
    /// inter-train delay.
    pub fn total_duration(&self) -> f64 {
        self.train_duration() + self.tau
    }
}

pub fn m2s_params(j_hz: f64, delta_nu_hz: f64) -> Result<M2SParams> {
    m2s_params_with(j_hz, delta_nu_hz, TauConvention::Effective)
}

pub fn m2s_params_with(j_hz: f64, delta_nu_hz: f64, convention: TauConvention) -> Result<M2SParams> {
    require_positive("delta_nu_hz", delta_nu_hz)?;
    require_positive("j_hz", j_hz)?;
    if delta_nu_hz >= j_hz {
        return Err(Error::InvalidParameter {
            name: "delta_nu_hz",
            reason: format!("M2S requires J > Δν > 0 (J = {j_hz}, Δν = {delta_nu_hz})"),
        });
    }
    let nu_e = j_hz.hypot(delta_nu_hz);
    let tau = match convention {
        TauConvention::Effective => 1.0 / (4.0 * nu_e),
        TauConvention::JOnly => 1.0 / (4.0 * j_hz),
    };
    let n1 = (PI / (2.0 * (delta_nu_hz / j_hz).atan())).round() as u32;
    let n2 = (f64::from(n1) / 2.0).round() as u32;
    Ok(M2SParams { n1, n2, tau, nu_e })
}

/// Excitation, first echo train, 90° at +π/2 relative to the excitation, a
/// τ delay, second echo train. Trains with zero count are omitted.
pub fn m2s_forward_elements(params: &M2SParams) -> Vec<SequenceElement> {
    let train = |count: u32| {
        (count > 0).then_some(SequenceElement::EchoTrain { count, tau: params.tau, pulse_phase: 0.0 })
    };
    let mut elements = vec![SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 }];
    elements.extend(train(params.n1));
    elements.push(SequenceElement::HardPulse { flip: FRAC_PI_2, phase: PI });
    elements.push(SequenceElement::Delay { duration: params.tau });
    elements.extend(train(params.n2));
    elements
}

/// M2S preparation; with `readout`, a storage period followed by the
/// mirror-image conversion back to transverse magnetization.
pub fn build_m2s(params: &M2SParams, tau_evolve: f64, readout: bool) -> Result<PulseSequence> {
    let forward = m2s_forward_elements(params);
    let mut elements = forward.clone();
    if readout {
        elements.push(SequenceElement::Evolve { duration: tau_evolve });
        elements.extend(forward[1..].iter().rev().copied());
    }
    PulseSequence::new(elements)
}

/// Trajectory column labels, in sample order.
pub const TRAJECTORY_COLUMNS: [&str; 8] = ["Mx", "My", "Mz", "P_S0", "P_T0", "P_T+", "P_T-", "ST_coherence"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecOptions {
    /// ε of the initial thermal state 1/2^n + ε·Fz; also the normalization scale.
    pub polarization: f64,
    pub pair: SpinPair,
    /// Project onto singlet-block populations at the end of every storage period.
    pub singlet_filter: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self { polarization: 0.01, pair: SpinPair::default(), singlet_filter: false }
    }
}

/// Reports deviation observables normalized to the post-90° transverse
/// deviation. Magnetizations are relative to the total x magnetization;
/// pair populations and the singlet–triplet coherence are relative to the
/// pair's own transverse polarization.
#[derive(Debug, Clone)]
pub struct Normalizer {
    observables: Vec<Observable>,
    pair: SpinPair,
    magnetization_ref: f64,
    population_ref: f64,
    coherence_ref: f64,
}

impl Normalizer {
    pub fn new(n_spins: usize, pair: SpinPair, polarization: f64) -> Result<Self> {
        require_positive("polarization", polarization)?;
        pair.check(n_spins)?;
        let observables = ObservableKind::ALL
            .iter()
            .map(|&k| Observable::new(k, n_spins, pair))
            .collect::<Result<Vec<_>>>()?;
        let dim = (1usize << n_spins) as f64;
        Ok(Self {
            observables,
            pair,
            magnetization_ref: polarization * n_spins as f64 * dim / 4.0,
            population_ref: polarization * dim / 2.0,
            coherence_ref: polarization * (dim / 2.0).sqrt(),
        })
    }

    pub fn sample(&self, state: &DensityState) -> Result<[f64; 8]> {
        let mut out = [0.0; 8];
        for (slot, obs) in out.iter_mut().zip(&self.observables) {
            let reference = if obs.kind().is_population() { self.population_ref } else { self.magnetization_ref };
            *slot = state.deviation_expectation(obs)? / reference;
        }
        out[7] = state.st_coherence_norm(self.pair)? / self.coherence_ref;
        Ok(out)
    }

    /// Normalized total x magnetization.
    pub fn mx(&self, state: &DensityState) -> Result<f64> {
        Ok(state.deviation_expectation(&self.observables[0])? / self.magnetization_ref)
    }

    /// Normalized singlet population deviation.
    pub fn singlet(&self, state: &DensityState) -> Result<f64> {
        Ok(state.deviation_expectation(&self.observables[3])? / self.population_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Ordered as [`TRAJECTORY_COLUMNS`].
    pub values: [f64; 8],
}

impl Sample {
    pub fn mx(&self) -> f64 {
        self.values[0]
    }

    pub fn singlet(&self) -> f64 {
        self.values[3]
    }

    pub fn st_coherence(&self) -> f64 {
        self.values[7]
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: DensityState,
}

impl Trajectory {
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.values[index]).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Runs `seq` from the thermal state with default options.
pub fn execute(
    seq: &PulseSequence,
    system: &SpinSystem,
    relax: Option<&RelaxationParams>,
) -> Result<Trajectory> {
    let options = ExecOptions::default();
    let initial = DensityState::thermal(system.n_spins(), options.polarization)?;
    execute_from(seq, system, relax, &initial, &options)
}

enum Step<'a> {
    Pulse { flip: f64, phase: f64 },
    Unitary { propagator: Propagator, damping: Option<f64> },
    Storage { relax: Option<&'a RelaxationParams> },
}

/// Runs `seq` from `initial`, sampling at the sequence's record points.
///
/// Hard pulses are instantaneous and take effect before any sample at the
/// same instant. Delays and spin-locks evolve coherently; storage periods
/// apply the evolve-relaxation model (identity without `relax`).
pub fn execute_from(
    seq: &PulseSequence,
    system: &SpinSystem,
    relax: Option<&RelaxationParams>,
    initial: &DensityState,
    options: &ExecOptions,
) -> Result<Trajectory> {
    if initial.n_spins() != system.n_spins() {
        return Err(Error::DimensionMismatch { expected: system.dim(), found: initial.dim() });
    }
    seq.validate()?;
    let normalizer = Normalizer::new(system.n_spins(), options.pair, options.polarization)?;
    let times = seq.record_times();
    let mut samples = Vec::with_capacity(times.len());
    let mut next = 0;
    let mut clock = 0.0;
    let mut state = initial.clone();
    let mut free: Option<Propagator> = None;

    for element in seq.expanded() {
        let duration = element.duration();
        let step = match element {
            SequenceElement::HardPulse { flip, phase } => Step::Pulse { flip, phase },
            SequenceElement::Delay { .. } => {
                if free.is_none() {
                    free = Some(Propagator::new(&hamiltonian(system, 0.0, 0.0)?)?);
                }
                Step::Unitary { propagator: free.clone().expect("set above"), damping: None }
            }
            SequenceElement::SpinLock { nutation_hz, phase, .. } => Step::Unitary {
                propagator: Propagator::new(&hamiltonian(system, nutation_hz, phase)?)?,
                damping: relax.and_then(|r| r.lock_lifetime),
            },
            SequenceElement::Evolve { .. } => Step::Storage { relax },
            SequenceElement::EchoTrain { .. } => unreachable!("expanded"),
        };

        let advance = |state: &DensityState, dt: f64| -> Result<DensityState> {
            match &step {
                Step::Pulse { flip, phase } => state.apply_hard_pulse(*flip, *phase),
                Step::Unitary { propagator, damping } => {
                    let evolved = propagator.evolve(state, dt)?;
                    Ok(match damping {
                        Some(lifetime) => evolved.scale_deviation((-dt / lifetime).exp()),
                        None => evolved,
                    })
                }
                Step::Storage { relax: Some(params) } => {
                    state.apply_evolve_relaxation(params, options.pair, dt)
                }
                Step::Storage { relax: None } => Ok(state.clone()),
            }
        };

        if let Step::Pulse { .. } = step {
            state = advance(&state, 0.0)?;
            continue;
        }
        let end = clock + duration;
        while next < times.len() && times[next] < end {
            let dt = (times[next] - clock).max(0.0);
            let values = normalizer.sample(&advance(&state, dt)?)?;
            samples.push(Sample { t: times[next], values });
            next += 1;
        }
        state = advance(&state, duration)?;
        if matches!(step, Step::Storage { .. }) && options.singlet_filter {
            state = state.singlet_filter(options.pair)?;
        }
        clock = end;
    }
    for &t in &times[next..] {
        samples.push(Sample { t, values: normalizer.sample(&state)? });
    }
    Ok(Trajectory { samples, final_state: state })
}

/// Runs `seq` and returns only the final state.
pub fn run_to_end(
    seq: &PulseSequence,
    system: &SpinSystem,
    relax: Option<&RelaxationParams>,
    initial: &DensityState,
    options: &ExecOptions,
) -> Result<DensityState> {
    let quiet = seq.clone().with_record_points(RecordPoints::Explicit(Vec::new()))?;
    Ok(execute_from(&quiet, system, relax, initial, options)?.final_state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_duration_values() {
        assert!((optimal_slic_duration(2.15).unwrap() - 0.3289).abs() < 1e-4);
        assert!((optimal_slic_duration(2.8).unwrap() - 0.2526).abs() < 1e-4);
        let a = optimal_slic_duration(1.3).unwrap();
        let b = optimal_slic_duration(2.6).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
        assert!(optimal_slic_duration(0.0).is_err());
        assert!(optimal_slic_duration(-1.0).is_err());
    }

    #[test]
    fn optimal_duration_inside_observed_plateau() {
        let t = optimal_slic_duration(2.15).unwrap();
        assert!((0.280..=0.360).contains(&t));
    }

    #[test]
    fn m2s_parameters_for_first_pair() {
        let p = m2s_params(17.4, 2.8).unwrap();
        assert_eq!((p.n1, p.n2), (10, 5));
        assert!((p.tau - 14.19e-3).abs() < 0.01e-3);
        assert!((p.tau - 14.4e-3).abs() / 14.4e-3 < 0.02);
        // Arithmetic consistency with 3π/(8Δν).
        assert!((p.train_duration() - 0.426).abs() < 1e-3);
        let ideal = ideal_m2s_duration(2.8).unwrap();
        assert!((ideal - 0.421).abs() < 1e-3);
        assert!((p.train_duration() - ideal).abs() / ideal < 0.10);
    }

    #[test]
    fn m2s_parameters_for_second_pair() {
        let p = m2s_params(13.5, 2.13).unwrap();
        assert_eq!((p.n1, p.n2), (10, 5));
        assert!((p.tau - 18.3e-3).abs() < 0.05e-3);
        let j_only = m2s_params_with(13.5, 2.13, TauConvention::JOnly).unwrap();
        assert!((j_only.tau - 1.0 / 54.0).abs() < 1e-15);
    }

    #[test]
    fn m2s_precondition() {
        assert!(m2s_params(2.0, 2.0).is_err());
        assert!(m2s_params(2.0, 3.0).is_err());
        assert!(m2s_params(2.0, 0.0).is_err());
    }

    #[test]
    fn echo_train_expansion_shape() {
        let train = SequenceElement::EchoTrain { count: 3, tau: 0.01, pulse_phase: 0.2 };
        let expanded = train.expand();
        assert_eq!(expanded.len(), 9);
        assert_eq!(expanded[1], SequenceElement::HardPulse { flip: PI, phase: 0.2 });
        let total: f64 = expanded.iter().map(SequenceElement::duration).sum();
        assert!((total - train.duration()).abs() < 1e-15);
        assert!(SequenceElement::EchoTrain { count: 0, tau: 0.01, pulse_phase: 0.0 }.validate().is_err());
    }

    #[test]
    fn invalid_elements_rejected() {
        assert!(PulseSequence::new(vec![SequenceElement::Delay { duration: -1.0 }]).is_err());
        assert!(PulseSequence::new(vec![SequenceElement::SpinLock {
            nutation_hz: f64::NAN,
            phase: 0.0,
            duration: 1.0
        }])
        .is_err());
        let seq = PulseSequence::new(vec![SequenceElement::Delay { duration: 1.0 }]).unwrap();
        assert!(seq.clone().with_record_points(RecordPoints::Explicit(vec![0.5, 0.2])).is_err());
        assert!(seq.with_record_points(RecordPoints::Explicit(vec![0.5, 2.0])).is_err());
    }

    #[test]
    fn slic_builder_layout() {
        let seq = build_slic(17.5, 0.0, 0.3, 5.0, true).unwrap();
        assert_eq!(seq.elements().len(), 4);
        assert_eq!(seq.elements()[0], SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 });
        assert_eq!(seq.elements()[1], seq.elements()[3]);
        assert!((seq.duration() - 5.6).abs() < 1e-12);
        assert_eq!(build_slic(17.5, 0.0, 0.3, 0.0, false).unwrap().elements().len(), 3);
    }

    #[test]
    fn m2s_builder_mirrors_forward_part() {
        let p = m2s_params(17.4, 2.8).unwrap();
        let seq = build_m2s(&p, 1.0, true).unwrap();
        let forward = m2s_forward_elements(&p);
        let els = seq.elements();
        assert_eq!(els.len(), 2 * forward.len());
        assert_eq!(els[forward.len()], SequenceElement::Evolve { duration: 1.0 });
        for (k, e) in forward[1..].iter().rev().enumerate() {
            assert_eq!(els[forward.len() + 1 + k], *e);
        }
        let empty = p.with_counts(0, 0);
        assert!(!build_m2s(&empty, 0.0, false)
            .unwrap()
            .elements()
            .iter()
            .any(|e| matches!(e, SequenceElement::EchoTrain { .. })));
    }

    #[test]
    fn uniform_record_points() {
        let seq = PulseSequence::new(vec![SequenceElement::Delay { duration: 2.0 }]).unwrap();
        let t = seq.record_times();
        assert_eq!(t.len(), DEFAULT_RECORD_POINTS);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 2.0);
        assert!(PulseSequence::new(vec![]).unwrap().record_times().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let seq = build_m2s(&m2s_params(17.4, 2.8).unwrap(), 5.0, true)
            .unwrap()
            .with_record_points(RecordPoints::Uniform(64))
            .unwrap();
        let back = PulseSequence::from_json(&seq.to_json().unwrap()).unwrap();
        assert_eq!(seq, back);
        let text = r#"{"elements":[{"type":"spin_lock","nutation_hz":17.5,"phase":0,"duration":0.3}],"record_points":[0.0,0.1]}"#;
        let parsed = PulseSequence::from_json(text).unwrap();
        assert_eq!(parsed.record_times(), vec![0.0, 0.1]);
        assert!(PulseSequence::from_json(r#"{"elements":[{"type":"laser"}]}"#).is_err());
    }

    #[test]
    fn empty_sequence_returns_initial_state() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let out = execute(&PulseSequence::new(vec![]).unwrap(), &sys, None).unwrap();
        assert!(out.samples.is_empty());
        assert_eq!(out.final_state, DensityState::thermal(2, 0.01).unwrap());
    }

    #[test]
    fn zero_lock_is_pulse_acquire() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let out = execute(&build_slic(17.5, 0.0, 0.0, 0.0, true).unwrap(), &sys, None).unwrap();
        let last = out.samples.last().unwrap();
        assert!((last.mx() - 1.0).abs() < 1e-12);
        assert!(last.singlet().abs() < 1e-12);
    }

    fn final_singlet(seq: &PulseSequence, sys: &SpinSystem) -> f64 {
        let out = execute(seq, sys, None).unwrap();
        let n = Normalizer::new(sys.n_spins(), SpinPair::default(), 0.01).unwrap();
        n.singlet(&out.final_state).unwrap()
    }

    #[test]
    fn slic_on_resonance_transfers_half() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let t = optimal_slic_duration(2.15).unwrap();
        let seq = build_slic(17.5, 0.0, t, 0.0, false).unwrap();
        let ps = final_singlet(&seq, &sys);
        assert!((ps.abs() - 0.5).abs() < 0.01, "{ps}");
    }

    #[test]
    fn slic_far_off_crossing_transfers_little() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let t = optimal_slic_duration(2.15).unwrap();
        let seq = build_slic(35.0, 0.0, t, 0.0, false).unwrap();
        assert!(final_singlet(&seq, &sys).abs() < 0.05);
    }

    #[test]
    fn m2s_forward_reaches_singlet_in_two_trains() {
        let sys = SpinSystem::pair(17.4, 2.8).unwrap();
        let p = m2s_params(17.4, 2.8).unwrap();
        let forward = build_m2s(&p, 0.0, false).unwrap();
        assert!(final_singlet(&forward, &sys).abs() >= 0.45);
        let first_train = PulseSequence::new(m2s_forward_elements(&p)[..2].to_vec()).unwrap();
        assert!(final_singlet(&first_train, &sys).abs() < 0.05);
    }

    #[test]
    fn echo_train_matches_explicit_expansion() {
        let sys = SpinSystem::pair(17.4, 2.8).unwrap();
        let train = SequenceElement::EchoTrain { count: 4, tau: 0.0142, pulse_phase: 0.0 };
        let mut compact = vec![SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 }];
        let mut explicit = compact.clone();
        compact.push(train);
        explicit.extend(train.expand());
        let a = execute(&PulseSequence::new(compact).unwrap(), &sys, None).unwrap();
        let b = execute(&PulseSequence::new(explicit).unwrap(), &sys, None).unwrap();
        assert_eq!(a.final_state, b.final_state);
    }

    #[test]
    fn normalized_output_is_linear_in_polarization() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let relax = RelaxationParams::new(0.912, 25.1).unwrap();
        let seq = build_slic(17.5, 0.0, 0.3, 2.0, true)
            .unwrap()
            .with_record_points(RecordPoints::Uniform(20))
            .unwrap();
        let run = |eps: f64| {
            let options = ExecOptions { polarization: eps, ..ExecOptions::default() };
            let rho = DensityState::thermal(2, eps).unwrap();
            execute_from(&seq, &sys, Some(&relax), &rho, &options).unwrap()
        };
        let (a, b) = (run(0.01), run(0.02));
        for (x, y) in a.samples.iter().zip(&b.samples) {
            for (u, v) in x.values.iter().zip(&y.values) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn splitting_a_sequence_composes() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let relax = RelaxationParams::new(0.912, 25.1).unwrap().with_lock_lifetime(3.0).unwrap();
        let seq = build_slic(17.2, 0.1, 0.3, 1.5, true).unwrap();
        let (head, tail) = seq.elements().split_at(2);
        let options = ExecOptions::default();
        let rho = DensityState::thermal(2, 0.01).unwrap();
        let whole = run_to_end(&seq, &sys, Some(&relax), &rho, &options).unwrap();
        let mid = run_to_end(&PulseSequence::new(head.to_vec()).unwrap(), &sys, Some(&relax), &rho, &options)
            .unwrap();
        let split =
            run_to_end(&PulseSequence::new(tail.to_vec()).unwrap(), &sys, Some(&relax), &mid, &options).unwrap();
        let diff = (whole.matrix() - split.matrix()).camax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn samples_are_right_continuous_at_pulses() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let seq = PulseSequence::new(vec![
            SequenceElement::Delay { duration: 0.1 },
            SequenceElement::HardPulse { flip: FRAC_PI_2, phase: FRAC_PI_2 },
            SequenceElement::Delay { duration: 0.1 },
        ])
        .unwrap()
        .with_record_points(RecordPoints::Explicit(vec![0.0, 0.1]))
        .unwrap();
        let out = execute(&seq, &sys, None).unwrap();
        assert!((out.samples[0].values[2] - 1.0).abs() < 1e-12);
        assert!((out.samples[1].mx() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_filter_applies_after_storage() {
        let sys = SpinSystem::pair(17.5, 2.15).unwrap();
        let seq = build_slic(17.5, 0.0, 0.0, 0.0, false).unwrap();
        let options = ExecOptions { singlet_filter: true, ..ExecOptions::default() };
        let rho = DensityState::thermal(2, 0.01).unwrap();
        let end = run_to_end(&seq, &sys, None, &rho, &options).unwrap();
        let n = Normalizer::new(2, SpinPair::default(), 0.01).unwrap();
        assert!(n.mx(&end).unwrap().abs() < 1e-12);
    }
}
