//! Two-level damped-Rabi model of triplet→singlet polarization transfer.
//!
//! A stage moves polarization from a source level `a` to a destination
//! level `b` through a coherence `c`:
//!
//! ```text
//! a' = −a/T_source − ω·c
//! b' = −b/T_dest   + ω·c
//! c' = −c/T_coh    + (ω/2)(a − b)        ω = 2π·rabi_freq
//! ```
//!
//! Starting from `a = P, b = c = 0` an undamped stage transfers all of `P`
//! to `b` in half a Rabi period. Efficiencies start from the 0.5 transverse
//! ceiling and report `2·P_dest`, so ideal transfer is 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{ScanCurve, ScanType};
use crate::error::{require_positive, Error, Result};
use crate::sequence::m2s_params;

/// Polarization available for transfer from transverse triplet order.
pub const TRANSFER_CEILING: f64 = 0.5;

/// Fixed integration steps per shortest timescale.
pub const STEPS_PER_TIMESCALE: usize = 100;

const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferStage {
    /// Full oscillation frequency in Hz; half a period completes the transfer.
    pub rabi_freq: f64,
    pub t_source: f64,
    pub t_dest: f64,
    pub t_coherence: f64,
    pub duration: f64,
}

impl TransferStage {
    /// Stage whose coherence lifetime is the harmonic mean of the level lifetimes.
    pub fn new(rabi_freq: f64, t_source: f64, t_dest: f64, duration: f64) -> Result<Self> {
        require_positive("t_source", t_source)?;
        require_positive("t_dest", t_dest)?;
        Self::with_coherence(rabi_freq, t_source, t_dest, harmonic_mean(t_source, t_dest), duration)
    }

    pub fn with_coherence(
        rabi_freq: f64,
        t_source: f64,
        t_dest: f64,
        t_coherence: f64,
        duration: f64,
    ) -> Result<Self> {
        let stage = Self { rabi_freq, t_source, t_dest, t_coherence, duration };
        stage.validate()?;
        Ok(stage)
    }

    /// Rabi frequency chosen so `duration` is exactly half a period.
    pub fn half_period(duration: f64, t_source: f64, t_dest: f64) -> Result<Self> {
        require_positive("duration", duration)?;
        Self::new(1.0 / (2.0 * duration), t_source, t_dest, duration)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("rabi_freq", self.rabi_freq)?;
        require_positive("t_source", self.t_source)?;
        require_positive("t_dest", self.t_dest)?;
        require_positive("t_coherence", self.t_coherence)?;
        require_positive("duration", self.duration)
    }

    /// Largest admissible integration step.
    pub fn max_step(&self) -> f64 {
        [1.0 / self.rabi_freq, self.t_source, self.t_dest, self.t_coherence]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            / STEPS_PER_TIMESCALE as f64
    }
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 / (1.0 / a + 1.0 / b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutcome {
    pub source: f64,
    pub dest: f64,
    pub coherence: f64,
    pub steps: usize,
    /// Largest destination population reached at any step.
    pub peak_dest: f64,
    /// Time of `peak_dest`.
    pub peak_time: f64,
}

#[derive(Clone, Copy)]
struct Levels([f64; 3]);

impl Levels {
    fn derivative(&self, s: &TransferStage) -> [f64; 3] {
        let [a, b, c] = self.0;
        let w = TAU * s.rabi_freq;
        [
            -a / s.t_source - w * c,
            -b / s.t_dest + w * c,
            -c / s.t_coherence + 0.5 * w * (a - b),
        ]
    }

    fn offset(&self, k: &[f64; 3], h: f64) -> Levels {
        Levels([self.0[0] + h * k[0], self.0[1] + h * k[1], self.0[2] + h * k[2]])
    }

    fn rk4(&self, s: &TransferStage, h: f64) -> Levels {
        let k1 = self.derivative(s);
        let k2 = self.offset(&k1, h / 2.0).derivative(s);
        let k3 = self.offset(&k2, h / 2.0).derivative(s);
        let k4 = self.offset(&k3, h).derivative(s);
        let mut out = self.0;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Levels(out)
    }

    /// a² + b² + 2c², non-increasing along every trajectory.
    fn energy(&self) -> f64 {
        let [a, b, c] = self.0;
        a * a + b * b + 2.0 * c * c
    }
}

/// Integrates one stage with the default step bound.
pub fn run_stage(p_source: f64, stage: &TransferStage) -> Result<StageOutcome> {
    run_stage_refined(p_source, stage, 1)
}

/// Integrates one stage with the step bound divided by `refinement`.
pub fn run_stage_refined(p_source: f64, stage: &TransferStage, refinement: usize) -> Result<StageOutcome> {
    let mut out = None;
    integrate(p_source, stage, refinement, |_, _| {}, &mut out)?;
    Ok(out.expect("set by integrate"))
}

/// Samples (t, [a, b, c]) at every step, including t = 0.
pub fn stage_trace(p_source: f64, stage: &TransferStage) -> Result<Vec<(f64, [f64; 3])>> {
    let mut trace = Vec::new();
    let mut out = None;
    integrate(p_source, stage, 1, |t, l| trace.push((t, l)), &mut out)?;
    Ok(trace)
}

fn integrate(
    p_source: f64,
    stage: &TransferStage,
    refinement: usize,
    mut observe: impl FnMut(f64, [f64; 3]),
    out: &mut Option<StageOutcome>,
) -> Result<()> {
    if !(0.0..=1.0).contains(&p_source) {
        return Err(Error::InvalidParameter {
            name: "p_source",
            reason: format!("must lie in [0, 1], got {p_source}"),
        });
    }
    stage.validate()?;
    let h_max = stage.max_step() / refinement.max(1) as f64;
    let n_steps = (stage.duration / h_max).ceil();
    if !n_steps.is_finite() || n_steps > MAX_STEPS as f64 || h_max <= 0.0 {
        return Err(Error::StepUnderflow(format!(
            "{n_steps} steps of at most {h_max:e} s needed for a {} s stage",
            stage.duration
        )));
    }
    let n_steps = (n_steps as usize).max(1);
    let h = stage.duration / n_steps as f64;
    let mut levels = Levels([p_source, 0.0, 0.0]);
    let (mut peak_dest, mut peak_time) = (0.0, 0.0);
    observe(0.0, levels.0);
    for k in 1..=n_steps {
        levels = levels.rk4(stage, h);
        let t = k as f64 * h;
        if levels.0[1] > peak_dest {
            peak_dest = levels.0[1];
            peak_time = t;
        }
        observe(t, levels.0);
    }
    if levels.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("rate integration diverged".into()));
    }
    let [source, dest, coherence] = levels.0;
    *out = Some(StageOutcome { source, dest, coherence, steps: n_steps, peak_dest, peak_time });
    Ok(())
}

/// Quadratic norm used for the dissipativity check.
pub fn level_energy(levels: [f64; 3]) -> f64 {
    Levels(levels).energy()
}

/// SLIC: a single transfer at Rabi frequency Δν/√2 from transverse
/// magnetization (lifetime T1) to the singlet (lifetime TS). With
/// `optimize_duration` the best time within twice the ideal one is used.
pub fn slic_efficiency(t1: f64, ts: f64, delta_nu_hz: f64, optimize_duration: bool) -> Result<f64> {
    slic_efficiency_refined(t1, ts, delta_nu_hz, optimize_duration, 1)
}

pub fn slic_efficiency_refined(
    t1: f64,
    ts: f64,
    delta_nu_hz: f64,
    optimize_duration: bool,
    refinement: usize,
) -> Result<f64> {
    require_positive("t1", t1)?;
    require_positive("ts", ts)?;
    require_positive("delta_nu_hz", delta_nu_hz)?;
    let rabi = delta_nu_hz * FRAC_1_SQRT_2;
    let ideal = 1.0 / (2.0 * rabi);
    let duration = if optimize_duration { 2.0 * ideal } else { ideal };
    let stage = TransferStage::new(rabi, t1, ts, duration)?;
    let out = run_stage_refined(TRANSFER_CEILING, &stage, refinement)?;
    let dest = if optimize_duration { out.peak_dest } else { out.dest };
    Ok(dest / TRANSFER_CEILING)
}

/// M2S: transfer to an intermediate level (lifetime T1/3) in π/(4Δν), then
/// to the singlet in π/(8Δν). With `j_hz`, the stage durations are those
/// of the discrete echo trains, 2τ·n1 and 2τ·n2 + τ, while the Rabi
/// frequencies stay at their ideal values.
pub fn m2s_efficiency(t1: f64, ts: f64, delta_nu_hz: f64, j_hz: Option<f64>) -> Result<f64> {
    m2s_efficiency_refined(t1, ts, delta_nu_hz, j_hz, 1)
}

pub fn m2s_efficiency_refined(
    t1: f64,
    ts: f64,
    delta_nu_hz: f64,
    j_hz: Option<f64>,
    refinement: usize,
) -> Result<f64> {
    require_positive("t1", t1)?;
    require_positive("ts", ts)?;
    require_positive("delta_nu_hz", delta_nu_hz)?;
    let ideal1 = PI / (4.0 * delta_nu_hz);
    let ideal2 = PI / (8.0 * delta_nu_hz);
    let (d1, d2) = match j_hz {
        Some(j) => {
            let p = m2s_params(j, delta_nu_hz)?;
            (2.0 * p.tau * f64::from(p.n1), 2.0 * p.tau * f64::from(p.n2) + p.tau)
        }
        None => (ideal1, ideal2),
    };
    let intermediate = t1 / 3.0;
    let first = TransferStage::new(1.0 / (2.0 * ideal1), t1, intermediate, d1)?;
    let p_mid = run_stage_refined(TRANSFER_CEILING, &first, refinement)?.dest;
    let second = TransferStage::new(1.0 / (2.0 * ideal2), intermediate, ts, d2)?;
    let p_singlet = run_stage_refined(p_mid.clamp(0.0, 1.0), &second, refinement)?.dest;
    Ok(p_singlet / TRANSFER_CEILING)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferSequence {
    Slic,
    M2s,
}

impl TransferSequence {
    pub fn name(self) -> &'static str {
        match self {
            TransferSequence::Slic => "slic",
            TransferSequence::M2s => "m2s",
        }
    }
}

/// Efficiency versus T1Δν at fixed TS/T1. Δν is set to 1 Hz; the model
/// depends on T1 and Δν only through their product.
pub fn efficiency_curve(
    sequence: TransferSequence,
    t1_dnu_grid: &[f64],
    ts_over_t1: f64,
    optimize_duration: bool,
) -> Result<ScanCurve> {
    if t1_dnu_grid.is_empty() {
        return Err(Error::InvalidParameter { name: "t1_dnu_grid", reason: "empty".into() });
    }
    require_positive("ts_over_t1", ts_over_t1)?;
    for &x in t1_dnu_grid {
        require_positive("t1_dnu", x)?;
    }
    let y = t1_dnu_grid
        .par_iter()
        .map(|&t1| match sequence {
            TransferSequence::Slic => slic_efficiency(t1, ts_over_t1 * t1, 1.0, optimize_duration),
            TransferSequence::M2s => m2s_efficiency(t1, ts_over_t1 * t1, 1.0, None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanCurve::new(ScanType::Efficiency, t1_dnu_grid.to_vec(), y)?
        .with_metadata("sequence", sequence.name())
        .with_metadata("ts_over_t1", ts_over_t1)
        .with_metadata("optimize_duration", optimize_duration))
}
