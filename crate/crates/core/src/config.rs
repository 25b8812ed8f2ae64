//! JSON run configuration shared by the command-line subcommands.
//!
//! Every physical quantity is in SI units: frequencies in Hz, times in s,
//! angles in radians. A config is validated in full before any computation
//! starts; errors name the offending field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Format;
use crate::relaxation::RelaxationParams;
use crate::sequence::{
    build_m2s, build_slic, m2s_params_with, optimal_slic_duration, ExecOptions, M2SParams, PulseSequence,
    RecordPoints, SequenceElement, TauConvention,
};
use crate::spin::{SpinPair, SpinSystem};

pub const SCHEMA_VERSION: u32 = 1;

/// Default grid of T1·Δν values for efficiency tables.
pub const DEFAULT_T1_DNU: [f64; 7] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_TS_OVER_T1: [f64; 2] = [3.0, 1000.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<RelaxationParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_points: Option<RecordPoints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<ExecutionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<EfficiencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A pair given by J and Δν (offsets ±Δν/2), optionally with a third spin,
/// or an explicit offset vector and coupling matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_nu_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub third_spin: Option<ThirdSpinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings_hz: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThirdSpinSpec {
    pub offset_hz: f64,
    pub j13_hz: f64,
    pub j23_hz: f64,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be a positive number of the stated unit, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be non-negative, got {v}")))
    }
}

fn nested(field: &str, err: Error) -> Error {
    match err {
        Error::Config { .. } => err,
        other => Error::config(field, other.to_string()),
    }
}

impl SystemSpec {
    pub fn pair(j_hz: f64, delta_nu_hz: f64) -> Self {
        Self { j_hz: Some(j_hz), delta_nu_hz: Some(delta_nu_hz), ..Self::default() }
    }

    pub fn build(&self) -> Result<SpinSystem> {
        let explicit = self.offsets_hz.is_some() || self.couplings_hz.is_some();
        let paired = self.j_hz.is_some() || self.delta_nu_hz.is_some() || self.third_spin.is_some();
        match (paired, explicit) {
            (true, true) => Err(Error::config(
                "system",
                "give either j_hz/delta_nu_hz[/third_spin] or offsets_hz/couplings_hz, not both",
            )),
            (false, false) => Err(Error::config("system", "missing j_hz and delta_nu_hz")),
            (true, false) => {
                let j = self.j_hz.ok_or_else(|| Error::config("system.j_hz", "missing"))?;
                let dnu = self.delta_nu_hz.ok_or_else(|| Error::config("system.delta_nu_hz", "missing"))?;
                let j = positive("system.j_hz", j)?;
                let dnu = non_negative("system.delta_nu_hz", dnu)?;
                match self.third_spin {
                    None => SpinSystem::pair(j, dnu),
                    Some(t) => SpinSystem::pair_with_third(j, dnu, t.offset_hz, t.j13_hz, t.j23_hz),
                }
                .map_err(|e| nested("system", e))
            }
            (false, true) => {
                let offsets = self.offsets_hz.clone().ok_or_else(|| Error::config("system.offsets_hz", "missing"))?;
                let couplings =
                    self.couplings_hz.as_ref().ok_or_else(|| Error::config("system.couplings_hz", "missing"))?;
                let n = offsets.len();
                if couplings.len() != n || couplings.iter().any(|r| r.len() != n) {
                    return Err(Error::config("system.couplings_hz", format!("must be a {n}×{n} matrix")));
                }
                let matrix = nalgebra::DMatrix::from_fn(n, n, |i, j| couplings[i][j]);
                SpinSystem::new(offsets, matrix).map_err(|e| nested("system", e))
            }
        }
    }
}

/// J and |Δν| of the addressed pair.
pub fn pair_parameters(system: &SpinSystem, pair: SpinPair) -> (f64, f64) {
    let offsets = system.offsets();
    (
        system.coupling(pair.first(), pair.second()),
        (offsets[pair.first()] - offsets[pair.second()]).abs(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// Defaults: ν_n = J, phase 0 (x lock), τ_SL = 1/(√2·Δν).
    Slic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nutation_hz: Option<f64>,
        #[serde(default)]
        phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_sl: Option<f64>,
        #[serde(default)]
        tau_evolve: f64,
        #[serde(default)]
        readout: bool,
    },
    /// Counts and τ from J and Δν unless overridden.
    M2s {
        #[serde(default)]
        tau_convention: TauConvention,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n1: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n2: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
        #[serde(default)]
        tau_evolve: f64,
        #[serde(default)]
        readout: bool,
    },
    Elements { elements: Vec<SequenceElement> },
}

impl SequenceSpec {
    pub fn m2s_params(&self, system: &SpinSystem, pair: SpinPair) -> Result<Option<M2SParams>> {
        let SequenceSpec::M2s { tau_convention, n1, n2, tau, .. } = self else {
            return Ok(None);
        };
        let (j, dnu) = pair_parameters(system, pair);
        let mut p = m2s_params_with(j, dnu, *tau_convention).map_err(|e| nested("sequence", e))?;
        p = p.with_counts(n1.unwrap_or(p.n1), n2.unwrap_or(p.n2));
        if let Some(t) = tau {
            p.tau = positive("sequence.tau", *t)?;
        }
        Ok(Some(p))
    }

    pub fn build(&self, system: &SpinSystem, pair: SpinPair) -> Result<PulseSequence> {
        let (j, dnu) = pair_parameters(system, pair);
        match self {
            SequenceSpec::Slic { nutation_hz, phase, tau_sl, tau_evolve, readout } => {
                let nu = non_negative("sequence.nutation_hz", nutation_hz.unwrap_or(j))?;
                let tau = match tau_sl {
                    Some(t) => non_negative("sequence.tau_sl", *t)?,
                    None => optimal_slic_duration(dnu).map_err(|e| nested("sequence.tau_sl", e))?,
                };
                let evolve = non_negative("sequence.tau_evolve", *tau_evolve)?;
                build_slic(nu, *phase, tau, evolve, *readout).map_err(|e| nested("sequence", e))
            }
            SequenceSpec::M2s { tau_evolve, readout, .. } => {
                let p = self.m2s_params(system, pair)?.expect("m2s variant");
                let evolve = non_negative("sequence.tau_evolve", *tau_evolve)?;
                build_m2s(&p, evolve, *readout).map_err(|e| nested("sequence", e))
            }
            SequenceSpec::Elements { elements } => {
                PulseSequence::new(elements.clone()).map_err(|e| nested("sequence.elements", e))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionSpec {
    #[serde(default = "default_polarization")]
    pub polarization: f64,
    #[serde(default)]
    pub pair: SpinPair,
    /// Defaults to false for `simulate` and true for round-trip scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singlet_filter: Option<bool>,
}

fn default_polarization() -> f64 {
    ExecOptions::default().polarization
}

impl Default for ExecutionSpec {
    fn default() -> Self {
        Self { polarization: default_polarization(), pair: SpinPair::default(), singlet_filter: None }
    }
}

impl ExecutionSpec {
    pub fn options(&self, default_filter: bool) -> Result<ExecOptions> {
        let polarization = positive("execution.polarization", self.polarization)?;
        Ok(ExecOptions { polarization, pair: self.pair, singlet_filter: self.singlet_filter.unwrap_or(default_filter) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        GridSpec::Range(RangeSpec { start, stop, points, spacing: Spacing::Linear })
    }

    pub fn values(&self, field: &str) -> Result<Vec<f64>> {
        let values = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range(r) => {
                if r.points == 0 {
                    return Err(Error::config(field, "points must be at least 1"));
                }
                if !(r.start.is_finite() && r.stop.is_finite()) {
                    return Err(Error::config(field, "start and stop must be finite"));
                }
                if r.points == 1 {
                    vec![r.start]
                } else {
                    let m = (r.points - 1) as f64;
                    match r.spacing {
                        Spacing::Linear => (0..r.points)
                            .map(|k| if k + 1 == r.points { r.stop } else { r.start + (r.stop - r.start) * k as f64 / m })
                            .collect(),
                        Spacing::Log => {
                            if r.start <= 0.0 || r.stop <= 0.0 {
                                return Err(Error::config(field, "log spacing needs positive start and stop"));
                            }
                            let (a, b) = (r.start.ln(), r.stop.ln());
                            (0..r.points)
                                .map(|k| if k + 1 == r.points { r.stop } else { (a + (b - a) * k as f64 / m).exp() })
                                .collect()
                        }
                    }
                }
            }
        };
        if values.is_empty() {
            return Err(Error::config(field, "grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config(field, "grid values must be finite and non-negative"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(field, "grid must be strictly increasing"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanSpec {
    Dip {
        tau_sl: f64,
        grid: GridSpec,
    },
    /// Defaults: ν_n = J.
    Duration {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nutation_hz: Option<f64>,
        #[serde(default)]
        tau_evolve: f64,
        grid: GridSpec,
    },
    /// Defaults: ν_n = J, τ_SL = 1/(√2·Δν). Requires `relaxation`.
    Evolve {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nutation_hz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_sl: Option<f64>,
        grid: GridSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencySpec {
    #[serde(default = "default_t1_dnu")]
    pub t1_dnu: GridSpec,
    #[serde(default = "default_ts_over_t1")]
    pub ts_over_t1: Vec<f64>,
    #[serde(default)]
    pub optimize_duration: bool,
}

fn default_t1_dnu() -> GridSpec {
    GridSpec::Values(DEFAULT_T1_DNU.to_vec())
}

fn default_ts_over_t1() -> Vec<f64> {
    DEFAULT_TS_OVER_T1.to_vec()
}

impl Default for EfficiencySpec {
    fn default() -> Self {
        Self {
            t1_dnu: default_t1_dnu(),
            ts_over_t1: default_ts_over_t1(),
            optimize_duration: false,
        }
    }
}

impl EfficiencySpec {
    pub fn validate(&self) -> Result<()> {
        let grid = self.t1_dnu.values("efficiency.t1_dnu")?;
        if grid.iter().any(|v| *v <= 0.0) {
            return Err(Error::config("efficiency.t1_dnu", "values must be positive"));
        }
        if self.ts_over_t1.is_empty() {
            return Err(Error::config("efficiency.ts_over_t1", "must list at least one ratio"));
        }
        for r in &self.ts_over_t1 {
            positive("efficiency.ts_over_t1", *r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation of additive Gaussian noise on the signal.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// A scan with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedScan {
    Dip { tau_sl: f64, grid: Vec<f64> },
    Duration { nutation_hz: f64, tau_evolve: f64, grid: Vec<f64> },
    Evolve { nutation_hz: f64, tau_sl: f64, grid: Vec<f64> },
}

impl RunConfig {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            description: None,
            system: None,
            relaxation: None,
            sequence: None,
            record_points: None,
            execution: None,
            scan: None,
            efficiency: None,
            noise: None,
            output: None,
            seed: None,
        }
    }

    /// Parses and validates. Parse errors carry the JSON path and the
    /// line/column of the offending token.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::config(field, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let exec = self.execution.unwrap_or_default();
        exec.options(false)?;
        if let Some(noise) = &self.noise {
            non_negative("noise.sigma", noise.sigma)?;
        }
        if let Some(eff) = &self.efficiency {
            eff.validate()?;
        }
        if self.sequence.is_some() || self.scan.is_some() {
            let system = self.system()?;
            exec.pair.check(system.n_spins()).map_err(|e| nested("execution.pair", e))?;
            if self.sequence.is_some() {
                self.pulse_sequence(&system)?;
            }
            if self.scan.is_some() {
                self.resolved_scan(&system)?;
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SpinSystem> {
        self.system.as_ref().ok_or_else(|| Error::config("system", "missing"))?.build()
    }

    pub fn execution(&self) -> ExecutionSpec {
        self.execution.unwrap_or_default()
    }

    pub fn pulse_sequence(&self, system: &SpinSystem) -> Result<PulseSequence> {
        let spec = self.sequence.as_ref().ok_or_else(|| Error::config("sequence", "missing"))?;
        let seq = spec.build(system, self.execution().pair)?;
        match &self.record_points {
            Some(points) => seq.with_record_points(points.clone()).map_err(|e| nested("record_points", e)),
            None => Ok(seq),
        }
    }

    pub fn resolved_scan(&self, system: &SpinSystem) -> Result<ResolvedScan> {
        let spec = self.scan.as_ref().ok_or_else(|| Error::config("scan", "missing"))?;
        let (j, dnu) = pair_parameters(system, self.execution().pair);
        Ok(match spec {
            ScanSpec::Dip { tau_sl, grid } => {
                ResolvedScan::Dip { tau_sl: positive("scan.tau_sl", *tau_sl)?, grid: grid.values("scan.grid")? }
            }
            ScanSpec::Duration { nutation_hz, tau_evolve, grid } => ResolvedScan::Duration {
                nutation_hz: positive("scan.nutation_hz", nutation_hz.unwrap_or(j))?,
                tau_evolve: non_negative("scan.tau_evolve", *tau_evolve)?,
                grid: grid.values("scan.grid")?,
            },
            ScanSpec::Evolve { nutation_hz, tau_sl, grid } => {
                if self.relaxation.is_none() {
                    return Err(Error::config("relaxation", "required for an evolve scan"));
                }
                let tau_sl = match tau_sl {
                    Some(t) => positive("scan.tau_sl", *t)?,
                    None => optimal_slic_duration(dnu).map_err(|e| nested("scan.tau_sl", e))?,
                };
                ResolvedScan::Evolve {
                    nutation_hz: positive("scan.nutation_hz", nutation_hz.unwrap_or(j))?,
                    tau_sl,
                    grid: grid.values("scan.grid")?,
                }
            }
        })
    }

    pub fn efficiency_spec(&self) -> EfficiencySpec {
        self.efficiency.clone().unwrap_or_default()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn minimal_slic_config() {
        let text = r#"{"schema_version":1,"system":{"j_hz":17.5,"delta_nu_hz":2.15},"sequence":{"kind":"slic"}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let seq = cfg.pulse_sequence(&cfg.system().unwrap()).unwrap();
        match seq.elements()[1] {
            SequenceElement::SpinLock { nutation_hz, duration, .. } => {
                assert_eq!(nutation_hz, 17.5);
                assert!((duration - 0.3289).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_named() {
        let text = r#"{"schema_version":1,"system":{"j_hz":17.5,"delta_nu":2.15}}"#;
        let err = RunConfig::from_json(text).unwrap_err();
        assert!(err.to_string().contains("delta_nu"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let err = RunConfig::from_json(r#"{"schema_version":2}"#).unwrap_err();
        assert_eq!(field_of(err), "schema_version");
    }

    #[test]
    fn negative_values_name_field() {
        let text = r#"{"schema_version":1,"system":{"j_hz":-1,"delta_nu_hz":2.15},"sequence":{"kind":"slic"}}"#;
        assert_eq!(field_of(RunConfig::from_json(text).unwrap_err()), "system.j_hz");
        let text = r#"{"schema_version":1,"system":{"j_hz":17.5,"delta_nu_hz":2.15},
            "scan":{"type":"dip","tau_sl":0.3,"grid":{"start":16,"stop":15,"points":5}}}"#;
        assert_eq!(field_of(RunConfig::from_json(text).unwrap_err()), "scan.grid");
    }

    #[test]
    fn evolve_scan_requires_relaxation() {
        let text = r#"{"schema_version":1,"system":{"j_hz":17.5,"delta_nu_hz":2.15},
            "scan":{"type":"evolve","grid":[0,5]}}"#;
        assert_eq!(field_of(RunConfig::from_json(text).unwrap_err()), "relaxation");
    }

    #[test]
    fn m2s_overrides() {
        let text = r#"{"schema_version":1,"system":{"j_hz":17.4,"delta_nu_hz":2.8},
            "sequence":{"kind":"m2s","n1":4}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let sys = cfg.system().unwrap();
        let p = cfg.sequence.as_ref().unwrap().m2s_params(&sys, SpinPair::default()).unwrap().unwrap();
        assert_eq!((p.n1, p.n2), (4, 5));
        let bad = r#"{"schema_version":1,"system":{"j_hz":2,"delta_nu_hz":2.8},"sequence":{"kind":"m2s"}}"#;
        assert_eq!(field_of(RunConfig::from_json(bad).unwrap_err()), "sequence");
    }

    #[test]
    fn grids() {
        let g = GridSpec::Range(RangeSpec { start: 0.1, stop: 10.0, points: 3, spacing: Spacing::Log });
        let v = g.values("g").unwrap();
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert_eq!(v[2], 10.0);
        assert_eq!(GridSpec::linear(1.0, 2.0, 1).values("g").unwrap(), vec![1.0]);
        assert!(GridSpec::Values(vec![]).values("g").is_err());
    }

    #[test]
    fn explicit_system_and_three_spins() {
        let text = r#"{"schema_version":1,"system":{"offsets_hz":[1,-1],"couplings_hz":[[0,17.5],[17.5,0]]},
            "sequence":{"kind":"slic"}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(pair_parameters(&cfg.system().unwrap(), SpinPair::default()), (17.5, 2.0));
        let three = r#"{"schema_version":1,"system":{"j_hz":13.5,"delta_nu_hz":2.13,
            "third_spin":{"offset_hz":180,"j13_hz":7,"j23_hz":7}},"sequence":{"kind":"slic"}}"#;
        assert_eq!(RunConfig::from_json(three).unwrap().system().unwrap().n_spins(), 3);
        let mixed = r#"{"schema_version":1,"system":{"j_hz":1,"offsets_hz":[1,-1]},"sequence":{"kind":"slic"}}"#;
        assert_eq!(field_of(RunConfig::from_json(mixed).unwrap_err()), "system");
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::new();
        cfg.system = Some(SystemSpec::pair(17.5, 2.15));
        cfg.scan = Some(ScanSpec::Dip { tau_sl: 0.3, grid: GridSpec::linear(15.0, 20.0, 11) });
        cfg.seed = Some(4);
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
