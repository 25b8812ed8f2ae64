use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanType {
    Dip,
    Duration,
    Evolve,
    Efficiency,
}

impl ScanType {
    pub fn name(self) -> &'static str {
        match self {
            ScanType::Dip => "dip",
            ScanType::Duration => "duration",
            ScanType::Evolve => "evolve",
            ScanType::Efficiency => "efficiency",
        }
    }

    /// CSV column labels, units in the name.
    pub fn columns(self) -> [&'static str; 2] {
        match self {
            ScanType::Dip => ["nutation_hz", "signal"],
            ScanType::Duration => ["tau_sl_s", "signal"],
            ScanType::Evolve => ["tau_evolve_s", "signal"],
            ScanType::Efficiency => ["T1_dnu", "efficiency"],
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "dip" => Ok(ScanType::Dip),
            "duration" => Ok(ScanType::Duration),
            "evolve" => Ok(ScanType::Evolve),
            "efficiency" => Ok(ScanType::Efficiency),
            other => Err(Error::Malformed(format!("unknown scan_type '{other}'"))),
        }
    }
}

/// A scanned signal. `x` is strictly increasing and as long as `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr")]
pub struct ScanCurve {
    pub scan_type: ScanType,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRepr {
    scan_type: ScanType,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
}

impl TryFrom<CurveRepr> for ScanCurve {
    type Error = Error;

    fn try_from(r: CurveRepr) -> Result<Self> {
        let mut curve = ScanCurve::new(r.scan_type, r.x, r.y)?;
        curve.metadata = r.metadata;
        Ok(curve)
    }
}

impl ScanCurve {
    pub fn new(scan_type: ScanType, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Malformed("curve values must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Malformed("curve x values must be strictly increasing".into()));
        }
        Ok(Self { scan_type, x, y, metadata: BTreeMap::new() })
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Replaces the signal values, keeping the grid and metadata.
    pub fn map_y(mut self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        for (y, &x) in self.y.iter_mut().zip(&self.x) {
            *y = f(x, *y);
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite curve value".into()));
        }
        Ok(self)
    }

    /// Index and value of the smallest signal.
    pub fn argmin(&self) -> Option<(usize, f64)> {
        self.y.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Index and value of the largest signal.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        self.y.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_or_ragged() {
        assert!(ScanCurve::new(ScanType::Dip, vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(ScanCurve::new(ScanType::Dip, vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(ScanCurve::new(ScanType::Dip, vec![1.0, f64::NAN], vec![0.0, 0.0]).is_err());
        assert!(ScanCurve::new(ScanType::Dip, vec![], vec![]).unwrap().is_empty());
    }

    #[test]
    fn json_validates_on_read() {
        let bad = r#"{"scan_type":"dip","x":[2,1],"y":[0,0]}"#;
        assert!(serde_json::from_str::<ScanCurve>(bad).is_err());
        let good = r#"{"scan_type":"evolve","x":[0,1],"y":[1,0.5],"metadata":{"ts":2.0}}"#;
        let c: ScanCurve = serde_json::from_str(good).unwrap();
        assert_eq!(c.metadata["ts"], 2.0);
        let back: ScanCurve = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn extremes() {
        let c = ScanCurve::new(ScanType::Dip, vec![1.0, 2.0, 3.0], vec![0.9, 0.4, 0.8]).unwrap();
        assert_eq!(c.argmin(), Some((1, 0.4)));
        assert_eq!(c.argmax(), Some((0, 0.9)));
    }
}
