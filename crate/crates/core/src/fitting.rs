//! Least-squares fits for scan curves: Lorentzian dip, sin⁴ transfer
//! profile and exponential decay, solved by Levenberg–Marquardt with
//! analytic Jacobians.

use std::collections::BTreeMap;
use std::f64::consts::{SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::ScanCurve;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Relative parameter change at which iteration stops.
pub const STEP_TOLERANCE: f64 = 1e-10;
/// Largest cosine between the residual and any Jacobian column accepted
/// as a stationary point.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    /// One standard deviation; `None` when the covariance is singular.
    pub std_errors: BTreeMap<String, Option<f64>>,
    /// Quantities computed from the parameters; `None` when not identifiable.
    pub derived: BTreeMap<String, Option<f64>>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub identifiable: bool,
    /// Sum of squared residuals after each accepted iteration.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.std_errors.get(name).copied().flatten()
    }

    pub fn derived(&self, name: &str) -> Option<f64> {
        self.derived.get(name).copied().flatten()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Lorentzian,
    Sin4,
    Sin4Offset,
    Exponential,
}

impl FitModel {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "lorentzian" => Ok(FitModel::Lorentzian),
            "sin4" => Ok(FitModel::Sin4),
            "sin4_offset" => Ok(FitModel::Sin4Offset),
            "exponential" => Ok(FitModel::Exponential),
            other => Err(Error::InvalidParameter {
                name: "model",
                reason: format!("unknown fit model '{other}' (lorentzian, sin4, sin4_offset, exponential)"),
            }),
        }
    }
}

pub fn fit_curve(curve: &ScanCurve, model: FitModel) -> Result<FitResult> {
    match model {
        FitModel::Lorentzian => fit_lorentzian_dip(curve),
        FitModel::Sin4 => fit_sin4(curve, false),
        FitModel::Sin4Offset => fit_sin4(curve, true),
        FitModel::Exponential => fit_exponential(curve),
    }
}

/// Output of [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub jacobian: DMatrix<f64>,
    pub residuals: DVector<f64>,
}

impl LmOutcome {
    pub fn cost(&self) -> f64 {
        self.residuals.norm_squared()
    }

    /// Largest |cos| between the residual vector and a Jacobian column.
    pub fn gradient_cosine(&self) -> f64 {
        gradient_cosine(&self.jacobian, &self.residuals)
    }

    /// s²(JᵀJ)⁻¹ with s² = cost/(m − n), if defined.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let (m, n) = self.jacobian.shape();
        if m <= n {
            return None;
        }
        let s2 = self.cost() / (m - n) as f64;
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let inv = jtj.cholesky()?.inverse();
        let cov = inv * s2;
        cov.iter().all(|v| v.is_finite()).then_some(cov)
    }

    pub fn std_errors(&self) -> Vec<Option<f64>> {
        let n = self.params.len();
        match self.covariance() {
            Some(cov) => (0..n).map(|k| Some(cov[(k, k)].max(0.0).sqrt())).collect(),
            None => vec![None; n],
        }
    }
}

fn gradient_cosine(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    jac.column_iter()
        .map(|col| {
            let cn = col.norm();
            if cn == 0.0 {
                0.0
            } else {
                (col.dot(r) / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Model value f(p, x); writes ∂f/∂p into the gradient slice.
pub type ModelFn = dyn Fn(&[f64], f64, &mut [f64]) -> f64;

/// Residuals `y − f(x)` and the Jacobian ∂f/∂p at `p`.
fn evaluate(
    x: &[f64],
    y: &[f64],
    p: &[f64],
    model: &ModelFn,
) -> (DVector<f64>, DMatrix<f64>) {
    let mut jac = DMatrix::zeros(x.len(), p.len());
    let mut grad = vec![0.0; p.len()];
    let r = DVector::from_iterator(
        x.len(),
        x.iter().zip(y).enumerate().map(|(i, (&xi, &yi))| {
            let f = model(p, xi, &mut grad);
            for (k, g) in grad.iter().enumerate() {
                jac[(i, k)] = *g;
            }
            yi - f
        }),
    );
    (r, jac)
}

/// Minimizes Σ(y − f(p, x))². `model` returns f and writes ∂f/∂p.
/// Accepted iterations never increase the cost.
pub fn levenberg_marquardt(
    x: &[f64],
    y: &[f64],
    p0: Vec<f64>,
    model: &ModelFn,
) -> LmOutcome {
    let n = p0.len();
    let mut p = p0;
    let (mut r, mut jac) = evaluate(x, y, &p, model);
    let mut cost = r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    let mut small_step = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && cost > 0.0 && !small_step {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let diag_floor = jtj.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;
        let mut improved = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(diag_floor);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&g);
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let (tr, tj) = evaluate(x, y, &trial, model);
            let trial_cost = tr.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                small_step = delta.norm() <= STEP_TOLERANCE * (p_norm + STEP_TOLERANCE);
                p = trial;
                r = tr;
                jac = tj;
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    // Residuals at the rounding floor have no meaningful direction.
    let exact = r.norm() <= 1e-12 * y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let stationary = exact || gradient_cosine(&jac, &r) <= GRADIENT_TOLERANCE;
    let converged = stationary && (small_step || iterations < MAX_ITERATIONS);
    LmOutcome { params: p, cost_history: history, iterations, converged, jacobian: jac, residuals: r }
}

fn require_points(curve: &ScanCurve, min: usize, model: &str) -> Result<()> {
    if curve.len() < min {
        return Err(Error::Fit(format!("{model} fit needs at least {min} points, got {}", curve.len())));
    }
    Ok(())
}

fn named<T: Copy>(names: &[&str], values: &[T]) -> BTreeMap<String, T> {
    names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect()
}

/// y = baseline − depth·w²/((x − center)² + w²)
pub fn lorentzian(p: &[f64], x: f64, grad: &mut [f64]) -> f64 {
    let (c, w, d, b) = (p[0], p[1], p[2], p[3]);
    let u = x - c;
    let den = u * u + w * w;
    let l = w * w / den;
    grad[0] = -d * 2.0 * u * w * w / (den * den);
    grad[1] = -d * 2.0 * w * u * u / (den * den);
    grad[2] = -l;
    grad[3] = 1.0;
    b - d * l
}

/// Fits a flat-baseline Lorentzian dip; `center` is the crossing frequency.
pub fn fit_lorentzian_dip(curve: &ScanCurve) -> Result<FitResult> {
    require_points(curve, 5, "Lorentzian")?;
    let (x, y) = (curve.x(), curve.y());
    let span = x[x.len() - 1] - x[0];
    let (imin, ymin) = curve.argmin().expect("non-empty");
    let baseline = y[0].max(y[y.len() - 1]);
    let depth = baseline - ymin;
    let half = baseline - depth / 2.0;
    let left = (0..imin).rev().find(|&i| y[i] >= half).map(|i| x[i]);
    let right = (imin..x.len()).find(|&i| y[i] >= half).map(|i| x[i]);
    let width = match (left, right) {
        (Some(l), Some(r)) if depth > 0.0 => ((r - l) / 2.0).max(span / (4.0 * x.len() as f64)),
        _ => span / 4.0,
    };
    let out = levenberg_marquardt(x, y, vec![x[imin], width, depth, baseline], &lorentzian);
    let mut params = out.params.clone();
    params[1] = params[1].abs();
    let std = out.std_errors();
    let names = ["center", "width", "depth", "baseline"];
    let identifiable = std.iter().all(Option::is_some) && params[2].abs() > 0.0;
    let relative_depth = (params[3] != 0.0).then(|| params[2] / params[3]);
    Ok(FitResult {
        model: FitModel::Lorentzian,
        params: named(&names, &params),
        std_errors: named(&names, &std),
        derived: BTreeMap::from([("relative_depth".to_string(), relative_depth)]),
        residual_norm: out.cost().sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        identifiable,
        cost_history: out.cost_history,
    })
}

/// y = A·sin⁴(2πτ/T) + c
pub fn sin4(p: &[f64], x: f64, grad: &mut [f64]) -> f64 {
    let (t, a) = (p[0], p[1]);
    let phase = TAU * x / t;
    let (s, c) = phase.sin_cos();
    let s3 = s * s * s;
    grad[0] = a * 4.0 * s3 * c * (-phase / t);
    grad[1] = s3 * s;
    if grad.len() > 2 {
        grad[2] = 1.0;
    }
    a * s3 * s + p.get(2).copied().unwrap_or(0.0)
}

/// Location of the first local maximum, refined by a parabola through its
/// neighbours. `None` if the curve rises to its last point.
fn first_maximum(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let threshold = lo + 0.75 * (hi - lo);
    let mut i = y.iter().position(|&v| v >= threshold)?;
    while i + 1 < y.len() && y[i + 1] >= y[i] {
        i += 1;
    }
    if i + 1 == y.len() {
        return None;
    }
    if i == 0 {
        return Some(x[0]);
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    Some(if den == 0.0 { x1 } else { x1 - 0.5 * num / den })
}

/// Fits A·sin⁴(2πτ/T) (+ c) and reports Δν = 2√2/T.
pub fn fit_sin4(curve: &ScanCurve, with_offset: bool) -> Result<FitResult> {
    require_points(curve, 8, "sin⁴")?;
    let (x, y) = (curve.x(), curve.y());
    let span = x[x.len() - 1] - x[0];
    let unidentifiable = || Error::Fit("sin⁴ period unidentifiable: curve spans less than half a period".into());
    let peak = first_maximum(x, y).filter(|&t| t > 0.0).ok_or_else(unidentifiable)?;
    let period0 = 4.0 * peak;
    if span < period0 / 2.0 {
        return Err(unidentifiable());
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let p0 = if with_offset { vec![period0, hi - lo, lo] } else { vec![period0, hi] };
    let out = levenberg_marquardt(x, y, p0, &sin4);
    let period = out.params[0].abs();
    if span < period / 2.0 {
        return Err(unidentifiable());
    }
    let std = out.std_errors();
    let names: &[&str] = if with_offset { &["period", "amplitude", "offset"] } else { &["period", "amplitude"] };
    let delta_nu = 2.0 * SQRT_2 / period;
    let delta_nu_err = std[0].map(|s| delta_nu * s / period);
    let mut params = out.params.clone();
    params[0] = period;
    Ok(FitResult {
        model: if with_offset { FitModel::Sin4Offset } else { FitModel::Sin4 },
        params: named(names, &params),
        std_errors: named(names, &std),
        derived: BTreeMap::from([
            ("delta_nu_hz".to_string(), Some(delta_nu)),
            ("delta_nu_std_error".to_string(), delta_nu_err),
            ("first_maximum_s".to_string(), Some(period / 4.0)),
        ]),
        residual_norm: out.cost().sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        identifiable: std[0].is_some(),
        cost_history: out.cost_history,
    })
}

/// y = A·exp(−k·x), parametrized by the rate k = 1/lifetime.
pub fn exponential(p: &[f64], x: f64, grad: &mut [f64]) -> f64 {
    let e = (-p[1] * x).exp();
    grad[0] = e;
    grad[1] = -p[0] * x * e;
    p[0] * e
}

/// Fits a single-exponential decay. The lifetime is reported as derived
/// and flagged non-identifiable when the curve shows no resolvable decay.
pub fn fit_exponential(curve: &ScanCurve) -> Result<FitResult> {
    require_points(curve, 3, "exponential")?;
    let (x, y) = (curve.x(), curve.y());
    if let Some(bad) = y.iter().find(|v| **v <= 0.0) {
        return Err(Error::Fit(format!("exponential fit needs positive data, found {bad}")));
    }
    // Log-linear regression for the starting point.
    let n = x.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let out = levenberg_marquardt(x, y, vec![(my - slope * mx).exp(), -slope], &exponential);
    let (amp, rate) = (out.params[0], out.params[1]);
    let std = out.std_errors();
    let span = x[x.len() - 1] - x[0];
    let identifiable = rate * span > 1e-9 && std[1].is_none_or(|s| s < rate);
    let lifetime = identifiable.then(|| 1.0 / rate);
    let lifetime_err = if identifiable { std[1].map(|s| s / (rate * rate)) } else { None };
    Ok(FitResult {
        model: FitModel::Exponential,
        params: named(&["amplitude", "rate"], &[amp, rate]),
        std_errors: named(&["amplitude", "rate"], &std),
        derived: BTreeMap::from([
            ("lifetime".to_string(), lifetime),
            ("lifetime_std_error".to_string(), lifetime_err),
        ]),
        residual_norm: out.cost().sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        identifiable,
        cost_history: out.cost_history,
    })
}

/// Period of the sin⁴ transfer profile for a shift difference Δν.
pub fn sin4_period(delta_nu_hz: f64) -> f64 {
    2.0 * SQRT_2 / delta_nu_hz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ScanType;

    fn synth(
        scan: ScanType,
        x: Vec<f64>,
        p: &[f64],
        model: fn(&[f64], f64, &mut [f64]) -> f64,
    ) -> ScanCurve {
        let mut g = vec![0.0; p.len()];
        let y = x.iter().map(|&v| model(p, v, &mut g)).collect();
        ScanCurve::new(scan, x, y).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn lorentzian_self_consistency() {
        let truth = [17.5, 0.9, 0.45, 1.0];
        let c = synth(ScanType::Dip, grid(14.0, 21.0, 61), &truth, lorentzian);
        let fit = fit_lorentzian_dip(&c).unwrap();
        assert!(fit.converged);
        for (name, t) in ["center", "width", "depth", "baseline"].iter().zip(truth) {
            assert!((fit.param(name) / t - 1.0).abs() < 1e-6, "{name}");
        }
    }

    #[test]
    fn flat_curve_is_degenerate() {
        let c = ScanCurve::new(ScanType::Dip, grid(14.0, 21.0, 20), vec![1.0; 20]).unwrap();
        let fit = fit_lorentzian_dip(&c).unwrap();
        assert!(!fit.converged || (fit.param("depth").abs() < 1e-9 && !fit.identifiable));
    }

    #[test]
    fn too_few_points() {
        let c = ScanCurve::new(ScanType::Dip, vec![1.0, 2.0, 3.0], vec![1.0, 0.5, 1.0]).unwrap();
        assert!(fit_lorentzian_dip(&c).is_err());
    }

    #[test]
    fn sin4_self_consistency() {
        let period = sin4_period(2.15);
        assert!((period - 1.3157).abs() < 2e-4);
        let c = synth(ScanType::Duration, grid(0.0, 1.0, 41), &[period, 0.5], sin4);
        let fit = fit_sin4(&c, false).unwrap();
        assert!(fit.converged);
        assert!((fit.param("period") / period - 1.0).abs() < 1e-6);
        assert!((fit.derived("delta_nu_hz").unwrap() - 2.15).abs() < 1e-6);
        assert!((fit.derived("first_maximum_s").unwrap() - 0.3289).abs() < 1e-4);
        let with_c = synth(ScanType::Duration, grid(0.0, 1.0, 41), &[period, 0.3, 0.05], sin4);
        let fit = fit_sin4(&with_c, true).unwrap();
        assert!((fit.param("offset") - 0.05).abs() < 1e-8);
    }

    #[test]
    fn sin4_second_pair_maximum() {
        assert!((sin4_period(2.13) / 4.0 - 0.332).abs() < 1e-3);
    }

    #[test]
    fn sin4_short_span_is_unidentifiable() {
        let period = sin4_period(2.15);
        let c = synth(ScanType::Duration, grid(0.0, 0.3, 12), &[period, 0.5], sin4);
        assert!(matches!(fit_sin4(&c, false), Err(Error::Fit(_))));
    }

    #[test]
    fn exponential_exact_recovery() {
        let c = synth(ScanType::Evolve, grid(0.0, 60.0, 13), &[0.34, 1.0 / 25.1], exponential);
        let fit = fit_exponential(&c).unwrap();
        assert!(fit.converged && fit.identifiable);
        assert!((fit.derived("lifetime").unwrap() - 25.1).abs() < 1e-6);
    }

    #[test]
    fn exponential_constant_is_not_identifiable() {
        let c = ScanCurve::new(ScanType::Evolve, grid(0.0, 10.0, 6), vec![0.3; 6]).unwrap();
        let fit = fit_exponential(&c).unwrap();
        assert!(!fit.identifiable);
        assert_eq!(fit.derived("lifetime"), None);
    }

    #[test]
    fn exponential_rejects_non_positive() {
        let c = ScanCurve::new(ScanType::Evolve, vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 0.5]).unwrap();
        assert!(fit_exponential(&c).is_err());
    }

    #[test]
    fn cost_history_non_increasing() {
        let truth = [17.5, 0.9, 0.45, 1.0];
        let mut c = synth(ScanType::Dip, grid(14.0, 21.0, 31), &truth, lorentzian);
        c = c.map_y(|x, y| y + 0.01 * (7.0 * x).sin()).unwrap();
        let fit = fit_lorentzian_dip(&c).unwrap();
        assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn scale_invariance() {
        let c = synth(ScanType::Evolve, grid(0.0, 5.0, 11), &[0.8, 1.0 / 2.15], exponential)
            .map_y(|x, y| y * (1.0 + 0.01 * (3.0 * x).cos()))
            .unwrap();
        let a = fit_exponential(&c).unwrap();
        let b = fit_exponential(&c.clone().map_y(|_, y| 7.5 * y).unwrap()).unwrap();
        assert!((a.param("rate") / b.param("rate") - 1.0).abs() < 1e-8);
        assert!((b.param("amplitude") / a.param("amplitude") - 7.5).abs() < 1e-7);
    }

    #[test]
    fn result_json_round_trip() {
        let c = synth(ScanType::Evolve, grid(0.0, 5.0, 6), &[1.0, 0.5], exponential);
        let fit = fit_exponential(&c).unwrap();
        let back: FitResult = serde_json::from_str(&fit.to_json().unwrap()).unwrap();
        assert_eq!(fit, back);
    }
}
