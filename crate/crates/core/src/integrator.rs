//! Adaptive Dormand-Prince 5(4) integration of real first-order systems.
//!
//! Output is sampled either at every accepted step or on a fixed stride via
//! cubic Hermite interpolation between accepted steps, so the output grid is
//! independent of step-size control.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; unbounded when infinite (`null` in JSON).
    #[serde(deserialize_with = "null_as_infinity")]
    pub max_step: f64,
    /// First trial step; `0` selects one automatically.
    pub initial_step: f64,
    pub max_steps: usize,
    /// Output sampling interval; `None` records every accepted step.
    pub record_stride: Option<f64>,
    /// Stop once the derivative norm has fallen to this fraction of its peak.
    pub steady_threshold: Option<f64>,
}

fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 0.0,
            max_steps: 1_000_000,
            record_stride: None,
            steady_threshold: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::param("rel_tol", "must be finite and > 0"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::param("abs_tol", "must be finite and > 0"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::param("max_step", "must be > 0"));
        }
        if !(self.initial_step >= 0.0 && self.initial_step.is_finite()) {
            return Err(Error::param("initial_step", "must be finite and >= 0"));
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be > 0"));
        }
        if let Some(s) = self.record_stride {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::param("record_stride", "must be finite and > 0"));
            }
        }
        if let Some(th) = self.steady_threshold {
            if !(th > 0.0 && th < 1.0) {
                return Err(Error::param("steady_threshold", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TEnd,
    SteadyState,
    StepLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Recorded solution. `derivatives[i]` is the vector field evaluated at
/// `(times[i], states[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub terminated_by: Termination,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Outcome of [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub terminated_by: Termination,
    pub t_final: f64,
    pub stats: StepStats,
}

struct Recorder<O> {
    observer: O,
    f_rec: Vec<f64>,
    with_derivatives: bool,
    threshold: Option<f64>,
    peak: f64,
    steady: bool,
}

impl<O> Recorder<O>
where
    O: FnMut(f64, &[f64], &[f64]) -> Result<()>,
{
    fn record<F>(
        &mut self,
        t: f64,
        y: &[f64],
        f_known: Option<&[f64]>,
        rhs: &mut F,
        stats: &mut StepStats,
    ) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !self.with_derivatives {
            return (self.observer)(t, y, &[]);
        }
        match f_known {
            Some(f) => self.f_rec.copy_from_slice(f),
            None => {
                rhs(t, y, &mut self.f_rec);
                stats.evaluations += 1;
            }
        }
        if let Some(th) = self.threshold {
            let norm = max_norm(&self.f_rec);
            if norm > self.peak {
                self.peak = norm;
            } else if norm <= th * self.peak {
                self.steady = true;
            }
            if self.peak == 0.0 {
                self.steady = true;
            }
        }
        (self.observer)(t, y, &self.f_rec)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    cfg: &IntegratorConfig,
    evals: &mut usize,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let scale: Vec<f64> = y0.iter().map(|y| cfg.abs_tol + cfg.rel_tol * y.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span).min(cfg.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(t0 + h0, &y1, &mut f1);
    *evals += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span).min(cfg.max_step)
}

/// Core stepping loop. `observer` receives every recorded `(t, y, f)`; `f` is
/// the exact vector field at the recorded state when `with_derivatives` is
/// set and empty otherwise.
pub fn integrate_with<F, O>(
    mut rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    config: &IntegratorConfig,
    with_derivatives: bool,
    mut observer: O,
) -> Result<RunSummary>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64], &[f64]) -> Result<()>,
{
    config.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::param("t_span", format!("requires finite t1 > t0, got [{t0}, {t1}]")));
    }
    if !all_finite(y0) {
        return Err(Error::NonFinite { what: "initial state", t: t0 });
    }
    let with_derivatives = with_derivatives || config.steady_threshold.is_some();
    let dim = y0.len();
    let mut stats = StepStats::default();

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; dim];
    rhs(t, &y, &mut k1);
    stats.evaluations += 1;
    if !all_finite(&k1) {
        return Err(Error::NonFinite { what: "vector field", t });
    }
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut interp = vec![0.0; dim];

    let mut rec = Recorder {
        observer: &mut observer,
        f_rec: vec![0.0; dim],
        with_derivatives,
        threshold: config.steady_threshold,
        peak: f64::NEG_INFINITY,
        steady: false,
    };

    rec.record(t, &y, Some(&k1), &mut rhs, &mut stats)?;
    if rec.steady {
        return Ok(RunSummary { terminated_by: Termination::SteadyState, t_final: t, stats });
    }
    let mut next_record = 1usize;
    let record_time = |k: usize| -> f64 {
        let s = config.record_stride.unwrap_or(f64::INFINITY);
        (t0 + k as f64 * s).min(t1)
    };

    let span = t1 - t0;
    let mut h = if config.initial_step > 0.0 {
        config.initial_step.min(config.max_step).min(span)
    } else {
        initial_step(&mut rhs, t, &y, &k1, span, config, &mut stats.evaluations)
    };
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= config.max_steps {
            return Ok(RunSummary { terminated_by: Termination::StepLimit, t_final: t, stats });
        }
        let remaining = t1 - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        for i in 0..dim {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &stage, &mut k2);
        for i in 0..dim {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &stage, &mut k3);
        for i in 0..dim {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &stage, &mut k4);
        for i in 0..dim {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &stage, &mut k5);
        for i in 0..dim {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + h };
        rhs(t_new, &stage, &mut k6);
        for i in 0..dim {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t_new, &y_new, &mut k7);
        stats.evaluations += 6;

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..dim {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e.abs() / sc;
            if !r.is_finite() || !k7[i].is_finite() {
                finite = false;
            }
            err = err.max(r);
        }

        if !finite || err > 1.0 {
            stats.rejected += 1;
            let factor = if finite { (SAFETY * err.powf(-0.2)).max(MIN_FACTOR) } else { MIN_FACTOR };
            h *= factor;
            last_rejected = true;
            continue;
        }

        // accepted: emit records inside (t, t_new]
        stats.accepted += 1;
        if config.record_stride.is_some() {
            loop {
                let tr = record_time(next_record);
                if tr > t_new {
                    break;
                }
                if tr == t_new {
                    rec.record(tr, &y_new, Some(&k7), &mut rhs, &mut stats)?;
                } else {
                    let theta = (tr - t) / h;
                    let h10 = theta * (1.0 - theta).powi(2);
                    let h01 = theta * theta * (3.0 - 2.0 * theta);
                    let h11 = theta * theta * (theta - 1.0);
                    for i in 0..dim {
                        // h00 = 1 − h01; this form reproduces constant components exactly
                        interp[i] = y[i] + h01 * (y_new[i] - y[i]) + h * (h10 * k1[i] + h11 * k7[i]);
                    }
                    rec.record(tr, &interp, None, &mut rhs, &mut stats)?;
                }
                next_record += 1;
                if tr == t1 || rec.steady {
                    break;
                }
            }
        } else {
            rec.record(t_new, &y_new, Some(&k7), &mut rhs, &mut stats)?;
        }

        std::mem::swap(&mut y, &mut y_new);
        std::mem::swap(&mut k1, &mut k7);
        t = t_new;

        if rec.steady {
            return Ok(RunSummary { terminated_by: Termination::SteadyState, t_final: t, stats });
        }
        if last {
            return Ok(RunSummary { terminated_by: Termination::TEnd, t_final: t, stats });
        }

        let mut factor = if err == 0.0 { MAX_FACTOR } else { SAFETY * err.powf(-0.2) };
        factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
        if last_rejected {
            factor = factor.min(1.0);
        }
        last_rejected = false;
        h = (h * factor).min(config.max_step);
    }
}

/// Integrates `rhs` over `t_span`, recording states and vector-field values.
pub fn integrate<F>(mut rhs: F, y0: &[f64], t_span: (f64, f64), config: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut derivatives = Vec::new();
    let summary = integrate_with(&mut rhs, y0, t_span, config, true, |t, y, f| {
        if !all_finite(y) {
            return Err(Error::NonFinite { what: "state", t });
        }
        times.push(t);
        states.push(y.to_vec());
        derivatives.push(f.to_vec());
        Ok(())
    })?;
    Ok(Trajectory { times, states, derivatives, terminated_by: summary.terminated_by, stats: summary.stats })
}

/// First recorded time, at or after the peak of the derivative max-norm, at
/// which that norm has dropped to `threshold` times the peak.
pub fn detect_steady(traj: &Trajectory, threshold: f64) -> Option<f64> {
    let norms: Vec<f64> = traj.derivatives.iter().map(|f| max_norm(f)).collect();
    let (peak_idx, peak) =
        norms
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if norms.is_empty() {
        return None;
    }
    norms[peak_idx..].iter().position(|&v| v <= threshold * peak).map(|i| traj.times[peak_idx + i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn exponential_decay_endpoint() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(decay, &[1.0], (0.0, 1.0), &cfg).unwrap();
        let end = traj.last_state()[0];
        assert!((end - (-1.0f64).exp()).abs() < 10.0 * cfg.rel_tol, "{end}");
        assert_eq!(traj.terminated_by, Termination::TEnd);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let cfg = IntegratorConfig::default();
        let period = 2.0 * std::f64::consts::PI;
        let traj = integrate(oscillator, &[1.0, 0.0], (0.0, period), &cfg).unwrap();
        let end = traj.last_state();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8, "{end:?}");
    }

    #[test]
    fn stride_sampling_hits_grid_and_interpolates() {
        let cfg = IntegratorConfig { record_stride: Some(0.1), ..Default::default() };
        let traj = integrate(decay, &[1.0], (0.0, 2.05), &cfg).unwrap();
        assert_eq!(traj.times.len(), 22);
        assert_eq!(*traj.times.last().unwrap(), 2.05);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            // Hermite interpolation error of a smooth solution at these steps
            assert!((s[0] - (-t).exp()).abs() < 1e-7, "t={t}");
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn step_limit_is_reported_not_raised() {
        let cfg = IntegratorConfig { max_steps: 3, ..Default::default() };
        let traj = integrate(oscillator, &[1.0, 0.0], (0.0, 100.0), &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::StepLimit);
    }

    #[test]
    fn underflow_names_time_of_failure() {
        // blows up at t = 1
        let blowup = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let err = integrate(blowup, &[1.0], (0.0, 2.0), &IntegratorConfig::default()).unwrap_err();
        match err {
            Error::StepUnderflow { t, .. } => assert!((t - 1.0).abs() < 1e-3, "t={t}"),
            Error::NonFinite { t, .. } => assert!((t - 1.0).abs() < 1e-3, "t={t}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_span_rejected() {
        assert!(integrate(decay, &[1.0], (1.0, 1.0), &IntegratorConfig::default()).is_err());
        assert!(integrate(decay, &[f64::NAN], (0.0, 1.0), &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn halving_tolerance_converges() {
        let run = |rtol: f64| {
            let cfg = IntegratorConfig { rel_tol: rtol, abs_tol: rtol * 1e-3, ..Default::default() };
            integrate(oscillator, &[1.0, 0.0], (0.0, 10.0), &cfg).unwrap().last_state().to_vec()
        };
        let coarse = run(1e-6);
        let fine = run(5e-7);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic_bitwise() {
        let cfg = IntegratorConfig { record_stride: Some(0.37), ..Default::default() };
        let a = integrate(oscillator, &[1.0, 0.3], (0.0, 20.0), &cfg).unwrap();
        let b = integrate(oscillator, &[1.0, 0.3], (0.0, 20.0), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn steady_detection() {
        let constant = |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0;
        let traj = integrate(constant, &[2.0], (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(detect_steady(&traj, 1e-6), Some(0.0));

        let growth = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let traj = integrate(growth, &[1.0], (0.0, 3.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(detect_steady(&traj, 0.5), None);

        let traj = integrate(decay, &[1.0], (0.0, 20.0), &IntegratorConfig::default()).unwrap();
        let ts = detect_steady(&traj, 1e-3).unwrap();
        assert!(ts >= 1e3f64.ln() - 1.0 && ts < 20.0, "{ts}");
    }

    #[test]
    fn steady_threshold_stops_early() {
        let cfg = IntegratorConfig { steady_threshold: Some(1e-4), record_stride: Some(0.5), ..Default::default() };
        let traj = integrate(decay, &[1.0], (0.0, 100.0), &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::SteadyState);
        let t_end = *traj.times.last().unwrap();
        assert!(t_end < 12.0 && t_end >= 1e4f64.ln() - 0.5, "{t_end}");
    }
}
