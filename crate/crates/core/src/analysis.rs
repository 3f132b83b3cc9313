//! Exponential rate extraction and comparison with the analytic cooling laws.

use serde::{Deserialize, Serialize};

use crate::integrator::Trajectory;
use crate::model::DerivedCouplings;
use crate::moments::{analytic_rate, ScenarioKind, COLUMNS};
use crate::{Error, Result};

pub const MIN_FIT_POINTS: usize = 8;

/// Window start in units of the slower collective coupling period.
pub const TRANSIENT_PERIODS: f64 = 10.0;

/// Window end: the fitted quantity has dropped by `e^DROP_EFOLDS`.
pub const DROP_EFOLDS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `−d ln(value)/dt`; positive for decay.
    pub rate: f64,
    /// `ln(value)` at `t = 0` of the fitted line.
    pub intercept: f64,
    pub fit_window: [f64; 2],
    /// RMS residual of the fit in `ln(value)`.
    pub residual_rms: f64,
    pub n_points: usize,
}

/// Least-squares line through `(t, ln v)` over the points with `t` in `window`.
pub fn fit_series(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (t_lo, t_hi) = window;
    if !(t_hi > t_lo) {
        return Err(Error::Fit(format!("empty fit window [{t_lo}, {t_hi}]")));
    }
    let mut ts = Vec::new();
    let mut ls = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < t_lo || t > t_hi {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("value {v} at t = {t} is not strictly positive")));
        }
        ts.push(t);
        ls.push(v.ln());
    }
    let n = ts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{n} points in [{t_lo}, {t_hi}], need at least {MIN_FIT_POINTS}")));
    }
    // offsets from the first point keep a constant series exactly flat
    let (t0, l0) = (ts[0], ls[0]);
    let dt: Vec<f64> = ts.iter().map(|t| t - t0).collect();
    let dl: Vec<f64> = ls.iter().map(|l| l - l0).collect();
    let t_mean = dt.iter().sum::<f64>() / n as f64;
    let l_mean = dl.iter().sum::<f64>() / n as f64;
    let (mut stt, mut stl) = (0.0, 0.0);
    for (t, l) in dt.iter().zip(&dl) {
        stt += (t - t_mean) * (t - t_mean);
        stl += (t - t_mean) * (l - l_mean);
    }
    let slope = stl / stt;
    let offset = l_mean - slope * t_mean;
    let ss: f64 = dt.iter().zip(&dl).map(|(t, l)| (l - offset - slope * t).powi(2)).sum();
    let intercept = l0 + offset - slope * t0;
    let rate = if slope == 0.0 { 0.0 } else { -slope };
    Ok(RateFit { rate, intercept, fit_window: [ts[0], ts[n - 1]], residual_rms: (ss / n as f64).sqrt(), n_points: n })
}

pub fn column_index(name: &str) -> Result<usize> {
    COLUMNS
        .iter()
        .position(|c| *c == name)
        .ok_or_else(|| Error::Fit(format!("unknown column '{name}', expected one of {COLUMNS:?}")))
}

pub fn fit_exponential_rate(traj: &Trajectory, column: &str, window: (f64, f64)) -> Result<RateFit> {
    let idx = column_index(column)?;
    fit_series(&traj.times, &traj.column(idx), window)
}

/// `[10/min(x, y), t_drop]` with `t_drop` the first time the series falls by
/// `e³` relative to the window start, or the last time. Without a coupling
/// there is no transient and the whole series is used.
pub fn default_window(times: &[f64], values: &[f64], c: &DerivedCouplings) -> Result<(f64, f64)> {
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::Fit("empty series".into()));
    };
    let slow = c.x.min(c.y);
    if !(slow > 0.0) {
        return Ok((first, last));
    }
    let t_lo = first + TRANSIENT_PERIODS / slow;
    let start = times
        .iter()
        .position(|&t| t >= t_lo)
        .ok_or_else(|| Error::Fit(format!("trajectory ends before the window start t = {t_lo}")))?;
    let floor = values[start] * (-DROP_EFOLDS).exp();
    let end = values[start..].iter().position(|&v| v <= floor).map_or(times.len() - 1, |i| start + i);
    Ok((t_lo, times[end]))
}

/// Earliest recorded time after which every local log-slope up to the end of
/// the fit window stays within `rel` of the fitted rate.
pub fn transient_time(times: &[f64], values: &[f64], fit: &RateFit, rel: f64) -> Option<f64> {
    if fit.rate == 0.0 {
        return None;
    }
    let end = times.iter().rposition(|&t| t <= fit.fit_window[1])?;
    let mut settled = None;
    for i in (0..end).rev() {
        let (v0, v1) = (values[i], values[i + 1]);
        if !(v0 > 0.0 && v1 > 0.0) {
            break;
        }
        let local = -(v1.ln() - v0.ln()) / (times[i + 1] - times[i]);
        if ((local - fit.rate) / fit.rate).abs() > rel {
            break;
        }
        settled = Some(times[i]);
    }
    settled
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub fit: RateFit,
    pub analytic_rate: f64,
    pub relative_error: Option<f64>,
    pub transient_time: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn relative_error(fitted: f64, analytic: f64) -> Option<f64> {
    if analytic > 0.0 {
        Some((fitted - analytic).abs() / analytic)
    } else if fitted == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

pub fn compare_rates(scenario: &str, fit: RateFit, analytic: f64, tol: f64) -> ComparisonReport {
    let relative_error = relative_error(fit.rate, analytic);
    let note =
        relative_error.is_none().then(|| format!("analytic rate is {analytic} but the fitted rate is {}", fit.rate));
    ComparisonReport {
        scenario: scenario.to_string(),
        fit,
        analytic_rate: analytic,
        pass: relative_error.is_some_and(|e| e <= tol),
        relative_error,
        transient_time: None,
        tolerance: tol,
        note,
    }
}

pub fn compare_to_analytic(
    fit: RateFit,
    c: &DerivedCouplings,
    kappa: f64,
    scenario: &ScenarioKind,
    tol: f64,
) -> Result<ComparisonReport> {
    if !(tol >= 0.0) {
        return Err(Error::param("tol", "must be >= 0"));
    }
    let analytic = analytic_rate(scenario.tag, c, kappa)?;
    Ok(compare_rates(scenario.tag.as_str(), fit, analytic, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(rate: f64, amp: f64, t_end: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let times: Vec<f64> = (0..=(t_end / dt).round() as usize).map(|i| i as f64 * dt).collect();
        let values = times.iter().map(|t| amp * (-rate * t).exp()).collect();
        (times, values)
    }

    #[test]
    fn exact_on_pure_exponential() {
        let (t, v) = synthetic(0.0664, 1000.0, 60.0, 0.5);
        let fit = fit_series(&t, &v, (0.0, 50.0)).unwrap();
        assert!((fit.rate - 0.0664).abs() / 0.0664 < 1e-9);
        assert!((fit.intercept - 1000f64.ln()).abs() < 1e-9);
        assert_eq!(fit.fit_window, [0.0, 50.0]);
        assert_eq!(fit.n_points, 101);
        let shifted = fit_series(&t, &v, (20.5, 57.0)).unwrap();
        assert!((shifted.rate - fit.rate).abs() / fit.rate < 1e-9);
    }

    #[test]
    fn constant_series() {
        let t: Vec<f64> = (0..20).map(f64::from).collect();
        let fit = fit_series(&t, &[3.0; 20], (0.0, 19.0)).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_eq!(fit.residual_rms, 0.0);
    }

    #[test]
    fn fit_errors() {
        let t: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(fit_series(&t, &[1.0; 20], (0.0, 5.0)).is_err());
        let mut v = vec![1.0; 20];
        v[3] = 0.0;
        assert!(fit_series(&t, &v, (0.0, 19.0)).is_err());
        assert!(fit_series(&t, &[1.0; 20], (5.0, 5.0)).is_err());
    }

    #[test]
    fn window_convention() {
        let (t, v) = synthetic(0.1, 1.0, 200.0, 0.5);
        let c = DerivedCouplings::from_xy(0.25, 1.0);
        let (lo, hi) = default_window(&t, &v, &c).unwrap();
        assert_eq!(lo, 40.0);
        assert!((hi - 70.0).abs() <= 0.5);
        let (t, v) = synthetic(0.001, 1.0, 100.0, 0.5);
        assert_eq!(default_window(&t, &v, &c).unwrap(), (40.0, 100.0));
        assert!(default_window(&t[..10], &v[..10], &c).is_err());
        let off = DerivedCouplings::from_xy(0.0, 1.0);
        assert_eq!(default_window(&t, &v, &off).unwrap(), (0.0, 100.0));
    }

    #[test]
    fn transient_of_pure_exponential_is_start() {
        let (t, v) = synthetic(0.2, 5.0, 30.0, 0.5);
        let fit = fit_series(&t, &v, (0.0, 30.0)).unwrap();
        assert_eq!(transient_time(&t, &v, &fit, 1e-6), Some(0.0));
    }

    #[test]
    fn comparisons() {
        let fit = RateFit { rate: 0.0664, intercept: 0.0, fit_window: [0.0, 1.0], residual_rms: 0.0, n_points: 8 };
        let c = DerivedCouplings::from_xy(0.25, 1.0);
        let r = compare_to_analytic(fit, &c, 1.0, &ScenarioKind::common(), 0.05).unwrap();
        assert!(r.pass);
        assert!((r.relative_error.unwrap() - 9.4e-5).abs() < 1e-6);

        let fit = RateFit { rate: 0.10, ..fit };
        assert!(!compare_to_analytic(fit, &c, 1.0, &ScenarioKind::individual(), 0.05).unwrap().pass);

        let r = compare_rates("common", fit, 0.10, 0.0);
        assert_eq!(r.relative_error, Some(0.0));
        assert!(r.pass);

        let r = compare_rates("common", fit, 0.0, 0.05);
        assert!(!r.pass && r.note.is_some());
    }
}
