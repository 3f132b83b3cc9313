//! Parallel parameter sweeps with order-deterministic aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ScenarioConfig;
use super::presets::preset;
use super::run::run_config;
use crate::{Error, Result};

/// Environment variable bounding the number of sweep workers.
pub const JOBS_ENV: &str = "COLLCOOL_JOBS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path of a numeric config field, e.g. `params.g` or `params.rabi.0`.
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ScenarioConfig>,
    /// Preset used when `base` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub axes: Vec<SweepAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub outcome: std::result::Result<PointResult, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub x: f64,
    pub y: f64,
    pub rate_fit: f64,
    pub rate_analytic: f64,
    pub relative_error: Option<f64>,
    pub pass: bool,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn base_config(&self) -> Result<ScenarioConfig> {
        match (&self.base, &self.preset) {
            (Some(b), None) => Ok(b.clone()),
            (None, Some(p)) => preset(p),
            _ => Err(Error::param("base", "give exactly one of `base` and `preset`")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let base = self.base_config()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::param("axes", "one or two swept parameters are supported"));
        }
        let tree = serde_json::to_value(&base)?;
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(Error::param(format!("axes.{}", axis.name), "needs at least one value"));
            }
            match lookup(&tree, &axis.name) {
                Some(Value::Number(_)) => {}
                _ => return Err(Error::param("axes", format!("`{}` is not a numeric config field", axis.name))),
            }
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::param("axes", "swept parameters must differ"));
        }
        if self.jobs == Some(0) {
            return Err(Error::param("jobs", "must be >= 1"));
        }
        Ok(())
    }

    /// Grid points in lexicographic order, first axis slowest.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.name.clone()).collect();
        cols.extend(
            ["x", "y", "rate_fit", "rate_analytic", "relative_error", "pass", "status"].iter().map(|s| s.to_string()),
        );
        cols
    }
}

fn lookup<'a>(tree: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(tree, |node, key| match node {
        Value::Object(map) => map.get(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

fn lookup_mut<'a>(tree: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(tree, |node, key| match node {
        Value::Object(map) => map.get_mut(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(move |i| items.get_mut(i)),
        _ => None,
    })
}

/// Copy of `base` with the numeric field at `path` replaced.
pub fn with_value(base: &ScenarioConfig, path: &str, value: f64) -> Result<ScenarioConfig> {
    let mut tree = serde_json::to_value(base)?;
    let slot =
        lookup_mut(&mut tree, path).ok_or_else(|| Error::param("axes", format!("`{path}` is not a config field")))?;
    *slot = match slot {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::param(path, format!("expects a non-negative integer, got {value}")));
            }
            Value::from(value as u64)
        }
        Value::Number(_) => Value::from(value),
        _ => return Err(Error::param("axes", format!("`{path}` is not numeric"))),
    };
    serde_json::from_value(tree).map_err(|e| Error::Config(format!("{path} = {value}: {e}")))
}

fn run_point(spec: &SweepSpec, base: &ScenarioConfig, values: &[f64]) -> Result<PointResult> {
    let mut cfg = base.clone();
    for (axis, v) in spec.axes.iter().zip(values) {
        cfg = with_value(&cfg, &axis.name, *v)?;
    }
    let out = run_config(&cfg)?;
    let c = &out.report.comparison;
    Ok(PointResult {
        x: out.report.x,
        y: out.report.y,
        rate_fit: c.fit.rate,
        rate_analytic: c.analytic_rate,
        relative_error: c.relative_error,
        pass: c.pass,
    })
}

/// Worker count: explicit request, then the spec, then [`JOBS_ENV`], then all cores.
pub fn resolve_jobs(requested: Option<usize>, spec: &SweepSpec) -> Result<usize> {
    if let Some(j) = requested.or(spec.jobs) {
        return if j == 0 { Err(Error::param("jobs", "must be >= 1")) } else { Ok(j) };
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|j| *j > 0)
            .ok_or_else(|| Error::Config(format!("{JOBS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let base = spec.base_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let grid = spec.grid();
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|values| SweepRow {
                values: values.clone(),
                outcome: run_point(spec, &base, values).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

pub fn sweep_records(rows: &[SweepRow]) -> Vec<Vec<String>> {
    use super::output::format_number as f;
    rows.iter()
        .map(|row| {
            let mut rec: Vec<String> = row.values.iter().map(|v| f(*v)).collect();
            match &row.outcome {
                Ok(p) => {
                    rec.extend([f(p.x), f(p.y), f(p.rate_fit), f(p.rate_analytic)]);
                    rec.push(p.relative_error.map_or_else(String::new, f));
                    rec.push(p.pass.to_string());
                    rec.push("ok".into());
                }
                Err(msg) => {
                    rec.extend(std::iter::repeat_n(String::new(), 5));
                    rec.push("false".into());
                    rec.push(format!("failed: {msg}"));
                }
            }
            rec
        })
        .collect()
}

pub fn write_sweep<W: std::io::Write>(out: W, spec: &SweepSpec, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(spec.columns())?;
    for rec in sweep_records(rows) {
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axes: Vec<SweepAxis>) -> SweepSpec {
        SweepSpec { base: None, preset: Some("fig2a".into()), axes, jobs: Some(2) }
    }

    #[test]
    fn grid_is_lexicographic() {
        let s = spec(vec![
            SweepAxis { name: "params.g".into(), values: vec![1.0, 2.0] },
            SweepAxis { name: "params.kappa".into(), values: vec![3.0, 4.0, 5.0] },
        ]);
        assert_eq!(
            s.grid(),
            vec![vec![1.0, 3.0], vec![1.0, 4.0], vec![1.0, 5.0], vec![2.0, 3.0], vec![2.0, 4.0], vec![2.0, 5.0]]
        );
    }

    #[test]
    fn field_paths() {
        let base = preset("fig2a").unwrap();
        assert_eq!(with_value(&base, "params.rabi.0", 0.02).unwrap().params.rabi, vec![0.02]);
        assert_eq!(with_value(&base, "params.n_particles", 4.0).unwrap().params.n_particles, 4);
        assert!(with_value(&base, "params.n_particles", 4.5).is_err());
        assert!(with_value(&base, "params.bogus", 1.0).is_err());
        assert!(spec(vec![SweepAxis { name: "scenario".into(), values: vec![1.0] }]).validate().is_err());
        assert!(spec(vec![SweepAxis { name: "t_end".into(), values: vec![] }]).validate().is_err());
    }

    #[test]
    fn failed_points_are_marked() {
        let mut s = spec(vec![SweepAxis { name: "t_end".into(), values: vec![-1.0, 100.0] }]);
        s.axes[0].name = "t_end".into();
        let rows = run_sweep(&s, 2).unwrap();
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        let recs = sweep_records(&rows);
        assert!(recs[0].last().unwrap().starts_with("failed: "));
    }

    #[test]
    fn zero_laser_kappa_sweep() {
        let mut base = preset("fig2a").unwrap();
        base.params.rabi = vec![0.0];
        base.t_end = 20.0;
        let s = SweepSpec {
            base: Some(base),
            preset: None,
            axes: vec![SweepAxis { name: "params.kappa".into(), values: vec![0.5, 1.0, 2.0] }],
            jobs: None,
        };
        for row in run_sweep(&s, 3).unwrap() {
            let p = row.outcome.unwrap();
            assert_eq!((p.rate_fit, p.rate_analytic), (0.0, 0.0));
            assert!(p.pass);
        }
    }
}
