//! JSON scenario configuration.

use serde::{Deserialize, Serialize};

use crate::integrator::IntegratorConfig;
use crate::model::PhysicalParams;
use crate::moments::{Closure, MomentState, Scenario, ScenarioKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioTag {
    Common,
    Individual,
    DickeExact,
    BosonicOracle,
}

impl ScenarioTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioTag::Common => "common",
            ScenarioTag::Individual => "individual",
            ScenarioTag::DickeExact => "dicke-exact",
            ScenarioTag::BosonicOracle => "bosonic-oracle",
        }
    }

    /// Which analytic cooling law the scenario is compared with.
    pub fn law(self) -> Scenario {
        match self {
            ScenarioTag::Individual => Scenario::Individual,
            _ => Scenario::Common,
        }
    }
}

/// Initial moments; unset overrides take the all-ground values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    /// Initial phonon number (`m̃₀` for the individual scenario). Exact runs
    /// start from the Fock state with this many phonons.
    pub m0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<f64>,
}

impl InitialConditions {
    pub fn state(&self, n_particles: u64) -> MomentState {
        let g = MomentState::ground(self.m0, n_particles);
        MomentState {
            n: self.n.unwrap_or(g.n),
            s3: self.s3.unwrap_or(g.s3),
            u1: self.u1.unwrap_or(g.u1),
            u2: self.u2.unwrap_or(g.u2),
            k3: self.k3.unwrap_or(g.k3),
            ..g
        }
    }

    fn has_overrides(&self) -> bool {
        [self.n, self.s3, self.u1, self.u2, self.k3].iter().any(Option::is_some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    pub phonon: usize,
    pub photon: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// File names relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub tolerance: f64,
    /// Explicit `[t_lo, t_hi]`; the default window is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Relative slack on the local log-slope when estimating the transient.
    pub transient_rel: f64,
    /// Fraction of the peak derivative norm reported as the steady-state time.
    pub steady_threshold: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tolerance: 0.05, window: None, transient_rel: 0.01, steady_threshold: 1e-6 }
    }
}

fn default_unit() -> String {
    "kappa".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Frequency unit declared for every frequency in the file.
    #[serde(default = "default_unit")]
    pub unit: String,
    pub scenario: ScenarioTag,
    pub params: PhysicalParams,
    #[serde(default)]
    pub clamp_s3: bool,
    #[serde(default)]
    pub clamp_cavity: bool,
    #[serde(default)]
    pub closure: Closure,
    pub initial: InitialConditions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Cutoffs>,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub fit: FitConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> ScenarioKind {
        ScenarioKind { tag: self.scenario.law(), clamp_s3: self.clamp_s3, clamp_cavity: self.clamp_cavity }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.scenario.as_str().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", "must be finite and > 0"));
        }
        if !(self.initial.m0 >= 0.0 && self.initial.m0.is_finite()) {
            return Err(Error::param("initial.m0", "must be finite and >= 0"));
        }
        if !(self.fit.tolerance >= 0.0) {
            return Err(Error::param("fit.tolerance", "must be >= 0"));
        }
        if let Some([lo, hi]) = self.fit.window {
            if !(hi > lo) {
                return Err(Error::param("fit.window", "requires t_hi > t_lo"));
            }
        }
        if !(self.fit.steady_threshold > 0.0 && self.fit.steady_threshold < 1.0) {
            return Err(Error::param("fit.steady_threshold", "must lie in (0, 1)"));
        }
        match self.scenario {
            ScenarioTag::DickeExact => {
                let cut = self.cutoffs.ok_or_else(|| Error::param("cutoffs", "required for dicke-exact runs"))?;
                if cut.phonon < 2 || cut.photon < 2 {
                    return Err(Error::param("cutoffs", "phonon and photon cutoffs must be >= 2"));
                }
                let m0 = self.initial.m0;
                if m0.fract() != 0.0 || m0 >= cut.phonon as f64 {
                    return Err(Error::param(
                        "initial.m0",
                        format!(
                            "exact runs start in a Fock state: need an integer below the phonon cutoff {}",
                            cut.phonon
                        ),
                    ));
                }
                if self.initial.has_overrides() {
                    return Err(Error::param("initial", "moment overrides are not supported for exact runs"));
                }
                if self.clamp_s3 || self.clamp_cavity {
                    return Err(Error::param("clamp_s3", "clamps apply to moment scenarios only"));
                }
            }
            ScenarioTag::BosonicOracle => {
                if self.clamp_s3 || self.clamp_cavity {
                    return Err(Error::param("clamp_s3", "clamps apply to moment scenarios only"));
                }
            }
            ScenarioTag::Common | ScenarioTag::Individual => {
                if self.cutoffs.is_some() {
                    return Err(Error::param("cutoffs", "only meaningful for dicke-exact runs"));
                }
                if self.scenario == ScenarioTag::Individual && self.closure != Closure::Factorized {
                    return Err(Error::param("closure", "the individual scenario has a single closure"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets::preset;

    #[test]
    fn presets_round_trip_through_json() {
        for name in crate::cli::presets::PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn empty_rabi_names_the_field() {
        let mut cfg = preset("fig2a").unwrap();
        cfg.params.rabi.clear();
        cfg.params.trap_freqs.clear();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("rabi"), "{err}");
    }

    #[test]
    fn exact_runs_need_cutoffs() {
        let mut cfg = preset("dicke4").unwrap();
        cfg.cutoffs = None;
        assert!(cfg.validate().unwrap_err().to_string().contains("cutoffs"));
        let mut cfg = preset("dicke4").unwrap();
        cfg.initial.m0 = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = serde_json::to_value(preset("fig2a").unwrap()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(ScenarioConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn overrides_apply() {
        let ic = InitialConditions { m0: 5.0, k3: Some(-1.0), ..Default::default() };
        let s = ic.state(10);
        assert_eq!(s.to_array(), [5.0, 0.0, -5.0, 0.0, 0.0, -1.0]);
    }
}
