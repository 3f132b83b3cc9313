//! Built-in scenario presets.

use super::config::{Cutoffs, FitConfig, InitialConditions, OutputPaths, ScenarioConfig, ScenarioTag};
use crate::integrator::IntegratorConfig;
use crate::model::PhysicalParams;
use crate::moments::Closure;
use crate::{Error, Result};

pub const PRESET_NAMES: [&str; 4] = ["fig2a", "fig2b", "dicke4", "oracle"];

fn base(name: &str, scenario: ScenarioTag, m0: f64, t_end: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: Some(name.into()),
        unit: "kappa".into(),
        scenario,
        params: PhysicalParams::large_ensemble(),
        clamp_s3: false,
        clamp_cavity: false,
        closure: Closure::Factorized,
        initial: InitialConditions { m0, ..Default::default() },
        cutoffs: None,
        t_end,
        integrator: IntegratorConfig { record_stride: Some(0.5), ..Default::default() },
        output: OutputPaths::default(),
        fit: FitConfig::default(),
    }
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        // N = 10^6, g = 10^-3, ηΩ = 5·10^-4, one common mode, 10^3 phonons
        "fig2a" => base(name, ScenarioTag::Common, 1e3, 200.0),
        // individual modes, 10^9 phonons in total, cavity and dipole frozen
        "fig2b" => {
            ScenarioConfig { clamp_s3: true, clamp_cavity: true, ..base(name, ScenarioTag::Individual, 1e9, 200.0) }
        }
        // N = 4 exact run with x = 0.25, y = 1
        "dicke4" => ScenarioConfig {
            params: PhysicalParams {
                n_particles: 4,
                g: 0.5,
                kappa: 1.0,
                gamma: 0.0,
                eta: 0.05,
                rabi: vec![5.0],
                trap_freqs: vec![50.0],
            },
            cutoffs: Some(Cutoffs { phonon: 6, photon: 6 }),
            ..base(name, ScenarioTag::DickeExact, 2.0, 150.0)
        },
        "oracle" => base(name, ScenarioTag::BosonicOracle, 1e3, 200.0),
        _ => {
            return Err(Error::Config(format!("unknown preset '{name}', expected one of {}", PRESET_NAMES.join(", "))))
        }
    };
    Ok(cfg)
}
