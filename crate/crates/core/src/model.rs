//! Physical parameters, collective couplings and operating-regime checks.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default factor by which one side of a "much greater than" must win.
pub const DEFAULT_DOMINANCE: f64 = 10.0;

/// Raw experimental knobs. All frequencies share one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Number of trapped particles `N`.
    pub n_particles: u64,
    /// Single-particle cavity coupling.
    pub g: f64,
    /// Cavity photon decay rate.
    pub kappa: f64,
    /// Spontaneous decay rate of the excited level; only used for regime reporting.
    #[serde(default)]
    pub gamma: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Rabi frequency of the cooling laser for each addressed vibrational mode.
    pub rabi: Vec<f64>,
    /// Trap frequency of each addressed vibrational mode.
    pub trap_freqs: Vec<f64>,
}

impl PhysicalParams {
    /// Parameters of the large-ensemble cooling figure: `N = 10^6`,
    /// `g = 10^-3 κ`, `ηΩ = 5·10^-4 κ`, in units of `κ`.
    pub fn large_ensemble() -> Self {
        PhysicalParams {
            n_particles: 1_000_000,
            g: 1e-3,
            kappa: 1.0,
            gamma: 0.0,
            eta: 0.05,
            rabi: vec![0.01],
            trap_freqs: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::param("n_particles", "must be at least 1"));
        }
        for (name, v) in [("g", self.g), ("kappa", self.kappa), ("gamma", self.gamma), ("eta", self.eta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.rabi.is_empty() {
            return Err(Error::NoCoolingModes);
        }
        if self.rabi.len() != self.trap_freqs.len() {
            return Err(Error::param(
                "trap_freqs",
                format!("has {} entries but rabi has {}", self.trap_freqs.len(), self.rabi.len()),
            ));
        }
        if let Some(w) = self.rabi.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::param("rabi", format!("entries must be finite and >= 0, got {w}")));
        }
        if let Some(nu) = self.trap_freqs.iter().find(|nu| !nu.is_finite() || **nu <= 0.0) {
            return Err(Error::param("trap_freqs", format!("entries must be finite and > 0, got {nu}")));
        }
        Ok(())
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.n_particles as f64).sqrt()
    }
}

/// Collective couplings seen by the bosonized dipole mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    /// `x_ν = ½ √N η Ω_ν`.
    pub x_per_mode: Vec<f64>,
    /// Laser coupling of the collective phonon mode, `½ √N η Ω`.
    pub x: f64,
    /// Collective cavity coupling `√N g`.
    pub y: f64,
    /// Effective Rabi frequency `(Σ_ν Ω_ν²)^½`.
    pub omega_eff: f64,
}

impl DerivedCouplings {
    /// Couplings given directly; `omega_eff` is left at zero.
    pub fn from_xy(x: f64, y: f64) -> Self {
        DerivedCouplings { x_per_mode: vec![x], x, y, omega_eff: 0.0 }
    }

    pub(crate) fn ratio(&self, what: &'static str) -> Result<f64> {
        if self.y == 0.0 {
            return Err(Error::ZeroCavityCoupling(what));
        }
        Ok(self.x / self.y)
    }
}

pub fn derive_couplings(params: &PhysicalParams) -> Result<DerivedCouplings> {
    params.validate()?;
    let sqrt_n = params.sqrt_n();
    let x_per_mode: Vec<f64> = params.rabi.iter().map(|w| 0.5 * sqrt_n * params.eta * w).collect();
    let omega_eff = params.rabi.iter().map(|w| w * w).sum::<f64>().sqrt();
    Ok(DerivedCouplings { x_per_mode, x: 0.5 * sqrt_n * params.eta * omega_eff, y: sqrt_n * params.g, omega_eff })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRegime {
    /// `ν² / (½ η Ω_ν)²`.
    pub lamb_dicke_margin: f64,
    pub lamb_dicke_ok: bool,
    /// `ν / Ω_ν`.
    pub sideband_margin: f64,
    pub sideband_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub dominance: f64,
    /// `κ / (√N g)`; acceptable inside `[1/dominance, dominance]`.
    pub cavity_ratio: f64,
    pub cavity_ok: bool,
    /// `(½ √N η Ω) / Γ`; must reach `dominance`.
    pub pump_margin: f64,
    pub pump_ok: bool,
    pub strong_damping_ok: bool,
    pub modes: Vec<ModeRegime>,
    pub lamb_dicke_ok: bool,
    pub sideband_ok: bool,
}

fn margin(large: f64, small: f64) -> f64 {
    if small == 0.0 {
        if large == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        large / small
    }
}

/// Evaluates the strong-damping, Lamb-Dicke and resolved-sideband conditions.
///
/// `dominance` is how many times larger the large side of each `≫` must be.
/// The report is produced even for invalid parameter sets; ratios that cannot
/// be formed come out as `NaN` and are flagged not ok.
pub fn check_regime(params: &PhysicalParams, dominance: f64) -> RegimeReport {
    let sqrt_n = params.sqrt_n();
    let y = sqrt_n * params.g;
    let omega = params.rabi.iter().map(|w| w * w).sum::<f64>().sqrt();
    let x = 0.5 * sqrt_n * params.eta * omega;

    let cavity_ratio = if y == 0.0 { f64::INFINITY } else { params.kappa / y };
    let cavity_ok = cavity_ratio >= 1.0 / dominance && cavity_ratio <= dominance;
    let pump_margin = margin(x, params.gamma);
    let pump_ok = pump_margin >= dominance;

    let modes: Vec<ModeRegime> = params
        .rabi
        .iter()
        .zip(&params.trap_freqs)
        .map(|(w, nu)| {
            let sideband_coupling = 0.5 * params.eta * w;
            let lamb_dicke_margin = margin(nu * nu, sideband_coupling * sideband_coupling);
            let sideband_margin = margin(*nu, *w);
            ModeRegime {
                lamb_dicke_margin,
                lamb_dicke_ok: lamb_dicke_margin >= dominance,
                sideband_margin,
                sideband_ok: sideband_margin >= dominance,
            }
        })
        .collect();

    RegimeReport {
        dominance,
        cavity_ratio,
        cavity_ok,
        pump_margin,
        pump_ok,
        strong_damping_ok: cavity_ok && pump_ok,
        lamb_dicke_ok: !modes.is_empty() && modes.iter().all(|m| m.lamb_dicke_ok),
        sideband_ok: !modes.is_empty() && modes.iter().all(|m| m.sideband_ok),
        modes,
    }
}
