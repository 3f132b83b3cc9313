//! Semiclassical moment equations for collective cooling.
//!
//! The complex coherences `k₁ = ⟨S⁺b − S⁻b†⟩` and `k₂ = ⟨S⁺c − S⁻c†⟩` are
//! expectations of anti-Hermitian operators and therefore purely imaginary.
//! They are carried as the real variables `u₁ = i k₁` and `u₂ = i k₂`, which
//! keeps the whole system real.

use serde::{Deserialize, Serialize};

use crate::integrator::{integrate, IntegratorConfig, Trajectory};
use crate::model::{DerivedCouplings, PhysicalParams};
use crate::{Error, Result};

/// The six moment variables at one time point.
///
/// For the individual-mode scenario the same slots hold the particle-summed
/// quantities `(m̃, ñ, s̃₃, ũ₁, ũ₂, k̃₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub t: f64,
    /// Mean phonon number `⟨b†b⟩`.
    pub m: f64,
    /// Mean photon number `⟨c†c⟩`.
    pub n: f64,
    /// `⟨S₃⟩`, in `[−N/2, N/2]`.
    pub s3: f64,
    pub u1: f64,
    pub u2: f64,
    /// `⟨bc† + b†c⟩`.
    pub k3: f64,
}

/// Time derivative of a [`MomentState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRates {
    pub m: f64,
    pub n: f64,
    pub s3: f64,
    pub u1: f64,
    pub u2: f64,
    pub k3: f64,
}

pub const COLUMNS: [&str; 6] = ["m", "n", "s3", "u1", "u2", "k3"];

impl MomentState {
    /// All particles in the ground state, empty cavity, `m0` phonons.
    pub fn ground(m0: f64, n_particles: u64) -> Self {
        MomentState { t: 0.0, m: m0, n: 0.0, s3: -0.5 * n_particles as f64, u1: 0.0, u2: 0.0, k3: 0.0 }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.m, self.n, self.s3, self.u1, self.u2, self.k3]
    }

    pub fn from_slice(t: f64, v: &[f64]) -> Self {
        MomentState { t, m: v[0], n: v[1], s3: v[2], u1: v[3], u2: v[4], k3: v[5] }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl MomentRates {
    pub fn to_array(&self) -> [f64; 6] {
        [self.m, self.n, self.s3, self.u1, self.u2, self.k3]
    }

    fn from_array(v: [f64; 6]) -> Self {
        MomentRates { m: v[0], n: v[1], s3: v[2], u1: v[3], u2: v[4], k3: v[5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// One collective vibrational mode shared by all particles.
    Common,
    /// Each particle cooled on its own vibrational mode.
    Individual,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Common => "common",
            Scenario::Individual => "individual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioKind {
    pub tag: Scenario,
    /// Freeze `s₃` at `−N/2`.
    #[serde(default)]
    pub clamp_s3: bool,
    /// Freeze `n` and `u₂` at their initial values (zero for the ground state).
    #[serde(default)]
    pub clamp_cavity: bool,
}

impl ScenarioKind {
    pub fn common() -> Self {
        ScenarioKind { tag: Scenario::Common, clamp_s3: false, clamp_cavity: false }
    }

    pub fn individual() -> Self {
        ScenarioKind { tag: Scenario::Individual, clamp_s3: false, clamp_cavity: false }
    }
}

/// How the atom-boson correlations are closed in the common-mode equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// `⟨S₃X⟩ ≈ s₃⟨X⟩` with `⟨S⁺S⁻⟩` dropped against `N`.
    #[default]
    Factorized,
    /// Exact moment equations of the linear three-mode bosonic model.
    LinearBosonic,
}

fn check_finite(state: &MomentState) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "moment state", t: state.t })
    }
}

fn common_field(s: &[f64; 6], x: f64, y: f64, kappa: f64, n_particles: f64) -> [f64; 6] {
    let [m, n, s3, u1, u2, k3] = *s;
    let a = 2.0 * s3 / n_particles;
    [
        x * u1,
        y * u2 - kappa * n,
        -(x * u1 + y * u2),
        a * (2.0 * x * m + y * k3),
        a * (2.0 * y * n + x * k3) - 0.5 * kappa * u2,
        y * u1 + x * u2 - 0.5 * kappa * k3,
    ]
}

fn individual_field(s: &[f64; 6], x: f64, y: f64, kappa: f64, n_particles: f64) -> [f64; 6] {
    let [m, n, s3, u1, u2, k3] = *s;
    let a = 2.0 * s3 / (n_particles * n_particles);
    [
        x * u1,
        y * u2 - kappa * n,
        -(x * u1 + y * u2),
        a * (2.0 * x * m + y * k3),
        a * (2.0 * n_particles * y * n + x * k3) - 0.5 * kappa * u2,
        y * u1 + x * u2 - 0.5 * kappa * k3,
    ]
}

fn linear_bosonic_field(s: &[f64; 6], x: f64, y: f64, kappa: f64, n_particles: f64) -> [f64; 6] {
    let [m, n, s3, u1, u2, k3] = *s;
    let dipole = s3 + 0.5 * n_particles;
    [
        x * u1,
        y * u2 - kappa * n,
        -(x * u1 + y * u2),
        -2.0 * x * (m - dipole) - y * k3,
        -2.0 * y * (n - dipole) - x * k3 - 0.5 * kappa * u2,
        y * u1 + x * u2 - 0.5 * kappa * k3,
    ]
}

/// Common-mode moment equations.
pub fn rhs_common(state: &MomentState, c: &DerivedCouplings, params: &PhysicalParams) -> Result<MomentRates> {
    check_finite(state)?;
    let n = params.n_particles as f64;
    Ok(MomentRates::from_array(common_field(&state.to_array(), c.x, c.y, params.kappa, n)))
}

/// Individual-mode moment equations in the particle-summed variables.
pub fn rhs_individual(state: &MomentState, c: &DerivedCouplings, params: &PhysicalParams) -> Result<MomentRates> {
    check_finite(state)?;
    let n = params.n_particles as f64;
    Ok(MomentRates::from_array(individual_field(&state.to_array(), c.x, c.y, params.kappa, n)))
}

/// Moment equations of the bosonized common-mode model without the
/// factorization: they keep the `⟨S⁺S⁻⟩ = s₃ + N/2` feedback on the
/// coherences and are exact for the linear three-mode system.
pub fn rhs_common_linear(state: &MomentState, c: &DerivedCouplings, params: &PhysicalParams) -> Result<MomentRates> {
    check_finite(state)?;
    let n = params.n_particles as f64;
    Ok(MomentRates::from_array(linear_bosonic_field(&state.to_array(), c.x, c.y, params.kappa, n)))
}

/// `Q = m + (x²/y²) n − (x/y) k₃`, conserved when `κ = 0`.
pub fn conserved_q(state: &MomentState, c: &DerivedCouplings) -> Result<f64> {
    let r = c.ratio("Q")?;
    Ok(state.m + r * r * state.n - r * state.k3)
}

/// Zeroth-order-in-`κ` stationary state reached after the fast transient.
pub fn adiabatic_fixed_point(m: f64, c: &DerivedCouplings, n_particles: u64) -> Result<MomentState> {
    let r = c.ratio("the adiabatic fixed point")?;
    if !(m >= 0.0) {
        return Err(Error::param("m", format!("must be >= 0, got {m}")));
    }
    Ok(MomentState { n: r * r * m, k3: -2.0 * r * m, ..MomentState::ground(m, n_particles) })
}

/// Predicted common-mode cooling rate `x²(x² + y²)/y⁴ · κ`.
pub fn analytic_rate_common(c: &DerivedCouplings, kappa: f64) -> Result<f64> {
    let r = c.ratio("the common-mode cooling rate")?;
    Ok(r * r * (r * r + 1.0) * kappa)
}

/// Predicted individual-mode cooling rate `x²/y² · κ`.
pub fn analytic_rate_individual(c: &DerivedCouplings, kappa: f64) -> Result<f64> {
    let r = c.ratio("the individual-mode cooling rate")?;
    Ok(r * r * kappa)
}

pub fn analytic_rate(kind: Scenario, c: &DerivedCouplings, kappa: f64) -> Result<f64> {
    match kind {
        Scenario::Common => analytic_rate_common(c, kappa),
        Scenario::Individual => analytic_rate_individual(c, kappa),
    }
}

/// `m₀ exp(−rate · t)`.
pub fn analytic_m(t: f64, m0: f64, rate: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::param("t", format!("must be >= 0, got {t}")));
    }
    Ok(m0 * (-rate * t).exp())
}

/// A ready-to-integrate moment system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    pub kind: ScenarioKind,
    pub closure: Closure,
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
    pub n_particles: f64,
}

impl MomentSystem {
    pub fn new(kind: ScenarioKind, c: &DerivedCouplings, params: &PhysicalParams) -> Self {
        MomentSystem {
            kind,
            closure: Closure::Factorized,
            x: c.x,
            y: c.y,
            kappa: params.kappa,
            n_particles: params.n_particles as f64,
        }
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    pub fn field(&self, y: &[f64], dy: &mut [f64]) {
        let s: [f64; 6] = [y[0], y[1], y[2], y[3], y[4], y[5]];
        let mut d = match (self.kind.tag, self.closure) {
            (Scenario::Common, Closure::Factorized) => common_field(&s, self.x, self.y, self.kappa, self.n_particles),
            (Scenario::Common, Closure::LinearBosonic) => {
                linear_bosonic_field(&s, self.x, self.y, self.kappa, self.n_particles)
            }
            (Scenario::Individual, _) => individual_field(&s, self.x, self.y, self.kappa, self.n_particles),
        };
        if self.kind.clamp_s3 {
            d[2] = 0.0;
        }
        if self.kind.clamp_cavity {
            d[1] = 0.0;
            d[4] = 0.0;
        }
        dy.copy_from_slice(&d);
    }

    /// Initial state with the clamps applied.
    pub fn constrain(&self, mut state: MomentState) -> MomentState {
        if self.kind.clamp_s3 {
            state.s3 = -0.5 * self.n_particles;
        }
        state
    }

    pub fn simulate(&self, initial: &MomentState, t_end: f64, config: &IntegratorConfig) -> Result<Trajectory> {
        check_finite(initial)?;
        let start = self.constrain(*initial);
        let mut traj = integrate(|_t, y, dy| self.field(y, dy), &start.to_array(), (start.t, t_end), config)?;
        // interpolation may perturb clamped slots in the last bit
        for s in &mut traj.states {
            if self.kind.clamp_s3 {
                s[2] = start.s3;
            }
            if self.kind.clamp_cavity {
                s[1] = start.n;
                s[4] = start.u2;
            }
        }
        Ok(traj)
    }
}

pub fn states_of(traj: &Trajectory) -> Vec<MomentState> {
    traj.times.iter().zip(&traj.states).map(|(t, s)| MomentState::from_slice(*t, s)).collect()
}
