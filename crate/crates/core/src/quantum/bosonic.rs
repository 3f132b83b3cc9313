//! Linear three-mode oracle for the bosonized common-mode system.
//!
//! With `S ≈ σ⁻/√N` the Hamiltonian `x S⁺b + y S⁺c + h.c.` is quadratic, so
//! the normal-ordered second moments `M_ij = ⟨a_i† a_j⟩`, `a = (S, b, c)`,
//! obey the closed equation `Ṁ = K̄M + MKᵀ`. A zero-temperature bath adds no
//! source term in normal order.

use nalgebra::Matrix3;

use super::sparse::C64;
use crate::integrator::{integrate_with, IntegratorConfig, Termination};
use crate::model::DerivedCouplings;
use crate::moments::MomentState;
use crate::{Error, Result};

pub const MODE_S: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;

const HERMITICITY_SLACK: f64 = 1e-12;
const DIAGONAL_SLACK: f64 = 1e-10;

/// `K = −iG − D`, the drift of `ȧ = K a`.
pub fn bosonic_drift(c: &DerivedCouplings, kappa: f64) -> Matrix3<C64> {
    let mut k = Matrix3::zeros();
    for (i, j, g) in [(MODE_S, MODE_B, c.x), (MODE_S, MODE_C, c.y)] {
        k[(i, j)] = C64::new(0.0, -g);
        k[(j, i)] = C64::new(0.0, -g);
    }
    k[(MODE_C, MODE_C)] = C64::new(-0.5 * kappa, 0.0);
    k
}

/// Decay rates `−2 Re λ` of the mode populations, slowest first.
pub fn population_decay_rates(k: &Matrix3<C64>) -> Vec<f64> {
    let eig = k.clone_owned().schur().eigenvalues().expect("complex Schur form is triangular");
    let mut rates: Vec<f64> = eig.iter().map(|l| -2.0 * l.re).collect();
    rates.sort_by(f64::total_cmp);
    rates
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    pub t: f64,
    pub m: Matrix3<C64>,
}

impl CovarianceState {
    pub fn new(t: f64, m: Matrix3<C64>) -> Result<Self> {
        let s = CovarianceState { t, m };
        s.validate()?;
        Ok(s)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (self.m - self.m.adjoint()).iter().fold(0.0, |w, z| w.max(z.norm()))
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_residual();
        if !(h <= HERMITICITY_SLACK) {
            return Err(Error::InvariantViolation { invariant: "covariance hermiticity", t: self.t, value: h });
        }
        for i in 0..3 {
            let d = self.m[(i, i)].re;
            if !(d >= -DIAGONAL_SLACK) {
                return Err(Error::InvariantViolation { invariant: "non-negative occupation", t: self.t, value: d });
            }
        }
        Ok(())
    }

    /// Embeds a moment state; `Im M_bc`, which the moments do not carry, is 0.
    pub fn from_moments(state: &MomentState, n_particles: f64) -> Result<Self> {
        let mut m = Matrix3::zeros();
        m[(MODE_S, MODE_S)] = C64::new(state.s3 + 0.5 * n_particles, 0.0);
        m[(MODE_B, MODE_B)] = C64::new(state.m, 0.0);
        m[(MODE_C, MODE_C)] = C64::new(state.n, 0.0);
        for (i, j, v) in [
            (MODE_S, MODE_B, C64::new(0.0, -0.5 * state.u1)),
            (MODE_S, MODE_C, C64::new(0.0, -0.5 * state.u2)),
            (MODE_B, MODE_C, C64::new(0.5 * state.k3, 0.0)),
        ] {
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        CovarianceState::new(state.t, m)
    }

    pub fn total_excitation(&self) -> f64 {
        self.m.trace().re
    }
}

pub fn covariance_to_moments(cov: &CovarianceState, n_particles: f64) -> MomentState {
    let m = &cov.m;
    MomentState {
        t: cov.t,
        m: m[(MODE_B, MODE_B)].re,
        n: m[(MODE_C, MODE_C)].re,
        s3: m[(MODE_S, MODE_S)].re - 0.5 * n_particles,
        u1: -2.0 * m[(MODE_S, MODE_B)].im,
        u2: -2.0 * m[(MODE_S, MODE_C)].im,
        k3: 2.0 * m[(MODE_B, MODE_C)].re,
    }
}

fn pack(m: &Matrix3<C64>, out: &mut [f64]) {
    for (k, z) in m.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unpack(v: &[f64]) -> Matrix3<C64> {
    Matrix3::from_iterator((0..9).map(|k| C64::new(v[2 * k], v[2 * k + 1])))
}

/// `e^{K̄t} M e^{Kᵀt}` through the matrix exponential.
pub fn covariance_exact(m0: &CovarianceState, k: &Matrix3<C64>, t: f64) -> CovarianceState {
    let e = (k * C64::new(t - m0.t, 0.0)).exp();
    CovarianceState { t, m: e.conjugate() * m0.m * e.transpose() }
}

#[derive(Debug, Clone)]
pub struct CovarianceTrajectory {
    pub states: Vec<CovarianceState>,
    pub terminated_by: Termination,
}

/// Integrates `Ṁ = K̄M + MKᵀ` with the general-purpose integrator.
pub fn propagate_covariance(
    m0: &CovarianceState,
    k: &Matrix3<C64>,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<CovarianceTrajectory> {
    m0.validate()?;
    let kbar = k.conjugate();
    let kt = k.transpose();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let m = unpack(y);
        pack(&(kbar * m + m * kt), dy);
    };
    let mut y0 = [0.0; 18];
    pack(&m0.m, &mut y0);
    let mut states = Vec::new();
    let summary = integrate_with(rhs, &y0, t_span, config, false, |t, y, _| {
        let s = CovarianceState { t, m: unpack(y) };
        s.validate()?;
        states.push(s);
        Ok(())
    })?;
    Ok(CovarianceTrajectory { states, terminated_by: summary.terminated_by })
}

/// Oracle moments at the requested times, evaluated in closed form.
pub fn oracle_moments(
    initial: &MomentState,
    c: &DerivedCouplings,
    kappa: f64,
    n_particles: f64,
    times: &[f64],
) -> Result<Vec<MomentState>> {
    let m0 = CovarianceState::from_moments(initial, n_particles)?;
    let k = bosonic_drift(c, kappa);
    Ok(times.iter().map(|&t| covariance_to_moments(&covariance_exact(&m0, &k, t), n_particles)).collect())
}
