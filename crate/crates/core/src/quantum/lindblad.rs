//! Density-matrix propagation under a single cavity-decay channel.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{MomentObservables, ProductBasis, SystemOperators};
use super::sparse::{SparseMatrix, C64};
use crate::integrator::{integrate_with, IntegratorConfig, Termination};
use crate::moments::MomentState;
use crate::{Error, Result};

pub const TRACE_SLACK: f64 = 1e-10;
pub const HERMITICITY_SLACK: f64 = 1e-12;
pub const POSITIVITY_SLACK: f64 = 1e-8;
pub const CUTOFF_SLACK: f64 = 1e-8;
pub const RESIDUE_SLACK: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub t: f64,
    pub rho: DMatrix<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoDiagnostics {
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[C64]) -> Self {
        let d = psi.len();
        DensityMatrix { t: 0.0, rho: DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj()) }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut rho = DMatrix::zeros(dim, dim);
        rho[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix { t: 0.0, rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    ///
    /// Evaluated on the real symmetric embedding `[[A, −B], [B, A]]` of
    /// `A + iB`, restricted to the rows that carry any weight; identically
    /// zero rows only contribute exact zero eigenvalues.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let support: Vec<usize> =
            (0..d).filter(|&i| (0..d).any(|j| self.rho[(i, j)] != ZERO || self.rho[(j, i)] != ZERO)).collect();
        let k = support.len();
        let mut real = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                let h = 0.5 * (self.rho[(i, j)] + self.rho[(j, i)].conj());
                real[(a, b)] = h.re;
                real[(a + k, b + k)] = h.re;
                real[(a, b + k)] = -h.im;
                real[(a + k, b)] = h.im;
            }
        }
        let floor = if k < d { 0.0 } else { f64::INFINITY };
        real.symmetric_eigenvalues().iter().copied().fold(floor, f64::min)
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = ZERO;
        for i in 0..d {
            for j in 0..d {
                s += self.rho[(i, j)] * self.rho[(j, i)];
            }
        }
        s.re
    }

    pub fn diagnostics(&self) -> RhoDiagnostics {
        RhoDiagnostics {
            trace_residual: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity_residual: self.hermiticity_residual(),
            min_eigenvalue: self.min_eigenvalue(),
            purity: self.purity(),
        }
    }

    /// Checks the density-matrix invariants within their slacks.
    pub fn validate(&self) -> Result<RhoDiagnostics> {
        let d = self.diagnostics();
        if !(d.hermiticity_residual <= HERMITICITY_SLACK) {
            return Err(Error::InvariantViolation {
                invariant: "hermiticity",
                t: self.t,
                value: d.hermiticity_residual,
            });
        }
        if !(d.trace_residual <= TRACE_SLACK) {
            return Err(Error::InvariantViolation { invariant: "unit trace", t: self.t, value: d.trace_residual });
        }
        if !(d.min_eigenvalue >= -POSITIVITY_SLACK) {
            return Err(Error::InvariantViolation { invariant: "positivity", t: self.t, value: d.min_eigenvalue });
        }
        Ok(d)
    }
}

/// `ρ ↦ −i[H, ρ] + κ(cρc† − ½c†cρ − ½ρc†c)` in the form
/// `−i H_eff ρ + i ρ H_eff† + κ cρc†` with `H_eff = H − (iκ/2) c†c`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    h_eff: SparseMatrix,
    h_eff_dag: SparseMatrix,
    jump: SparseMatrix,
    jump_dag: SparseMatrix,
    kappa: f64,
}

impl LindbladGenerator {
    pub fn new(h: &SparseMatrix, c_op: &SparseMatrix, kappa: f64) -> Result<Self> {
        let dim = h.rows();
        for op in [h, c_op] {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: op.rows().max(op.cols()) });
            }
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", "must be finite and >= 0"));
        }
        let jump_dag = c_op.adjoint();
        let h_eff = h.add(&jump_dag.matmul(c_op).scale(C64::new(0.0, -0.5 * kappa)));
        Ok(LindbladGenerator { dim, h_eff_dag: h_eff.adjoint(), h_eff, jump: c_op.clone(), jump_dag, kappa })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L(ρ)` on column-major storage; `scratch` must hold `dim²` entries.
    pub fn apply(&self, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let d = self.dim;
        out.fill(ZERO);
        self.h_eff.mul_dense_acc(-I, rho, d, out);
        self.h_eff_dag.dense_mul_acc(I, rho, d, out);
        if self.kappa != 0.0 {
            scratch.fill(ZERO);
            self.jump_dag.dense_mul_acc(C64::new(1.0, 0.0), rho, d, scratch);
            self.jump.mul_dense_acc(C64::new(self.kappa, 0.0), scratch, d, out);
        }
    }
}

pub fn lindblad_rhs(rho: &DensityMatrix, h: &SparseMatrix, c_op: &SparseMatrix, kappa: f64) -> Result<DMatrix<C64>> {
    let generator = LindbladGenerator::new(h, c_op, kappa)?;
    if rho.dim() != generator.dim {
        return Err(Error::DimensionMismatch { expected: generator.dim, got: rho.dim() });
    }
    let d = generator.dim;
    let mut out = DMatrix::zeros(d, d);
    let mut scratch = vec![ZERO; d * d];
    generator.apply(rho.rho.as_slice(), out.as_mut_slice(), &mut scratch);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub snapshots: Vec<DensityMatrix>,
    pub diagnostics: Vec<RhoDiagnostics>,
    pub terminated_by: Termination,
}

fn pack(rho: &[C64], out: &mut [f64]) {
    for (k, z) in rho.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unpack(v: &[f64], out: &mut [C64]) {
    for (k, z) in out.iter_mut().enumerate() {
        *z = C64::new(v[2 * k], v[2 * k + 1]);
    }
}

/// Integrates the master equation, validating every recorded state.
pub fn propagate_rho(
    rho0: &DensityMatrix,
    h: &SparseMatrix,
    c_op: &SparseMatrix,
    kappa: f64,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Propagation> {
    let generator = LindbladGenerator::new(h, c_op, kappa)?;
    propagate_with(rho0, &generator, t_span, config, None)
}

/// As [`propagate_rho`], additionally rejecting runs whose top Fock levels
/// become populated beyond [`CUTOFF_SLACK`].
pub fn propagate_with(
    rho0: &DensityMatrix,
    generator: &LindbladGenerator,
    t_span: (f64, f64),
    config: &IntegratorConfig,
    cutoff_check: Option<&MomentObservables>,
) -> Result<Propagation> {
    let d = generator.dim;
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho0.dim() });
    }
    rho0.validate()?;
    let mut y0 = vec![0.0; 2 * d * d];
    pack(rho0.rho.as_slice(), &mut y0);

    let mut rho_buf = vec![ZERO; d * d];
    let mut out_buf = vec![ZERO; d * d];
    let mut scratch = vec![ZERO; d * d];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        unpack(y, &mut rho_buf);
        generator.apply(&rho_buf, &mut out_buf, &mut scratch);
        pack(&out_buf, dy);
    };

    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::new();
    let summary = integrate_with(rhs, &y0, (rho0.t + t_span.0, rho0.t + t_span.1), config, false, |t, y, _| {
        let mut rho = DMatrix::zeros(d, d);
        unpack(y, rho.as_mut_slice());
        let snap = DensityMatrix { t, rho };
        let diag = snap.validate()?;
        if let Some(obs) = cutoff_check {
            check_cutoffs(&snap, obs)?;
        }
        snapshots.push(snap);
        diagnostics.push(diag);
        Ok(())
    })?;
    Ok(Propagation { snapshots, diagnostics, terminated_by: summary.terminated_by })
}

fn check_cutoffs(rho: &DensityMatrix, obs: &MomentObservables) -> Result<()> {
    for proj in &obs.phonon_top {
        let population = proj.expectation(&rho.rho)?.re;
        if population > CUTOFF_SLACK {
            return Err(Error::CutoffExceeded { mode: "phonon", t: rho.t, population });
        }
    }
    let population = obs.photon_top.expectation(&rho.rho)?.re;
    if population > CUTOFF_SLACK {
        return Err(Error::CutoffExceeded { mode: "photon", t: rho.t, population });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedMoments {
    pub state: MomentState,
    /// Largest imaginary (or, for `u₁`, `u₂`, real) part discarded.
    pub residue: f64,
}

impl MomentObservables {
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<ExtractedMoments> {
        let real = |op: &SparseMatrix, name: &'static str| -> Result<(f64, f64, &'static str)> {
            let z = op.expectation(&rho.rho)?;
            Ok((z.re, z.im.abs(), name))
        };
        // u = i·k for anti-Hermitian k
        let coherence = |op: &SparseMatrix, name: &'static str| -> Result<(f64, f64, &'static str)> {
            let z = op.expectation(&rho.rho)?;
            Ok((-z.im, z.re.abs(), name))
        };
        let parts = [
            real(&self.phonon_number, "m")?,
            real(&self.photon_number, "n")?,
            real(&self.spin_z, "s3")?,
            coherence(&self.k1, "u1")?,
            coherence(&self.k2, "u2")?,
            real(&self.k3, "k3")?,
        ];
        let (worst, name) = parts.iter().fold((0.0f64, "m"), |acc, p| if p.1 > acc.0 { (p.1, p.2) } else { acc });
        if worst > RESIDUE_SLACK {
            return Err(Error::ImaginaryResidue { moment: name, residue: worst });
        }
        let v: Vec<f64> = parts.iter().map(|p| p.0).collect();
        Ok(ExtractedMoments { state: MomentState::from_slice(rho.t, &v), residue: worst })
    }
}

pub fn extract_moments(rho: &DensityMatrix, basis: &ProductBasis) -> Result<ExtractedMoments> {
    let ops = SystemOperators::new(basis)?;
    MomentObservables::new(&ops).evaluate(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DerivedCouplings;
    use crate::quantum::basis::build_hamiltonian_common;

    fn setup(n: usize, p: usize, c: usize) -> (ProductBasis, SystemOperators, SparseMatrix) {
        let basis = ProductBasis::common(n, p, c).unwrap();
        let ops = SystemOperators::new(&basis).unwrap();
        let h = build_hamiltonian_common(&basis, &DerivedCouplings::from_xy(0.25, 1.0)).unwrap();
        (basis, ops, h)
    }

    #[test]
    fn vacuum_is_stationary() {
        let (basis, ops, h) = setup(3, 4, 4);
        let vac = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 0, 0));
        let d = lindblad_rhs(&vac, &h, &ops.cavity, 1.0).unwrap();
        assert_eq!(d.iter().fold(0.0f64, |m, z| m.max(z.norm())), 0.0);
    }

    #[test]
    fn generator_is_trace_preserving() {
        let (basis, ops, h) = setup(2, 3, 3);
        let d = basis.dim();
        // a generic Hermitian, unit-trace matrix
        let a = DMatrix::from_fn(d, d, |i, j| C64::new((i * 7 + j * 3) as f64 % 5.0, (i as f64 - j as f64) * 0.1));
        let mut rho = &a * a.adjoint();
        let tr = rho.trace();
        rho /= tr;
        let d_rho = lindblad_rhs(&DensityMatrix { t: 0.0, rho }, &h, &ops.cavity, 0.8).unwrap();
        assert!(d_rho.trace().norm() < 1e-13);
    }

    #[test]
    fn empty_cavity_decay_rate() {
        let (basis, ops, _) = setup(2, 2, 3);
        let zero_h = SparseMatrix::zeros(basis.dim(), basis.dim());
        let rho = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 0, 1));
        let d_rho = lindblad_rhs(&rho, &zero_h, &ops.cavity, 0.7).unwrap();
        let n_op = ops.cavity.adjoint().matmul(&ops.cavity);
        let n_dot = n_op.expectation(&d_rho).unwrap();
        assert!((n_dot.re + 0.7).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (_, ops, h) = setup(2, 2, 2);
        let rho = DensityMatrix::basis_state(3, 0);
        assert!(matches!(lindblad_rhs(&rho, &h, &ops.cavity, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unitary_run_keeps_spectrum() {
        let (basis, ops, h) = setup(2, 4, 4);
        let rho0 = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 1, 0));
        let cfg = IntegratorConfig { record_stride: Some(1.0), ..Default::default() };
        let prop = propagate_rho(&rho0, &h, &ops.cavity, 0.0, (0.0, 5.0), &cfg).unwrap();
        for (snap, diag) in prop.snapshots.iter().zip(&prop.diagnostics) {
            assert!(diag.trace_residual < 1e-12);
            assert!((diag.purity - 1.0).abs() < 1e-8, "t={} purity={}", snap.t, diag.purity);
            let eig = snap.rho.symmetric_eigenvalues();
            let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!((max - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn cutoff_violation_is_an_error() {
        // two phonons with a three-level phonon cutoff populate the top level at once
        let (basis, ops, h) = setup(2, 3, 3);
        let obs = MomentObservables::new(&ops);
        let rho0 = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 2, 0));
        let generator = LindbladGenerator::new(&h, &ops.cavity, 1.0).unwrap();
        let err = propagate_with(&rho0, &generator, (0.0, 1.0), &IntegratorConfig::default(), Some(&obs)).unwrap_err();
        assert!(err.to_string().contains("raise cutoff"), "{err}");
    }

    #[test]
    fn extracted_moments_of_simple_states() {
        let basis = ProductBasis::common(3, 3, 3).unwrap();
        let vac = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 0, 0));
        let m = extract_moments(&vac, &basis).unwrap().state;
        assert_eq!(m.to_array(), [0.0, 0.0, -1.5, 0.0, 0.0, 0.0]);

        let one = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 1, 0));
        let m = extract_moments(&one, &basis).unwrap().state;
        assert_eq!(m.to_array(), [1.0, 0.0, -1.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn extracted_coherence_matches_direct_expectation() {
        // N = 1: (|l=0, p=1, q=0⟩ + e^{iφ}|l=1, p=0, q=0⟩)/√2
        let basis = ProductBasis::common(1, 3, 2).unwrap();
        let ops = SystemOperators::new(&basis).unwrap();
        for (phase, expected_u1) in [(C64::new(1.0, 0.0), 0.0), (C64::new(0.0, 1.0), 1.0), (C64::new(0.0, -1.0), -1.0)]
        {
            let mut psi = vec![ZERO; basis.dim()];
            let s = 1.0 / 2f64.sqrt();
            psi[basis.common_index(0, 1, 0)] = C64::new(s, 0.0);
            psi[basis.common_index(1, 0, 0)] = phase * s;
            // direct ⟨ψ|S⁺b|ψ⟩ over the two-dimensional support
            let spb = ops.sigma_plus[0].matmul(&ops.phonon[0]);
            let applied = spb.apply(&psi);
            let z: C64 = psi.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum();
            let k1 = z - z.conj();
            let direct_u1 = (I * k1).re;
            assert!((direct_u1 - expected_u1).abs() < 1e-15);

            let got = extract_moments(&DensityMatrix::pure(&psi), &basis).unwrap();
            assert!((got.state.u1 - expected_u1).abs() < 1e-15);
            assert!((got.state.m - 0.5).abs() < 1e-15 && (got.state.s3 - 0.0).abs() < 1e-15);
            assert!(got.residue < 1e-15);
        }
    }

    #[test]
    fn non_hermitian_input_leaves_residue() {
        let basis = ProductBasis::common(1, 2, 2).unwrap();
        let mut rho = DensityMatrix::basis_state(basis.dim(), 0);
        // ⟨p=1, q=0|ρ|p=0, q=1⟩ feeds ⟨bc† + b†c⟩
        rho.rho[(basis.common_index(0, 1, 0), basis.common_index(0, 0, 1))] = C64::new(0.0, 1e-3);
        assert!(matches!(extract_moments(&rho, &basis), Err(Error::ImaginaryResidue { .. })));
    }
}
