//! Truncated product spaces and the operators living on them.
//!
//! Common layout: Dicke ladder ⊗ one collective phonon mode ⊗ cavity, with
//! index `(l·P + p)·C + q`. Individual layout: N two-level particles ⊗ N
//! phonon modes ⊗ cavity, particle 1 being the most significant factor.

use serde::{Deserialize, Serialize};

use super::dicke::build_dicke_ladder;
use super::sparse::{SparseMatrix, C64};
use crate::model::DerivedCouplings;
use crate::{Error, Result};

/// Upper bound on the Hilbert-space dimension of an exact run.
pub const MAX_DIMENSION: usize = 1024;

/// Largest particle number for the individual layout.
pub const MAX_INDIVIDUAL_PARTICLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeLayout {
    Common,
    Individual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBasis {
    pub n_particles: usize,
    pub phonon_cutoff: usize,
    pub photon_cutoff: usize,
    pub layout: ModeLayout,
}

impl ProductBasis {
    pub fn common(n_particles: usize, phonon_cutoff: usize, photon_cutoff: usize) -> Result<Self> {
        ProductBasis { n_particles, phonon_cutoff, photon_cutoff, layout: ModeLayout::Common }.validated()
    }

    pub fn individual(n_particles: usize, phonon_cutoff: usize, photon_cutoff: usize) -> Result<Self> {
        ProductBasis { n_particles, phonon_cutoff, photon_cutoff, layout: ModeLayout::Individual }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n_particles == 0 {
            return Err(Error::param("n_particles", "must be at least 1"));
        }
        if self.phonon_cutoff < 2 {
            return Err(Error::param("phonon_cutoff", "must be at least 2"));
        }
        if self.photon_cutoff < 2 {
            return Err(Error::param("photon_cutoff", "must be at least 2"));
        }
        if self.layout == ModeLayout::Individual && self.n_particles > MAX_INDIVIDUAL_PARTICLES {
            return Err(Error::param(
                "n_particles",
                format!("individual layout supports at most {MAX_INDIVIDUAL_PARTICLES} particles"),
            ));
        }
        let dim = self.checked_dim().unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionOverflow { dim, limit: MAX_DIMENSION });
        }
        Ok(self)
    }

    fn checked_dim(&self) -> Option<usize> {
        match self.layout {
            ModeLayout::Common => {
                (self.n_particles + 1).checked_mul(self.phonon_cutoff)?.checked_mul(self.photon_cutoff)
            }
            ModeLayout::Individual => {
                let n = u32::try_from(self.n_particles).ok()?;
                2usize.checked_pow(n)?.checked_mul(self.phonon_cutoff.checked_pow(n)?)?.checked_mul(self.photon_cutoff)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.checked_dim().expect("validated basis dimension")
    }

    /// Index of `|l⟩ ⊗ |p⟩ ⊗ |q⟩` in the common layout.
    pub fn common_index(&self, l: usize, p: usize, q: usize) -> usize {
        debug_assert_eq!(self.layout, ModeLayout::Common);
        (l * self.phonon_cutoff + p) * self.photon_cutoff + q
    }

    /// Index of a basis state in the individual layout.
    pub fn individual_index(&self, excited: &[usize], phonons: &[usize], q: usize) -> usize {
        debug_assert_eq!(self.layout, ModeLayout::Individual);
        let mut idx = 0;
        for &e in excited {
            idx = idx * 2 + e;
        }
        for &p in phonons {
            idx = idx * self.phonon_cutoff + p;
        }
        idx * self.photon_cutoff + q
    }
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Truncated bosonic annihilation operator, `⟨k−1|a|k⟩ = √k`.
pub fn annihilation(cutoff: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(cutoff, cutoff, (1..cutoff).map(|k| (k - 1, k, re((k as f64).sqrt()))).collect())
}

fn qubit_raise() -> SparseMatrix {
    SparseMatrix::from_triplets(2, 2, vec![(1, 0, re(1.0))])
}

fn qubit_s3() -> SparseMatrix {
    SparseMatrix::diagonal(&[-0.5, 0.5])
}

/// Operators of one basis embedded in the full product space.
#[derive(Debug, Clone)]
pub struct SystemOperators {
    pub basis: ProductBasis,
    /// Per-particle raising operators (one collective entry for the common layout).
    pub sigma_plus: Vec<SparseMatrix>,
    pub sigma3: Vec<SparseMatrix>,
    /// Phonon annihilators (one per particle for the individual layout).
    pub phonon: Vec<SparseMatrix>,
    pub cavity: SparseMatrix,
}

impl SystemOperators {
    pub fn new(basis: &ProductBasis) -> Result<Self> {
        let basis = basis.validated()?;
        let (p, c) = (basis.phonon_cutoff, basis.photon_cutoff);
        let id = SparseMatrix::identity;
        match basis.layout {
            ModeLayout::Common => {
                let spin = build_dicke_ladder(basis.n_particles)?;
                let d = basis.n_particles + 1;
                Ok(SystemOperators {
                    basis,
                    sigma_plus: vec![SparseMatrix::kron_all(&[spin.sigma_plus, id(p), id(c)])],
                    sigma3: vec![SparseMatrix::kron_all(&[spin.sigma3, id(p), id(c)])],
                    phonon: vec![SparseMatrix::kron_all(&[id(d), annihilation(p), id(c)])],
                    cavity: SparseMatrix::kron_all(&[id(d), id(p), annihilation(c)]),
                })
            }
            ModeLayout::Individual => {
                let n = basis.n_particles;
                let embed = |slot: usize, op: SparseMatrix| -> SparseMatrix {
                    let mut factors: Vec<SparseMatrix> = (0..n).map(|_| id(2)).collect();
                    factors.extend((0..n).map(|_| id(p)));
                    factors.push(id(c));
                    factors[slot] = op;
                    SparseMatrix::kron_all(&factors)
                };
                Ok(SystemOperators {
                    basis,
                    sigma_plus: (0..n).map(|i| embed(i, qubit_raise())).collect(),
                    sigma3: (0..n).map(|i| embed(i, qubit_s3())).collect(),
                    phonon: (0..n).map(|i| embed(n + i, annihilation(p))).collect(),
                    cavity: embed(2 * n, annihilation(c)),
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Collective `Σ σ⁺ᵢ` (the ladder `σ⁺` for the common layout).
    pub fn total_sigma_plus(&self) -> SparseMatrix {
        sum_all(&self.sigma_plus, self.dim())
    }

    pub fn total_sigma3(&self) -> SparseMatrix {
        sum_all(&self.sigma3, self.dim())
    }

    /// Interaction Hamiltonian for either layout.
    pub fn hamiltonian(&self, c: &DerivedCouplings) -> SparseMatrix {
        let inv_sqrt_n = 1.0 / (self.basis.n_particles as f64).sqrt();
        let mut raise_terms = SparseMatrix::zeros(self.dim(), self.dim());
        for (sp, b) in self.sigma_plus.iter().zip(&self.phonon) {
            raise_terms = raise_terms
                .add(&sp.matmul(b).scale(re(c.x * inv_sqrt_n)))
                .add(&sp.matmul(&self.cavity).scale(re(c.y * inv_sqrt_n)));
        }
        raise_terms.add(&raise_terms.adjoint())
    }
}

fn sum_all(ops: &[SparseMatrix], dim: usize) -> SparseMatrix {
    ops.iter().fold(SparseMatrix::zeros(dim, dim), |acc, o| acc.add(o))
}

/// `H = (x/√N)(σ⁺ b + h.c.) + (y/√N)(σ⁺ c + h.c.)` with the exact ladder `σ⁺`.
pub fn build_hamiltonian_common(basis: &ProductBasis, c: &DerivedCouplings) -> Result<SparseMatrix> {
    if basis.layout != ModeLayout::Common {
        return Err(Error::param("layout", "common-mode Hamiltonian needs the common layout"));
    }
    Ok(SystemOperators::new(basis)?.hamiltonian(c))
}

/// `H = (1/√N) Σᵢ [x σᵢ⁺ bᵢ + y σᵢ⁺ c + h.c.]` on the full product space.
pub fn build_hamiltonian_individual(basis: &ProductBasis, c: &DerivedCouplings) -> Result<SparseMatrix> {
    if basis.layout != ModeLayout::Individual {
        return Err(Error::param("layout", "individual-mode Hamiltonian needs the individual layout"));
    }
    Ok(SystemOperators::new(basis)?.hamiltonian(c))
}

/// Operator forms of the six moment variables.
#[derive(Debug, Clone)]
pub struct MomentObservables {
    pub basis: ProductBasis,
    pub phonon_number: SparseMatrix,
    pub photon_number: SparseMatrix,
    pub spin_z: SparseMatrix,
    /// `k₁` operator, anti-Hermitian.
    pub k1: SparseMatrix,
    pub k2: SparseMatrix,
    pub k3: SparseMatrix,
    /// Projectors onto the top Fock level of each phonon mode and the cavity.
    pub phonon_top: Vec<SparseMatrix>,
    pub photon_top: SparseMatrix,
}

impl MomentObservables {
    pub fn new(ops: &SystemOperators) -> Self {
        let dim = ops.dim();
        let inv_sqrt_n = re(1.0 / (ops.basis.n_particles as f64).sqrt());
        let c = &ops.cavity;
        let cd = c.adjoint();
        let mut k1 = SparseMatrix::zeros(dim, dim);
        let mut k2 = SparseMatrix::zeros(dim, dim);
        let mut k3 = SparseMatrix::zeros(dim, dim);
        for (sp, b) in ops.sigma_plus.iter().zip(&ops.phonon) {
            let bd = b.adjoint();
            let spb = sp.matmul(b);
            k1 = k1.add(&spb.sub(&spb.adjoint()).scale(inv_sqrt_n));
            let spc = sp.matmul(c);
            k2 = k2.add(&spc.sub(&spc.adjoint()).scale(inv_sqrt_n));
            k3 = k3.add(&b.matmul(&cd)).add(&bd.matmul(c));
        }
        let (p, q) = (ops.basis.phonon_cutoff, ops.basis.photon_cutoff);
        // exact integer diagonals rather than products of square roots
        let number = |cutoff: usize| SparseMatrix::diagonal(&(0..cutoff).map(|k| k as f64).collect::<Vec<_>>());
        let m = (0..ops.phonon.len()).fold(SparseMatrix::zeros(dim, dim), |acc, i| {
            acc.add(&embed_mode_operator(ops, ModeSlot::Phonon(i), &number(p)))
        });
        let top = |cutoff: usize| SparseMatrix::from_triplets(cutoff, cutoff, vec![(cutoff - 1, cutoff - 1, re(1.0))]);
        let photon_top = embed_mode_operator(ops, ModeSlot::Cavity, &top(q));
        let phonon_top =
            (0..ops.phonon.len()).map(|i| embed_mode_operator(ops, ModeSlot::Phonon(i), &top(p))).collect();
        MomentObservables {
            basis: ops.basis,
            phonon_number: m,
            photon_number: embed_mode_operator(ops, ModeSlot::Cavity, &number(q)),
            spin_z: ops.total_sigma3(),
            k1,
            k2,
            k3,
            phonon_top,
            photon_top,
        }
    }
}

enum ModeSlot {
    Phonon(usize),
    Cavity,
}

fn embed_mode_operator(ops: &SystemOperators, slot: ModeSlot, proj: &SparseMatrix) -> SparseMatrix {
    let b = &ops.basis;
    let id = SparseMatrix::identity;
    let (p, c) = (b.phonon_cutoff, b.photon_cutoff);
    match b.layout {
        ModeLayout::Common => {
            let d = b.n_particles + 1;
            match slot {
                ModeSlot::Phonon(_) => SparseMatrix::kron_all(&[id(d), proj.clone(), id(c)]),
                ModeSlot::Cavity => SparseMatrix::kron_all(&[id(d), id(p), proj.clone()]),
            }
        }
        ModeLayout::Individual => {
            let n = b.n_particles;
            let mut factors: Vec<SparseMatrix> = (0..n).map(|_| id(2)).collect();
            factors.extend((0..n).map(|_| id(p)));
            factors.push(id(c));
            match slot {
                ModeSlot::Phonon(i) => factors[n + i] = proj.clone(),
                ModeSlot::Cavity => factors[2 * n] = proj.clone(),
            }
            SparseMatrix::kron_all(&factors)
        }
    }
}
