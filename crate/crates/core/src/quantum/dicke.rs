//! Collective spin operators on the symmetric (Dicke) subspace and their
//! Holstein-Primakoff boson form.
//!
//! Dicke level `l` is the normalized symmetric superposition of all
//! configurations with `l` of the `N` particles excited. On that ladder
//! `⟨l+1|σ⁺|l⟩ = √(l+1)·√(N−l)` and `⟨l|σ₃|l⟩ = l − N/2`.

use nalgebra::DMatrix;

use super::sparse::{SparseMatrix, C64};
use crate::{Error, Result};

/// Largest `N` accepted for the `2^N`-dimensional brute-force construction.
pub const MAX_BRUTE_FORCE_PARTICLES: u32 = 10;

/// Largest `N` accepted for the ladder itself.
pub const MAX_LADDER_PARTICLES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub sigma_plus: SparseMatrix,
    pub sigma_minus: SparseMatrix,
    pub sigma3: SparseMatrix,
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

pub fn build_dicke_ladder(n_particles: usize) -> Result<SpinOperators> {
    if n_particles == 0 || n_particles > MAX_LADDER_PARTICLES {
        return Err(Error::param("n_particles", format!("must lie in 1..={MAX_LADDER_PARTICLES}")));
    }
    let n = n_particles as f64;
    let dim = n_particles + 1;
    let plus: Vec<_> =
        (0..n_particles).map(|l| (l + 1, l, re(((l + 1) as f64).sqrt() * (n - l as f64).sqrt()))).collect();
    let sigma_plus = SparseMatrix::from_triplets(dim, dim, plus);
    let sigma3 = SparseMatrix::diagonal(&(0..dim).map(|l| l as f64 - 0.5 * n).collect::<Vec<_>>());
    Ok(SpinOperators { sigma_minus: sigma_plus.adjoint(), sigma_plus, sigma3 })
}

/// Basis vector of Dicke level `l` in the `2^N` product space (bit `i` set
/// means particle `i` is excited).
pub fn symmetric_state(n_particles: u32, l: u32) -> Vec<f64> {
    let dim = 1usize << n_particles;
    let members: Vec<usize> = (0..dim).filter(|s| s.count_ones() == l).collect();
    let norm = 1.0 / (members.len() as f64).sqrt();
    let mut v = vec![0.0; dim];
    for s in members {
        v[s] = norm;
    }
    v
}

/// Builds `Σᵢ σᵢ±` and `Σᵢ σ₃ᵢ` on the full `2^N` space and projects them
/// onto the symmetric states.
pub fn brute_force_symmetric(n_particles: u32) -> Result<SpinOperators> {
    if n_particles == 0 || n_particles > MAX_BRUTE_FORCE_PARTICLES {
        return Err(Error::param(
            "n_particles",
            format!("brute-force construction needs 1..={MAX_BRUTE_FORCE_PARTICLES}, got {n_particles}"),
        ));
    }
    let dim = 1usize << n_particles;
    let mut plus = DMatrix::<f64>::zeros(dim, dim);
    let mut s3 = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        for i in 0..n_particles {
            let bit = 1usize << i;
            if s & bit == 0 {
                plus[(s | bit, s)] += 1.0;
                s3[(s, s)] -= 0.5;
            } else {
                s3[(s, s)] += 0.5;
            }
        }
    }
    let levels = n_particles as usize + 1;
    let mut proj = DMatrix::<f64>::zeros(dim, levels);
    for l in 0..levels {
        proj.set_column(l, &nalgebra::DVector::from_vec(symmetric_state(n_particles, l as u32)));
    }
    let project = |op: &DMatrix<f64>| -> SparseMatrix {
        let reduced = proj.transpose() * op * &proj;
        SparseMatrix::from_dense(&reduced.map(re))
    };
    let sigma_plus = project(&plus);
    Ok(SpinOperators { sigma_minus: project(&plus.transpose()), sigma3: project(&s3), sigma_plus })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolsteinPrimakoff {
    /// Boson raising operator, `⟨l+1|S⁺|l⟩ = √(l+1)`.
    pub s_plus: SparseMatrix,
    /// `A_S = √(1 − S⁺S⁻/N)`, diagonal with entries `√(1 − l/N)`.
    pub a_s: SparseMatrix,
    /// `√N · S⁺ · A_S`.
    pub sigma_plus: SparseMatrix,
}

/// Holstein-Primakoff operators on the lowest `dim` levels.
pub fn hp_operators(n_particles: usize, dim: usize) -> Result<HolsteinPrimakoff> {
    if n_particles == 0 {
        return Err(Error::param("n_particles", "must be at least 1"));
    }
    if dim == 0 || dim > n_particles + 1 {
        return Err(Error::param(
            "dim",
            format!("must lie in 1..={} so that 1 - l/N stays non-negative, got {dim}", n_particles + 1),
        ));
    }
    let n = n_particles as f64;
    let s_plus =
        SparseMatrix::from_triplets(dim, dim, (0..dim - 1).map(|l| (l + 1, l, re(((l + 1) as f64).sqrt()))).collect());
    let a_s = SparseMatrix::diagonal(&(0..dim).map(|l| (1.0 - l as f64 / n).sqrt()).collect::<Vec<_>>());
    let sigma_plus = s_plus.matmul(&a_s).scale(re(n.sqrt()));
    Ok(HolsteinPrimakoff { s_plus, a_s, sigma_plus })
}

/// `‖([σ⁻/√N, σ⁺/√N] − 1)|l⟩‖` for `l = 0..=l_max`: the distance of the
/// rescaled su(2) commutator from the Heisenberg-Weyl value `1`.
pub fn contraction_defect(n_particles: usize, l_max: usize) -> Result<Vec<f64>> {
    if l_max > n_particles {
        return Err(Error::param("l_max", format!("must not exceed N = {n_particles}")));
    }
    let ops = build_dicke_ladder(n_particles)?;
    let n = n_particles as f64;
    let comm = super::sparse::commutator(&ops.sigma_minus, &ops.sigma_plus)
        .scale(re(1.0 / n))
        .sub(&SparseMatrix::identity(n_particles + 1));
    let dense = comm.to_dense();
    Ok((0..=l_max).map(|l| dense.column(l).norm()).collect())
}
