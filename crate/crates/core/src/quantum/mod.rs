//! Exact small-scale quantum models used as oracles for the moment equations.

pub mod basis;
pub mod bosonic;
pub mod dicke;
pub mod lindblad;
pub mod sparse;

pub use basis::{
    build_hamiltonian_common, build_hamiltonian_individual, ModeLayout, MomentObservables, ProductBasis,
    SystemOperators,
};
pub use bosonic::{
    bosonic_drift, covariance_exact, covariance_to_moments, oracle_moments, propagate_covariance, CovarianceState,
};
pub use dicke::{brute_force_symmetric, build_dicke_ladder, contraction_defect, hp_operators, SpinOperators};
pub use lindblad::{extract_moments, lindblad_rhs, propagate_rho, DensityMatrix, LindbladGenerator, RhoDiagnostics};
pub use sparse::{SparseMatrix, C64};
