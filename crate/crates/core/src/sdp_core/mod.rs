//! Semidefinite programs over Hermitian LMIs and an interior-point solver.

pub mod model;
pub mod solver;

pub use model::{
    dense_to_triplets, lmi_contraction, lmi_opnorm_ub, lmi_quad_epigraph, lmi_spectral_lb,
    AffineMatrix, ComplexVarMatrix, LmiBlock, SdpProblem, Sense, Triplets, VarId,
};
pub use solver::{solve, SdpOptions, SdpSolution, SdpStatus};
