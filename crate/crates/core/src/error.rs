//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MisoError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight {index} is not invertible (sigma_min/sigma_max = {ratio:.3e})")]
    NonInvertibleWeight { index: usize, ratio: f64 },

    #[error("matrix {index} is not Hermitian (residual {residual:.3e})")]
    NonHermitian { index: usize, residual: f64 },

    #[error("matrices {i} and {j} do not commute (commutator norm {norm:.3e})")]
    NonCommuting { i: usize, j: usize, norm: f64 },

    #[error("joint diagonalization failed after {attempts} attempts (best off-diagonal residual {residual:.3e})")]
    JointDiagonalizationFailed { attempts: usize, residual: f64 },

    #[error("subspace is not reducing (max leakage {residual:.3e})")]
    NotReducing { residual: f64 },

    #[error("matrix is not unitary (||U*U - I|| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("support bound {support_bound} with power {power} exceeds the truncation-safe limit {limit}")]
    SupportOverflow {
        support_bound: usize,
        power: usize,
        limit: usize,
    },

    #[error("completion infeasible at atom {atom}: extended polynomial is nonpositive at n = {witness}")]
    CompletionInfeasible { atom: usize, witness: u64 },

    #[error("weights are not m-isometric for m = {m}: max |order-{m} forward difference| = {max_diff:.3e}")]
    NotMIsometric { m: usize, max_diff: f64 },

    #[error("not unitarily shift-equivalent: {clause}")]
    NotShiftEquivalent { clause: String },

    #[error("graph model mismatch: {0}")]
    ModelMismatch(String),
}

pub type Result<T> = std::result::Result<T, MisoError>;
