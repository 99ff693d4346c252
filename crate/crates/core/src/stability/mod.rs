//! Decompositions of the anticanonical polytope and the existence criteria
//! built on them: the exact barycenter verdict, the soliton Newton solve and
//! Donaldson–Futaki invariants of toric test configurations.

mod decomposition;
mod soliton;
mod testconfig;

pub use decomposition::{
    coupled_ke_verdict, sum_barycenter, sup_norm, validate_decomposition, ColumnFailure, Decomposition,
    DecompositionReport, Geometry, KeVerdict, RowClass,
};
pub use soliton::{soliton_residual, solve_soliton, SolitonOptions, SolitonSolution};
pub use testconfig::{destabilizer, df_invariant, lifted_config, DfReport, LiftedConfig};

use crate::moments::MomentError;
use crate::toric::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error("decomposition has no rows")]
    NoRows,
    #[error("row {row} has {got} support numbers, expected {expected}")]
    Shape { row: usize, expected: usize, got: usize },
    #[error("invalid decomposition: {0:?}")]
    Invalid(Box<DecompositionReport>),
    #[error("expected {expected} vector fields, got {got}")]
    FieldCount { expected: usize, got: usize },
    #[error("vector has {got} components, expected {expected}")]
    FieldDimension { expected: usize, got: usize },
    #[error("Newton solve did not converge (residual {})", .0.residual_norm)]
    NonConvergence(Box<SolitonSolution>),
    #[error("Hessian is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    SingularHessian { min_eigenvalue: f64 },
    #[error("cap {cap} is below max of -<v, p> = {floor}")]
    DegenerateLift { cap: String, floor: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

pub type Result<T, E = StabilityError> = std::result::Result<T, E>;
