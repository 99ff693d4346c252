//! Fans, support numbers and the exact rational polytopes they cut out.
//!
//! A smooth complete fan with primitive rays `d_j` together with support
//! numbers `c_j` defines the polytope `{x : <d_j, x> >= -c_j for all j}`.
//! Everything here is exact: vertices are found by solving unimodular (fan)
//! or brute-force (raw halfspace) systems over `BigRational`.

mod fan;
mod polytope;
mod triangulate;

pub use fan::{ampleness_class, validate_fan, Ampleness, Fan, FanReport, FanWitness, SupportVector};
pub use polytope::{
    minkowski_sum, polytope_from_halfspaces, polytope_from_support, support_function, translate, Halfspace, Polytope,
    Provenance, MAX_BRUTE_FORCE_DIM, MAX_BRUTE_FORCE_HALFSPACES,
};
pub use triangulate::{triangulate, triangulate_with, ApexRule, SimplexMesh};

use crate::rational::QVec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("fan has no rays")]
    EmptyFan,
    #[error("ray {index} has {got} coordinates, expected {expected}")]
    RayDimension { index: usize, expected: usize, got: usize },
    #[error("ray {index} not primitive")]
    RayNotPrimitive { index: usize },
    #[error("ray {index} duplicates ray {previous}")]
    DuplicateRay { index: usize, previous: usize },
    #[error("cone {cone} has {got} rays, expected {expected}")]
    ConeSize { cone: usize, expected: usize, got: usize },
    #[error("cone {cone} references ray {index}, which is out of range")]
    ConeIndexOutOfRange { cone: usize, index: usize },
    #[error("cone {cone} is not smooth")]
    NotSmooth { cone: usize },
    #[error("support vector has {got} entries, fan has {expected} rays")]
    SupportLength { expected: usize, got: usize },
    #[error("support numbers are not convex: vertex of cone {cone} violates ray {ray}")]
    NotConvex { cone: usize, ray: usize },
    #[error("polytope is degenerate: affine hull has dimension {affine_dim} < {dim}")]
    Degenerate { affine_dim: isize, dim: usize },
    #[error("halfspace system is infeasible")]
    Empty,
    #[error("halfspace system is unbounded along {direction:?}")]
    Unbounded { direction: QVec },
    #[error("brute-force enumeration limited to dimension <= {max_dim} and <= {max_halfspaces} halfspaces (got {dim}, {halfspaces})")]
    TooLarge { dim: usize, halfspaces: usize, max_dim: usize, max_halfspaces: usize },
    #[error("halfspace {index} has {got} coordinates, expected {expected}")]
    HalfspaceDimension { index: usize, expected: usize, got: usize },
    #[error("Minkowski cross-check failed at summand {part}")]
    MinkowskiMismatch { part: usize },
    #[error("no summands given")]
    NoParts,
    #[error("translation vector has {got} coordinates, expected {expected}")]
    TranslationDimension { expected: usize, got: usize },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
