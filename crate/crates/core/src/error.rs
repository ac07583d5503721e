use thiserror::Error;

use crate::framework::Shift;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("singular lattice (|det| = {det:e}, threshold {threshold:e})")]
    SingularLattice { det: f64, threshold: f64 },

    #[error("edge orbit {edge}: degenerate ({reason})")]
    DegenerateEdge { edge: usize, reason: &'static str },

    #[error("edge orbit {edge}: duplicate of edge orbit {other}")]
    DuplicateEdge { edge: usize, other: usize },

    #[error("edge orbit {edge}: vertex id {vertex} does not exist (n = {n})")]
    UnknownVertex { edge: usize, vertex: usize, n: usize },

    #[error("vertex list: expected id {expected}, found {found}")]
    VertexId { expected: usize, found: usize },

    #[error("quotient graph is disconnected: vertex orbit {vertex} is unreachable from vertex orbit 0")]
    Disconnected { vertex: usize },

    #[error("vertex orbits {a} and {b} coincide modulo the lattice")]
    CoincidentVertices { a: usize, b: usize },

    #[error("framework has no vertex orbits")]
    NoVertices,

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },

    #[error("empty tile range")]
    EmptyRange,

    #[error("degenerate placement at vertex orbit {vertex}: half-edges {first} and {second} have the same direction")]
    DegeneratePlacement { vertex: usize, first: usize, second: usize },

    #[error("framework is crossing: {} offending segment pair(s), first: {:?}", pairs.len(), pairs.first())]
    Crossing { pairs: Vec<CrossingPair> },

    #[error("Euler violation: n - m + n* = {value}")]
    EulerViolation { value: i64 },

    #[error("face starting at half-edge {half_edge} is not contractible (boundary shift {shift:?})")]
    NonContractibleFace { half_edge: usize, shift: Shift },

    #[error("non-simple face {face}: boundary repeats vertex orbit {vertex} at shift {shift:?}")]
    NonSimpleFace { face: usize, vertex: usize, shift: Shift },

    #[error("face {face}: interior angles sum to {sum}, expected {expected}")]
    FaceAngleSum { face: usize, sum: f64, expected: f64 },

    #[error("rank instability: gap ratio {ratio:.3e} between kept and dropped singular values is below 10")]
    RankInstability { ratio: f64 },

    #[error("stress has {found} entries, framework has {expected} edge orbits")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible lifting: residual {residual:e} exceeds {tolerance:e}")]
    IncompatibleLifting { residual: f64, tolerance: f64 },

    #[error("not a periodic stress: {kind} residual {residual:e} exceeds {tolerance:e}")]
    NotPeriodicStress { kind: &'static str, residual: f64, tolerance: f64 },

    #[error("duplicate orbit: candidate repeats edge orbit {existing}")]
    DuplicateOrbit { existing: usize },

    #[error("crossing insertion: new orbit crosses {with}")]
    CrossingInsertion { with: String },

    #[error("no rigidifying candidate found within cutoff {cutoff}")]
    NoCandidate { cutoff: i64 },

    #[error("not a periodic pointed pseudo-triangulation: {0}")]
    NotPpt(String),

    #[error("flex space is not one-dimensional after gauge reduction (dimension {dim})")]
    NotOneDimensional { dim: usize },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A pair of edge segments found to intersect improperly.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CrossingPair {
    pub first: usize,
    pub second: usize,
    /// Lattice shift applied to the copy of `second`.
    pub shift: Shift,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::RankInstability { .. }
            | Error::IncompatibleLifting { .. }
            | Error::NotPeriodicStress { .. }
            | Error::NotOneDimensional { .. }
            | Error::Singular(_)
            | Error::NoCandidate { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}
