use thiserror::Error;

use crate::hypergraph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero in GF(2^m)")]
    DivisionByZero,

    #[error("unsupported field width m = {0}")]
    UnsupportedWidth(u32),

    #[error("reduction polynomial {poly:#x} is reducible over GF(2) at width {m}")]
    ReducibleModulus { m: u32, poly: u64 },

    #[error("requested {requested} distinct points but the field only has {available} elements")]
    TooManyPoints { requested: u128, available: u128 },

    #[error("interpolation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("duplicate interpolation abscissa {0:#x}")]
    DuplicateAbscissa(u64),

    #[error("interpolation points are not consistent with degree bound {0}")]
    InconsistentPoints(usize),

    #[error("invalid instance: {0}")]
    Invalid(#[from] Violation),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("avoided set overlaps U at vertex {0}")]
    AvoidedOverlapsU(usize),

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge {edge} is not a valid {expected} edge in this projection")]
    ProjectionShape { edge: usize, expected: &'static str },

    #[error("Edmonds sides have unequal sizes {left} and {right}")]
    UnequalSides { left: usize, right: usize },

    #[error("instance has no vertex partition")]
    MissingPartition,

    #[error("infeasible generator arguments: {0}")]
    InfeasibleArguments(String),

    #[error("guard exceeded: {what} = {value} (limit {limit})")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("edge assignment has {got} values for {expected} edges")]
    AssignmentLength { expected: usize, got: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),

    #[error("no U of size {u_size} can keep a cover of n = {n}, k = {k} intact")]
    InfeasibleProjection { n: usize, k: usize, u_size: usize },
}
