use std::io;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the stage that raises them; callers such as the
/// CLI map them onto exit codes with [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    // graph construction and I/O
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    InvalidVertex { vertex: usize, vertex_count: usize },
    #[error("malformed graph file at line {line}: {reason}")]
    MalformedFile { line: usize, reason: String },
    #[error("i/o failure: {0}")]
    IoFailure(#[from] io::Error),

    // generators
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("offspring law is not critical (mean {mean})")]
    NotCritical { mean: f64 },
    #[error("no surviving edges; generated graph is empty")]
    EmptyGraph,
    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionBudgetExceeded { attempts: u64 },

    // numerics and budgets
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("walk exceeded step cap of {cap}")]
    StepBudgetExceeded { cap: u64 },

    // analysis
    #[error("edge set {index} is not a cutset between {x} and {y}")]
    NotACutset { index: usize, x: usize, y: usize },
    #[error("cutsets {first} and {second} share an edge")]
    OverlappingCutsets { first: usize, second: usize },
    #[error("at least two centers are required, got {0}")]
    TooFewCenters(usize),
    #[error("degenerate field: expected maximum is {0}")]
    DegenerateField(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Coarse classification used for exit codes and machine-readable errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Budget,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BudgetExceeded(_)
            | Error::StepBudgetExceeded { .. }
            | Error::RejectionBudgetExceeded { .. } => ErrorKind::Budget,
            Error::NumericalFailure(_) | Error::DegenerateField(_) => ErrorKind::Numerical,
            Error::IoFailure(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    /// Stable identifier for the variant, used in JSON error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DisconnectedGraph { .. } => "disconnected_graph",
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::SelfLoop(_) => "self_loop",
            Error::DuplicateEdge { .. } => "duplicate_edge",
            Error::EmptyEdgeList => "empty_edge_list",
            Error::InvalidVertex { .. } => "invalid_vertex",
            Error::MalformedFile { .. } => "malformed_file",
            Error::IoFailure(_) => "io_failure",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::NotCritical { .. } => "not_critical",
            Error::EmptyGraph => "empty_graph",
            Error::RejectionBudgetExceeded { .. } => "rejection_budget_exceeded",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::NumericalFailure(_) => "numerical_failure",
            Error::StepBudgetExceeded { .. } => "step_budget_exceeded",
            Error::NotACutset { .. } => "not_a_cutset",
            Error::OverlappingCutsets { .. } => "overlapping_cutsets",
            Error::TooFewCenters(_) => "too_few_centers",
            Error::DegenerateField(_) => "degenerate_field",
            Error::InsufficientData(_) => "insufficient_data",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
