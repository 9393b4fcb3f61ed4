use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown generator kind {0:?}")]
    UnknownGenerator(String),
    #[error("invalid generator parameter {field}: {message}")]
    GeneratorParams { field: String, message: String },
}

impl InstanceError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("source player {0} is matched")]
    MatchedSource(usize),
    #[error("path set is already optimal")]
    AlreadyOptimal,
    #[error("invalid path set: {0}")]
    InvalidPaths(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocError {
    #[error("insufficient value: {have} < {need}")]
    InsufficientValue { have: String, need: String },
    #[error("uncovered players {0:?}")]
    Uncovered(Vec<usize>),
}

/// Failures of a solver run. None of these is an ordinary outcome: a target
/// the solver cannot reach is reported as a stuck probe with a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("iteration cap of {0} steps exceeded")]
    IterationCap(u64),
}

impl From<GraphError> for SolveError {
    fn from(e: GraphError) -> Self {
        SolveError::Invariant(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}
