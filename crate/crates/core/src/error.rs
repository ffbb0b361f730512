use thiserror::Error;

/// Errors raised by graph loading, factorization and the measures built on top.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: nonpositive weight {weight} for pair ({p}, {q})")]
    NonPositiveWeight {
        line: usize,
        p: usize,
        q: usize,
        weight: f64,
    },

    #[error("node id {id} out of range 1..={n}")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("duplicate entry for pair ({p}, {q}) with differing weights {first} and {second}")]
    DuplicateEdge {
        p: usize,
        q: usize,
        first: f64,
        second: f64,
    },

    /// `component` holds the 1-based ids of a component not containing node 1.
    #[error("graph is disconnected: {} node(s) starting with {:?} are not reachable from node 1", .component.len(), &.component[..component.len().min(10)])]
    Disconnected { component: Vec<usize> },

    #[error("numerical breakdown: pivot {pivot:e} at step {step} is below {threshold:e}")]
    NumericalBreakdown {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("pair must have distinct nodes, got ({0}, {0})")]
    SameNode(usize),

    #[error("evaluation at the pole t = {t} (t * a * alpha = 1)")]
    Pole { t: f64 },

    #[error("pair ({p}, {q}) is not a cut-edge")]
    NotABridge { p: usize, q: usize },

    #[error("pair ({p}, {q}) is not an edge")]
    NonEdge { p: usize, q: usize },

    #[error("n = {n} exceeds the dense threshold {threshold}")]
    TooLargeForDense { n: usize, threshold: usize },

    #[error("score tables cover different pair sets")]
    UniverseMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
