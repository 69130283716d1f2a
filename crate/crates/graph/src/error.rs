use thiserror::Error;

use htsim_core::EngineError;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),

    #[error("edge {0} -> {1} would create a cycle")]
    Cycle(String, String),

    #[error("graph has {0} nodes; at most {1} are supported")]
    TooManyNodes(usize, usize),

    #[error("node sets differ: {0}")]
    NodeMismatch(String),

    #[error("no graphs to average")]
    EmptyInput,

    #[error("partially directed graph has no consistent DAG extension")]
    NoExtension,

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("bin spec: {0}")]
    BinSpec(String),

    #[error("train fraction {0} must lie strictly between 0 and 1")]
    Fraction(f64),

    #[error("profile sampler: {0}")]
    Sampler(String),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GraphError {
    /// Whether the failure came from reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            GraphError::Io(_) => true,
            GraphError::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
