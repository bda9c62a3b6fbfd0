use thiserror::Error;

/// Errors produced by graph construction, estimation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("edge ({i}, {j}) has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("graph is not connected")]
    Disconnected,

    #[error("super-graph is not connected")]
    DisconnectedSuperGraph,

    /// The MLE has no finite minimizer. `component` is a set of nodes that
    /// never beats any node outside of it.
    #[error("MLE does not exist: nodes {component:?} never win against the rest of the graph")]
    NonExistence { component: Vec<usize> },

    #[error("logit undefined at y = {0}")]
    InfiniteLogit(f64),

    #[error("local estimation failed on subgraph {subgraph}: {source}")]
    Subgraph {
        subgraph: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("all cross samples between subgraphs {a} and {b} are unanimous; the shift is infinite")]
    UnanimousCrossEdges { a: usize, b: usize },

    #[error("edge ({0}, {1}) is not covered by any subgraph")]
    UncoveredEdge(usize, usize),

    #[error("stationary distribution did not converge: {0}")]
    SpectralFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
