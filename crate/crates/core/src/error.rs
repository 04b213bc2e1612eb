use thiserror::Error;

/// Errors raised by the mesh, solver and data-reduction layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("non-positive volume {volume:e} in block {block} cell ({i}, {j}, {k})")]
    InvertedCell {
        block: usize,
        i: usize,
        j: usize,
        k: usize,
        volume: f64,
    },

    #[error("region selection touches wall node at block {block} ({i}, {j}, {k})")]
    WallInRegion { block: usize, i: usize, j: usize, k: usize },

    #[error("invalid flow state in cell {cell}: {reason}")]
    InvalidState { cell: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("interpolation failed: {0}")]
    NoBracket(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Tag errors with the pipeline stage that raised them.
pub trait StageContext<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T, E: Into<Error>> StageContext<T> for std::result::Result<T, E> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| Error::Stage { stage: stage.to_string(), source: Box::new(e.into()) })
    }
}
