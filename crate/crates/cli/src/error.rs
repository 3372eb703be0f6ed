use bienergy_core::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{block}: {source}")]
    Block {
        block: &'static str,
        #[source]
        source: Error,
    },

    #[error(transparent)]
    Engine(#[from] Error),

    #[error("at point {point:?}: {source}")]
    AtPoint {
        point: Vec<f64>,
        #[source]
        source: Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn in_block(block: &'static str, source: Error) -> CliError {
        CliError::Block { block, source }
    }

    pub fn at_point(point: &bienergy_core::PointState, source: Error) -> CliError {
        let mut v = point.x.clone();
        v.extend(&point.y);
        CliError::AtPoint { point: v, source }
    }

    /// Process exit code: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) | CliError::Block { source: e, .. } | CliError::AtPoint { source: e, .. } => {
                if e.is_numerical() {
                    3
                } else {
                    2
                }
            }
            CliError::Schema(_) | CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}
