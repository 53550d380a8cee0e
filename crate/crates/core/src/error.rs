use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate triangle {index}: signed area {area:e}")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("malformed mesh: {0}")]
    MalformedMesh(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("enrichment family {family} is not admissible{} (singular value ratio {ratio:e})", element.map(|e| format!(" on element {e}")).unwrap_or_default())]
    NotAdmissible {
        family: String,
        element: Option<usize>,
        ratio: f64,
    },

    #[error("non-finite gradient: {0}")]
    NonFiniteGradient(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
