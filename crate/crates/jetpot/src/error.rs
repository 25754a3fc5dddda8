use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("not supported: {0}")]
    Capability(String),
    #[error("search failed: {0}")]
    SearchFailure(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("hyperbolicity violated: {0}")]
    Hyperbolicity(String),
    #[error("structure violation: {0}")]
    Structure(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("inadmissible level: {0}")]
    Level(String),
    #[error("jet outside the constraint set: {0}")]
    ConstraintViolation(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
