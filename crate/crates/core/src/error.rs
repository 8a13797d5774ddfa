use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is {distance:.3e} away from the surface (tolerance {tolerance:.1e})")]
    OffSurface { distance: f64, tolerance: f64 },

    #[error("vector is not a unit normal at this point (|v·ν| = {alignment})")]
    NotNormal { alignment: f64 },

    #[error("degenerate element {element}: measure {measure:e}")]
    DegenerateElement { element: usize, measure: f64 },

    #[error("elements {first} and {second} disagree on orientation")]
    InconsistentOrientation { first: usize, second: usize },

    #[error("invalid atom {index}: {reason}")]
    InvalidAtom { index: usize, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("dictionary function `{id}` violates the bounded-Lipschitz constraint ({what} estimate {estimate})")]
    DictionaryViolation { id: String, what: &'static str, estimate: f64 },

    #[error("underdetermined recovery: {equations} equations for {unknowns} unknowns")]
    Underdetermined { equations: usize, unknowns: usize },

    #[error("least-squares solve failed: {0}")]
    SolverFailure(String),

    #[error("atom {index} is off the ambient manifold: {reason}")]
    OffManifold { index: usize, reason: String },

    #[error("total multiplicity is zero")]
    ZeroMultiplicity,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
