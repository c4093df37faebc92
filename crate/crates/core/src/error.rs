use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point fell outside an objective's open domain. `distance` is how far
    /// outside the point lies (0 when it sits exactly on the boundary).
    #[error("point {point} lies outside the domain ({domain}), distance {distance:e}")]
    Domain {
        point: f64,
        domain: String,
        distance: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid smoothness profile: {0}")]
    Profile(String),

    #[error("no finite G up to {cap:e} satisfies the {variant} constraint")]
    NoFiniteG { variant: String, cap: f64 },

    #[error("method mismatch: {0}")]
    MethodMismatch(String),

    #[error("missing problem data: {0}")]
    MissingData(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("rate-fit window error: {0}")]
    Window(String),

    #[error("level-set search failed: {0}")]
    Search(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
