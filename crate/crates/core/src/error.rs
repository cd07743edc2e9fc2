use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid prospect: {0}")]
    InvalidProspect(String),

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("prospect has {0} distinct outcomes; at most two are supported")]
    TooManyOutcomes(usize),

    #[error("empty history")]
    EmptyHistory,

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfBounds {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("response table row {row}: {message}")]
    TableRow { row: usize, message: String },

    #[error("context {0} is missing from the response table")]
    MissingContext(String),

    #[error("incomplete variation group; missing contexts: {}", .0.join(", "))]
    IncompleteGroup(Vec<String>),

    #[error("need at least {needed} contexts, got {got}")]
    TooFewContexts { needed: usize, got: usize },

    #[error("correlation undefined on the {0} axis (zero variance)")]
    UndefinedCorrelation(String),

    #[error("{0}")]
    Data(String),

    #[error("fit failed on every start: {}", .0.join("; "))]
    FitFailed(Vec<String>),

    #[error("bootstrap dropped {dropped} of {total} replicates")]
    BootstrapDrops { dropped: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
