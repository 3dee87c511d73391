use std::path::PathBuf;

use crate::distributions::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {name} = {value} is outside the valid range")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid parameters for {kind}: phi = {phi}, theta = {theta}")]
    InvalidParams {
        kind: ModelKind,
        phi: f64,
        theta: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("no valid records in {0}")]
    EmptyInput(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate sample: all values are equal")]
    Degenerate,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unidentifiable fit: {0}")]
    Unidentifiable(String),

    #[error("bin sequences differ in length: model {model}, empirical {empirical}, widths {widths}, weights {weights}")]
    MismatchedBins {
        model: usize,
        empirical: usize,
        widths: usize,
        weights: usize,
    },

    #[error("every bin was excluded from the distance")]
    AllBinsExcluded,

    #[error("no non-empty bin lies above the median {median}")]
    NoTailBins { median: f64 },

    #[error("missing distance report for {0}")]
    MissingModel(ModelKind),

    #[error("duplicate distance report for {0}")]
    DuplicateModel(ModelKind),

    #[error("nothing to aggregate")]
    EmptyAggregate,

    #[error("schedule has {schedule} entries but spec asks for {windows} windows")]
    ScheduleMismatch { windows: usize, schedule: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),

    #[error("no window could be fitted ({excluded} excluded)")]
    NoFittedWindows { excluded: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that mean "the run produced nothing", as opposed to bad input.
    pub fn is_empty_result(&self) -> bool {
        matches!(self, Error::EmptyInput(_) | Error::NoFittedWindows { .. })
    }
}
