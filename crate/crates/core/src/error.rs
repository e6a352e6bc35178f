use thiserror::Error;

use crate::corpus::YearRange;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate publication id `{0}`")]
    DuplicatePublication(String),

    #[error("publication `{pub_id}` lists researcher `{researcher_id}` more than once")]
    DuplicateAuthor {
        pub_id: String,
        researcher_id: String,
    },

    #[error("publication `{0}` has no authors")]
    NoAuthors(String),

    #[error("year {year} is outside the corpus range {range}")]
    YearOutOfRange { year: i32, range: YearRange },

    #[error("corpus has no publications")]
    EmptyCorpus,

    #[error("researcher first published in {first_pub_year}, not active in {at_year}")]
    NotYetActive { first_pub_year: i32, at_year: i32 },

    #[error("publication age {0} is outside [0, 100]")]
    AgeOutOfRange(i64),

    #[error("unknown researcher `{0}`")]
    UnknownResearcher(String),

    #[error("window {window} exceeds the corpus range {range}")]
    WindowOutOfRange { window: YearRange, range: YearRange },

    #[error("frequency counts start at 1")]
    ZeroCount,

    #[error("graph density needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("sampling pool holds {pool} items, {needed} needed")]
    PoolTooSmall { pool: usize, needed: usize },

    #[error("flag list `{0}` has no eligible publications in the window")]
    EmptyFlagList(String),

    #[error("flag list `{name}` has type {actual}, expected {expected}")]
    WrongFlagType {
        name: String,
        expected: String,
        actual: String,
    },

    #[error("no citations point into the flagged set")]
    NoCitations,

    #[error("no peer-review records")]
    EmptyReviews,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ground truth references `{0}`, which is absent from the corpus")]
    TruthMismatch(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the input data rather than by a bug.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}
