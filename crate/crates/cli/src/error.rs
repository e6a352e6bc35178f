use std::fmt;
use std::path::Path;

/// Failure of a CLI run, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or missing inputs. Nothing is written.
    Usage(String),
    /// Malformed or inconsistent input data.
    Data(String),
    /// A result failed an internal consistency check.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    /// Core error raised while reading `path`; the path is kept in the message.
    pub fn at(path: &Path, err: millscope::Error) -> Self {
        match CliError::from(err) {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            CliError::Invariant(m) => CliError::Invariant(format!("{}: {m}", path.display())),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Invariant(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<millscope::Error> for CliError {
    fn from(err: millscope::Error) -> Self {
        match err {
            millscope::Error::Invariant(_) => CliError::Invariant(err.to_string()),
            millscope::Error::InvalidConfig(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Fails with exit status 3 unless `cond` holds.
pub fn ensure(cond: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Invariant(what()))
    }
}
