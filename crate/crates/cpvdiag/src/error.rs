use std::path::Path;

/// Crate-wide error type. Variants map onto the process exit-code contract:
/// 0 healthy, 1 fault found (not an error), 2 invalid input, 3 insufficient data.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("fit infeasible: {0}")]
    Infeasible(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Carries the first error out of a numeric closure that can only speak f64.
/// Failed evaluations surface as NaN, which every minimizer here treats as
/// "worse than anything"; the stored error is re-raised after the search.
pub(crate) struct ErrSink(std::cell::RefCell<Option<Error>>);

impl ErrSink {
    pub(crate) fn new() -> Self {
        ErrSink(std::cell::RefCell::new(None))
    }

    pub(crate) fn eval(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    pub(crate) fn take(&self) -> Result<()> {
        match self.0.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// Exit code for the CLI contract. Insufficient data is 3, everything
    /// else that reaches main is an input/processing failure: 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Insufficient(_) => 3,
            _ => 2,
        }
    }
}
