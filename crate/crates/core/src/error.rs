use thiserror::Error;

/// Errors raised by every module of the engine.
///
/// The variants are grouped so that a caller can tell a mathematical
/// contract violation apart from running out of precision or budget.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("insufficient precision: {what} (required {required}, available {available})")]
    Precision {
        what: String,
        required: String,
        available: String,
    },
    #[error("budget exceeded: {what} needs {needed} evaluations, budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("empty witness set `{0}`")]
    EmptyWitness(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub fn precision(what: impl Into<String>, required: impl ToString, available: impl ToString) -> Self {
        Error::Precision {
            what: what.into(),
            required: required.to_string(),
            available: available.to_string(),
        }
    }

    pub fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    /// Process exit code for the command-line surface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision { .. } | Error::Budget { .. } => 2,
            Error::Syntax { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
