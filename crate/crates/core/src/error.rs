use std::fmt;

/// One offending configuration key and what is wrong with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input: bad quantum numbers, mismatched dimensions, empty sets.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed its own accuracy check.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid configuration: {}", join_issues(.0))]
    Config(Vec<ConfigIssue>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
