use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("time {t} s is outside the trajectory window [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },

    #[error("empty trace")]
    EmptyTrace,

    #[error("controller fault: {0}")]
    Fault(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for faults raised while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGains(_) | Error::InvalidConfig(_) | Error::Parse(_) => 2,
            _ => 3,
        }
    }
}
