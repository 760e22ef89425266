use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite generator: ({0}, {1}, {2})")]
    NonFiniteGenerator(f64, f64, f64),

    #[error("invalid bump parameters: {0}")]
    InvalidBump(String),

    #[error("expression error at byte {pos}: {msg}")]
    Expression { pos: usize, msg: String },

    #[error("profile singular at ω = {0}")]
    ProfileSingular(f64),

    #[error("bad synthesis parameters: {0}")]
    BadSynthesisParameters(String),

    #[error("time out of schedule: t = {t} not in [0, {total}]")]
    TimeOutOfSchedule { t: f64, total: f64 },

    #[error("incompatible profiles: {0}")]
    IncompatibleProfiles(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("unsupported schedule version {0}")]
    UnsupportedVersion(u64),

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}
