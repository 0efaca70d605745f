use grassdet_core::Error;

/// Anything that stops a command before a report is produced.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or malformed input.
    Usage(String),
    Core(Error),
}

impl Failure {
    /// 2 usage/input, 3 shape or ambient mismatch, 4 precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Shape(_) | Error::AmbientMismatch { .. } => 3,
                Error::Precondition(_) | Error::NotConverged { .. } => 4,
                Error::Invalid(_) | Error::RealFieldOnly => 2,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}
