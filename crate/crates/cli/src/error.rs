use std::fmt;

/// A failure together with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const OBSERVATIONS: u8 = 4;

    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            code: Self::INFEASIBLE,
            message: message.into(),
        }
    }

    pub fn observations(message: impl Into<String>) -> Self {
        CliError {
            code: Self::OBSERVATIONS,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: Self::IO,
            message: message.into(),
        }
    }

    /// Errors raised while scoring observations all point at the input data.
    pub fn from_observation(err: seqprt::Error) -> Self {
        Self::observations(err.to_string())
    }
}

impl From<seqprt::Error> for CliError {
    fn from(err: seqprt::Error) -> Self {
        use seqprt::Error::*;
        let code = match err {
            Infeasible(_) => Self::INFEASIBLE,
            Malformed { .. } | DegenerateSample(_) => Self::OBSERVATIONS,
            Domain(_) | InvalidSpec(_) | Usage(_) => Self::USAGE,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
