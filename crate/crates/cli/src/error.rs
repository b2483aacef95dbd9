//! Error-to-exit-code mapping. The contract is stable for scripting:
//! 0 success, 2 I/O, 3 format, 4 missing truth, 5 model error.

use std::fmt;

use instrank_core::evalrank::EvalError;
use instrank_core::forecast::ForecastError;
use instrank_core::ingest::IngestError;
use instrank_core::netrank::NetRankError;
use instrank_core::paperfilter::FilterError;
use instrank_core::relscore::RelScoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Format,
    MissingTruth,
    Model,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Io => 2,
            ErrorKind::Format => 3,
            ErrorKind::MissingTruth => 4,
            ErrorKind::Model => 5,
        }
    }

    fn token(self) -> &'static str {
        match self {
            ErrorKind::Io => "IoError",
            ErrorKind::Format => "FormatError",
            ErrorKind::MissingTruth => "MissingTruth",
            ErrorKind::Model => "ModelError",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> CliError {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn format(message: impl Into<String>) -> CliError {
        CliError::new(ErrorKind::Format, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.token(), self.message)
    }
}

impl From<IngestError> for CliError {
    fn from(err: IngestError) -> CliError {
        let kind = match &err {
            IngestError::Io { .. } => ErrorKind::Io,
            IngestError::Format(_) => ErrorKind::Format,
            IngestError::NoMatch { .. } | IngestError::EmptyCorpus => ErrorKind::Model,
        };
        CliError::new(kind, err.to_string())
    }
}

impl From<RelScoreError> for CliError {
    fn from(err: RelScoreError) -> CliError {
        let kind = match &err {
            RelScoreError::Io { .. } => ErrorKind::Io,
            RelScoreError::Format(_) => ErrorKind::Format,
            RelScoreError::UnknownPaper { .. } => ErrorKind::Model,
        };
        CliError::new(kind, err.to_string())
    }
}

impl From<ForecastError> for CliError {
    fn from(err: ForecastError) -> CliError {
        CliError::new(ErrorKind::Model, err.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> CliError {
        let kind = match &err {
            EvalError::Io { .. } => ErrorKind::Io,
            EvalError::Format(_) => ErrorKind::Format,
            EvalError::MissingTruth { .. } => ErrorKind::MissingTruth,
            _ => ErrorKind::Model,
        };
        CliError::new(kind, err.to_string())
    }
}

impl From<FilterError> for CliError {
    fn from(err: FilterError) -> CliError {
        let kind = match &err {
            FilterError::Io { .. } => ErrorKind::Io,
            FilterError::Format(_) => ErrorKind::Format,
            FilterError::DegenerateLabels => ErrorKind::Model,
        };
        CliError::new(kind, err.to_string())
    }
}

impl From<NetRankError> for CliError {
    fn from(err: NetRankError) -> CliError {
        CliError::new(ErrorKind::Model, err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::new(ErrorKind::Io, err.to_string())
    }
}
