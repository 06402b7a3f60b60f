use chemistry_core::datamodel::DataError;
use chemistry_core::predict::PredictError;
use chemistry_core::teambuilder::TeamError;
use thiserror::Error;

/// Errors surfaced to CLI users and HTTP clients.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    /// Bad flags, bad request bodies, invalid input files.
    #[error("{0}")]
    User(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::User(_) => "bad_request",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Infeasible(_) => "infeasible",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ServiceError::Internal(_) => 2,
            _ => 1,
        }
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl From<DataError> for ServiceError {
    fn from(e: DataError) -> Self {
        ServiceError::User(e.to_string())
    }
}

impl From<PredictError> for ServiceError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::MissingProfile(_) => ServiceError::NotFound(e.to_string()),
            PredictError::EmptySplit(_) | PredictError::EmptyExamples | PredictError::Data(_) => {
                ServiceError::User(e.to_string())
            }
            PredictError::Model(_) | PredictError::Dump(_) => ServiceError::Internal(e.to_string()),
        }
    }
}

impl From<TeamError> for ServiceError {
    fn from(e: TeamError) -> Self {
        match e {
            TeamError::Infeasible(m) => ServiceError::Infeasible(format!("infeasible: {m}")),
            TeamError::UnresolvablePair(..) => ServiceError::NotFound(e.to_string()),
            TeamError::InvalidProblem(_) | TeamError::PoolTooLarge { .. } => ServiceError::User(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;
