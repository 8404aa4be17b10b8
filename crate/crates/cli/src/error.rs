use std::fmt;

use serde::Serialize;

/// Error reported to HTTP clients as `{code, field, message}` and mapped to
/// an exit status by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl ApiError {
    pub fn new(
        status: u16,
        code: &'static str,
        field: Option<String>,
        message: impl Into<String>,
    ) -> Self {
        ApiError {
            status,
            code,
            field,
            message: message.into(),
        }
    }

    pub fn bad_request(field: &str, message: impl Into<String>) -> Self {
        ApiError::new(400, "invalid_argument", Some(field.to_owned()), message)
    }

    pub fn malformed(err: &serde_json::Error) -> Self {
        let msg = err.to_string();
        let field = msg.split('`').nth(1).map(str::to_owned);
        ApiError::new(400, "malformed_request", field, msg)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(500, "internal", None, message)
    }

    /// 2 for usage errors, 3 for data and constraint errors.
    pub fn exit_code(&self) -> u8 {
        if self.status == 400 {
            2
        } else {
            3
        }
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{} ({field}): {}", self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

impl std::error::Error for ApiError {}

impl From<chromashape::Error> for ApiError {
    fn from(e: chromashape::Error) -> Self {
        use chromashape::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidArgument(_) => ApiError::new(400, "invalid_argument", None, message),
            E::Parse { .. } | E::InvalidEntry { .. } | E::Json(_) => {
                ApiError::new(422, "invalid_data", None, message)
            }
            E::Io { path, .. } => {
                ApiError::new(500, "io", Some(path.display().to_string()), message)
            }
            E::UnknownId { kind, .. } => {
                ApiError::new(404, "unknown_id", Some(format!("{kind}_id")), message)
            }
            E::Constraint(_) => ApiError::new(
                409,
                "constraint_violation",
                Some("constraints".into()),
                message,
            ),
            E::ExhaustedAlternatives { .. } => ApiError::new(
                409,
                "exhausted_alternatives",
                Some("position".into()),
                message,
            ),
            E::MissingEvidence {
                axis,
                first,
                second,
            } => ApiError::new(
                422,
                "missing_evidence",
                Some(format!("{axis}[{first},{second}]")),
                message,
            ),
            E::MissingIndividualEvidence { axis, element } => ApiError::new(
                422,
                "missing_evidence",
                Some(format!("{axis}[{element}]")),
                message,
            ),
            E::EmptyMatrix => ApiError::new(422, "missing_evidence", None, message),
            E::UndefinedCorrelation(_) => {
                ApiError::new(422, "undefined_correlation", None, message)
            }
            E::Coverage { .. } => ApiError::new(422, "coverage", Some("trials".into()), message),
            E::GenerationFailure(_) => ApiError::new(500, "generation_failure", None, message),
        }
    }
}
