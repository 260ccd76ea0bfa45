//! Error records and exit codes.

use serde::Serialize;

/// Exit code for invalid configurations and unsupported requests.
pub const EXIT_USAGE: u8 = 2;
/// Exit code for numerical failures (truncation, normalization, ...).
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit code for I/O failures.
pub const EXIT_IO: u8 = 1;

/// A failed run, printed to stderr as one JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    pub error: String,
    pub parameter: Option<String>,
    pub message: String,
}

impl Failure {
    pub fn usage(parameter: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: "usage".into(),
            parameter: Some(parameter.to_string()),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_IO,
            error: "io".into(),
            parameter: Some("output".into()),
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("failure record serializes");
        v["exit_code"] = self.code.into();
        v.to_string()
    }
}

impl From<greyvar_core::Error> for Failure {
    fn from(e: greyvar_core::Error) -> Self {
        use greyvar_core::Error as E;
        let code = match e {
            E::Domain { .. }
            | E::DimensionMismatch { .. }
            | E::Coverage { .. }
            | E::Unsupported { .. } => EXIT_USAGE,
            E::Invertibility { .. }
            | E::Normalization { .. }
            | E::Truncation { .. }
            | E::OutsideTransitionZone { .. }
            | E::RootBracketing { .. } => EXIT_NUMERICAL,
        };
        Failure {
            code,
            error: e.kind().into(),
            parameter: e.parameter().map(str::to_string),
            message: e.to_string(),
        }
    }
}
