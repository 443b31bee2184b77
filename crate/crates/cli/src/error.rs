//! CLI failure type: carries the process exit code and a machine-readable
//! kind alongside the human-readable message. On exit the error is printed
//! to stderr as a single JSON object so callers can parse failures.

use std::fmt;

/// Exit code for invalid configuration (bad JSON, unknown keys, values
/// outside their documented domain, CLI misuse).
pub const EXIT_CONFIG: i32 = 2;

/// Exit code for numerical failures (singularities, step-size guards,
/// non-unique steady states, non-convergence) and output I/O failures.
pub const EXIT_NUMERICAL: i32 = 3;

/// A CLI failure with its exit code and machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            kind: "io",
            message: message.into(),
        }
    }

    /// The stderr payload: `{"error":{"kind":…,"message":…,"exit_code":…}}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.code,
            }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<nonrecip::Error> for CliError {
    fn from(e: nonrecip::Error) -> Self {
        use nonrecip::Error as E;
        let kind = match &e {
            E::InvalidModel(_) => "invalid_model",
            E::InvalidArgument(_) => "invalid_argument",
            E::ResonanceViolation(_) => "resonance_violation",
            E::InvalidCoupling(_) => "invalid_coupling",
            E::NoDirectionalSolution(_) => "no_directional_solution",
            E::NumericalSingularity { .. } => "numerical_singularity",
            E::StepSize(_) => "step_size",
            E::IntegrationFailure(_) => "integration_failure",
            E::NonUniqueSteadyState { .. } => "non_unique_steady_state",
            E::CutoffTooSmall { .. } => "cutoff_too_small",
            E::NotConverged(_) => "not_converged",
            E::Serialization(_) => "serialization",
        };
        let code = if e.is_numerical() || matches!(e, E::Serialization(_)) {
            EXIT_NUMERICAL
        } else {
            EXIT_CONFIG
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}
