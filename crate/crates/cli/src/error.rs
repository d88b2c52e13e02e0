use std::fmt;

use serde_json::json;
use sn_core::Error;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// A required input file is absent or unreadable.
    Missing(String),
    /// Bad flags or configuration.
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Missing(m) => write!(f, "missing input: {m}"),
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Missing(_) => "missing-input",
            CliError::Usage(_) => "invalid-input",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "invalid-bracket" => 2,
            "domain-error" => 3,
            "non-convergence" => 4,
            "missing-input" => 5,
            _ => 1,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Core(e) = self {
            match e {
                Error::InvalidBracket { w_lo, w_hi, class } => {
                    v["w_lo"] = json!(w_lo);
                    v["w_hi"] = json!(w_hi);
                    v["class"] = json!(class);
                }
                Error::NonConvergence {
                    iterations,
                    history,
                } => {
                    v["iterations"] = json!(iterations);
                    v["history"] = json!(history);
                }
                Error::SolverFailure { r, state, .. } => {
                    v["r"] = json!(r);
                    v["state"] = json!(state);
                }
                _ => {}
            }
        }
        v
    }
}
