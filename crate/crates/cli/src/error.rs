use std::fmt;

/// A failed command: a short kind tag, a message and the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    code: u8,
}

impl CliError {
    /// Unreadable or malformed input.
    pub fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            code: 2,
        }
    }

    /// Well-formed input the simulation cannot satisfy.
    pub fn infeasible(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            code: 3,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ris_sim::Error> for CliError {
    fn from(e: ris_sim::Error) -> Self {
        use ris_sim::Error as E;
        match &e {
            E::Parse { .. } => Self::input("parse", e.to_string()),
            E::Io(_) => Self::input("io", e.to_string()),
            E::InvalidArgument(m) => Self::infeasible("invalid-argument", m.clone()),
            E::DegenerateGeometry(m) => Self::infeasible("degenerate-geometry", m.clone()),
            E::TooLarge(m) => Self::infeasible("too-large", m.clone()),
            E::BlockedLink(m) => Self::infeasible("blocked-link", m.clone()),
        }
    }
}
