//! Command-level errors mapped onto the exit-code contract:
//! 0 = success, 1 = check/tolerance failure, 2 = input error.

use std::fmt;

/// What went wrong while running a command.
#[derive(Debug)]
pub enum CmdError {
    /// Bad input (config, expressions, unsupported request): exit 2.
    Input(String),
    /// A check or tolerance failed: exit 1.
    Check(String),
}

impl CmdError {
    /// Build an input error.
    pub fn input(message: String) -> Self {
        CmdError::Input(message)
    }

    /// Build a check failure.
    pub fn check(message: String) -> Self {
        CmdError::Check(message)
    }

    /// Wrap a core error as an input error (evaluation/parse problems are
    /// input-class by this contract).
    pub fn from_core(e: ffc_core::Error) -> Self {
        CmdError::Input(e.to_string())
    }

    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => 2,
            CmdError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Input(m) => write!(f, "input error: {m}"),
            CmdError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CmdError {}
