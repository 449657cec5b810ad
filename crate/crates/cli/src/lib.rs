//! Library behind the `cambody` binary. Command implementations live here so
//! integration tests can drive them directly; `main` only parses arguments
//! and maps errors to exit codes (0 success, 1 bad input, 2 internal error).

pub mod args;
pub mod commands;
pub mod output;
pub mod scene;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CmdError {
    /// Expected failures: unreadable or malformed inputs, invalid values.
    #[error("{0}")]
    User(String),
    /// Everything that should not happen with valid inputs.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::User(_) => 1,
            CmdError::Internal(_) => 2,
        }
    }

    pub fn user(msg: impl Into<String>) -> Self {
        CmdError::User(msg.into())
    }

    pub fn internal(msg: impl std::fmt::Display) -> Self {
        CmdError::Internal(msg.to_string())
    }
}
