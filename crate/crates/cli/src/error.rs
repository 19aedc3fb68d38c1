use std::fmt;

use gammaflow::cumulants::CumulantError;
use gammaflow::mmse::{MmseError, RecoveryError};
use gammaflow::seqfile::SeqFileError;
use gammaflow::TableError;

/// Process exit codes. Stable: scripts depend on them.
pub mod code {
    pub const VERIFY: i32 = 1;
    pub const AMBIGUOUS: i32 = 2;
    pub const INCONSISTENT: i32 = 3;
    pub const IRRATIONAL: i32 = 4;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const IO: i32 = 74;
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: code::USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            code: code::DATA,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure {
            code: code::IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        let code = match &e {
            TableError::Io { .. } => code::IO,
            TableError::Corrupt { .. } | TableError::Compute(_) => code::DATA,
            TableError::Order(_) => code::USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CumulantError> for Failure {
    fn from(e: CumulantError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<SeqFileError> for Failure {
    fn from(e: SeqFileError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<MmseError> for Failure {
    fn from(e: MmseError) -> Self {
        match e {
            MmseError::Table(t) => t.into(),
            e => Failure::data(e.to_string()),
        }
    }
}

impl From<RecoveryError> for Failure {
    fn from(e: RecoveryError) -> Self {
        let code = match e {
            RecoveryError::Table(t) => return t.into(),
            RecoveryError::Mmse(m) => return m.into(),
            RecoveryError::Ambiguous { .. } => code::AMBIGUOUS,
            RecoveryError::Inconsistent { .. } | RecoveryError::FormulaMismatch { .. } => {
                code::INCONSISTENT
            }
            RecoveryError::Irrational { .. } => code::IRRATIONAL,
            RecoveryError::Cumulant(_) => code::DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}
