use std::fmt;
use std::path::{Path, PathBuf};

use qnet_alloc_core::{Error, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(ParseError),
    #[error("VALIDATION_ERROR{}: {report}", in_path(path))]
    Validation {
        path: Option<PathBuf>,
        report: ValidationReport,
    },
    #[error(transparent)]
    Solve(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

fn in_path(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map(|p| format!(" in {}", p.display()))
        .unwrap_or_default()
}

impl CliError {
    /// 1 for infeasibility, 2 for bad input, 3 for solver limits and
    /// anything else that went wrong inside.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Validation { .. } | CliError::Usage(_) => 2,
            CliError::Solve(e) if e.is_infeasible() => 1,
            CliError::Solve(
                Error::BadArgument(_)
                | Error::BadProbability(_)
                | Error::BadBounds(_)
                | Error::ValidationFailed(_),
            ) => 2,
            CliError::Solve(_) => 3,
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Parse(mut p) => {
                p.file = Some(path.to_path_buf());
                CliError::Parse(p)
            }
            CliError::Validation { report, .. } => CliError::Validation {
                path: Some(path.to_path_buf()),
                report,
            },
            other => other,
        }
    }
}

/// Malformed JSON, located by byte offset and by field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub file: Option<PathBuf>,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    /// Field path such as `machines[2].capacity_qubits`; empty at top level.
    pub field: String,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(text: &str, err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let field = err.path().to_string();
        let field = if field == "." { String::new() } else { field };
        Self::from_json(text, err.into_inner(), field)
    }

    pub(crate) fn from_json(text: &str, inner: serde_json::Error, field: String) -> Self {
        let (line, column) = (inner.line(), inner.column());
        Self {
            file: None,
            offset: byte_offset(text, line, column),
            line,
            column,
            field,
            message: strip_position(&inner.to_string()),
        }
    }
}

/// serde_json reports 1-based lines and the column just past the offending
/// byte; at end of input the column is the line length.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column).min(text.len())
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PARSE_ERROR")?;
        if let Some(file) = &self.file {
            write!(f, " in {}", file.display())?;
        }
        write!(f, " at byte {} (line {}, column {})", self.offset, self.line, self.column)?;
        if !self.field.is_empty() {
            write!(f, " at {}", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}
