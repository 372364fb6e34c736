//! Driver errors and their process exit codes.

use thiserror::Error;

/// Failures of the experiment driver.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration failed validation; every problem is listed.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    /// A numerical routine failed; `module` names where it happened.
    #[error("{module}: {source}")]
    Numeric {
        module: &'static str,
        #[source]
        source: bvl_core::Error,
    },
    /// A size or memory budget was exceeded.
    #[error("{module}: {source}")]
    Resource {
        module: &'static str,
        #[source]
        source: bvl_core::Error,
    },
    /// Reading or writing a file failed.
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    /// A result file could not be parsed back.
    #[error("malformed result file: {0}")]
    Format(String),
}

impl CliError {
    /// Wraps a library error with the module that raised it.
    ///
    /// Domain and admissibility errors come from parameter values, so they
    /// count as configuration errors; resource errors keep their own class.
    pub fn from_core(module: &'static str, source: bvl_core::Error) -> Self {
        match source {
            bvl_core::Error::Resource(_) => CliError::Resource { module, source },
            bvl_core::Error::Domain(_) | bvl_core::Error::Admissibility { .. } => {
                CliError::Config(vec![format!("{module}: {source}")])
            }
            _ => CliError::Numeric { module, source },
        }
    }

    /// Wraps an I/O error with the path or action involved.
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 numeric accuracy, 4 resource, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Resource { .. } => 4,
            CliError::Io { .. } | CliError::Format(_) => 1,
        }
    }
}

/// Result alias of the driver.
pub type CliResult<T> = std::result::Result<T, CliError>;

/// Adapter that tags library errors with a module name.
pub(crate) trait Tagged<T> {
    fn tag(self, module: &'static str) -> CliResult<T>;
}

impl<T> Tagged<T> for bvl_core::Result<T> {
    fn tag(self, module: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::from_core(module, e))
    }
}
