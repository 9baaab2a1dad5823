use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration rejected:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("resource cap exceeded: {what} needs {needed} (cap {cap})")]
    Resource {
        what: &'static str,
        needed: u64,
        cap: u64,
    },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("operator is not invertible: {0}")]
    NonTransient(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Config(_) | Error::Structural(_) => 2,
            Error::Resource { .. } => 3,
            Error::NonTransient(_) | Error::Numeric(_) => 4,
            Error::Io(_) => 1,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Size limits applied before any large allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ResourceCaps {
    pub max_vertices: u64,
    pub max_unknowns: u64,
    /// Largest factor (nonzeros of L) accepted before switching to conjugate gradients.
    pub max_factor_nnz: u64,
}

impl Default for ResourceCaps {
    fn default() -> Self {
        ResourceCaps {
            max_vertices: 2_000_000,
            max_unknowns: 1_000_000,
            max_factor_nnz: 30_000_000,
        }
    }
}

impl ResourceCaps {
    /// Defaults overridden by `GSC_MAX_VERTICES`, `GSC_MAX_UNKNOWNS` and `GSC_MAX_FACTOR_NNZ`.
    pub fn from_env() -> Self {
        let mut caps = ResourceCaps::default();
        let read = |name: &str| std::env::var(name).ok().and_then(|v| v.trim().parse::<u64>().ok());
        if let Some(v) = read("GSC_MAX_VERTICES") {
            caps.max_vertices = v;
        }
        if let Some(v) = read("GSC_MAX_UNKNOWNS") {
            caps.max_unknowns = v;
        }
        if let Some(v) = read("GSC_MAX_FACTOR_NNZ") {
            caps.max_factor_nnz = v;
        }
        caps
    }

    pub(crate) fn check(&self, what: &'static str, needed: u64, cap: u64) -> Result<()> {
        if needed > cap {
            Err(Error::Resource { what, needed, cap })
        } else {
            Ok(())
        }
    }
}
