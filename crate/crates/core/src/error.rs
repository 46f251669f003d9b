use thiserror::Error;

/// Errors raised by the spectral toolchain.
///
/// Variants map onto the failure classes the CLI distinguishes: argument and
/// file problems (`Config`, `Parse`, `Io`) are usage errors, everything else
/// is a numerical or domain failure.
#[derive(Debug, Error)]
pub enum WeylError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("rank deficient: depth {depth} exceeds the {atoms} atoms of the measure")]
    RankDeficient { depth: usize, atoms: usize },

    #[error("integration failed at x = {x}: {msg}")]
    Integration { x: f64, msg: String },

    #[error("found only {} of {requested} eigenvalues below the search ceiling {ceiling}", found.len())]
    IncompleteEigenvalues {
        found: Vec<f64>,
        requested: usize,
        ceiling: f64,
    },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    #[error("march diverged at x = {x_reached}: |A| exceeded {bound}")]
    Divergence { x_reached: f64, bound: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("upstream data error: {0}")]
    UpstreamData(String),

    #[error("grid too coarse: {0}")]
    RefinementNeeded(String),
}

impl WeylError {
    pub fn domain(msg: impl Into<String>) -> Self {
        WeylError::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        WeylError::Config(msg.into())
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            WeylError::Config(_) | WeylError::Parse { .. } | WeylError::Io { .. }
        )
    }
}

pub type Result<T, E = WeylError> = std::result::Result<T, E>;
