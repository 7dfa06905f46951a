use thiserror::Error;

use crate::kernel::Site;

#[derive(Debug, Error)]
pub enum Error {
    /// Index or ownership mismatch between operands.
    #[error("structural error: {0}")]
    Structural(String),

    /// A uniform-discreteness violation: two distinct sites closer than `alpha`.
    #[error("uniform discreteness violated: sites {x} and {y} at distance {dist} < {alpha}")]
    UniformDiscreteness {
        x: Site,
        y: Site,
        dist: f64,
        alpha: f64,
    },

    #[error("metric axiom violated: {0}")]
    MetricAxiom(String),

    /// A window or margin too small for the requested radius.
    #[error("range error: {0}")]
    Range(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A monotonicity audit failed beyond the certification widths.
    #[error("audit failure at (R={radius}, L={window}): {detail}")]
    Audit {
        radius: f64,
        window: i64,
        detail: String,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
