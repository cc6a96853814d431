use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate inertia along axis {axis}: rho*m - rho_f^2 = {delta:e}")]
    DegenerateInertia { axis: usize, delta: f64 },

    #[error("singular stiffness: condition number {condition:e}")]
    SingularStiffness { condition: f64 },

    #[error("inverted cell at {index:?}: volume {volume:e}")]
    InvertedCell { index: [usize; 3], volume: f64 },

    #[error("eigendecomposition failed for material {material} along {direction:?}")]
    DecompositionFailed { material: String, direction: [f64; 3] },

    #[error("interface solve failed at face {face}: {reason}")]
    InterfaceSolveFailed { face: String, reason: String },

    #[error("ambiguous wave family: {0}")]
    AmbiguousFamily(String),

    #[error("surface normal {0:?} is antiparallel to the z axis")]
    AntiparallelNormal([f64; 3]),

    #[error("non-finite state at step {step}, cell {cell:?}")]
    NonFinite { step: usize, cell: [usize; 3] },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid case id {0} (expected 0..=35)")]
    InvalidCase(usize),

    #[error("case {case}: {source}")]
    Case {
        case: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
