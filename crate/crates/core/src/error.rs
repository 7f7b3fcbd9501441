use std::fmt;

/// Failure of a single simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergedPath {
    pub path: usize,
    pub step: usize,
    pub t: f64,
    pub x: f64,
    pub a: f64,
    pub b: f64,
}

impl fmt::Display for DivergedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "path {} step {} (t={}, x={}, a={}, b={})",
            self.path, self.step, self.t, self.x, self.a, self.b
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("normalization constant did not converge, last bracket [{lo}, {hi}]")]
    Normalization { lo: f64, hi: f64 },

    #[error("quadrature on [{a}, {b}] did not reach tolerance (estimate {estimate}, error {error})")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("heat kernel has unbounded support")]
    UnboundedSupport,

    #[error("interpretation {interpretation} does not apply to {family}")]
    Incompatible {
        interpretation: String,
        family: String,
    },

    #[error("admissibility violated at {} points, first (t, x, f + a u) = {:?}", .0.len(), .0.first())]
    Admissibility(Vec<(f64, f64, f64)>),

    #[error("{} paths diverged, first: {}", .0.len(), .0[0])]
    Diverged(Vec<DivergedPath>),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
