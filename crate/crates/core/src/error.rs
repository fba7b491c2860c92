use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (‖M − M†‖_F = {defect:.3e})")]
    NotHermitian { defect: f64 },

    /// Two eigenvalues are too close to decide whether they belong to the same
    /// eigenspace at the configured grouping tolerance.
    #[error("ambiguous degeneracy: eigenvalues {lower} and {upper} are separated by {gap:.3e}, within the guard band {guard:.3e}")]
    DegeneracyAmbiguity {
        lower: f64,
        upper: f64,
        gap: f64,
        guard: f64,
    },

    #[error("state is not normalized (‖φ‖ = {norm})")]
    Normalization { norm: f64 },

    #[error("cannot collapse onto an outcome of probability {probability:.3e}")]
    ZeroProbabilityCollapse { probability: f64 },

    #[error("basis error: {0}")]
    Basis(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by a numerically unsafe configuration rather
    /// than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegeneracyAmbiguity { .. } | Error::ZeroProbabilityCollapse { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
