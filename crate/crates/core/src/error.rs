use thiserror::Error;

/// Everything that can go wrong in the pipeline. Variants that name a
/// oracle mean the computation itself contradicted a claimed
/// identity; they are never recoverable by retrying.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid tower: {0}")]
    InvalidTower(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Witt vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("Witt truncation length {0} exceeds the supported maximum of 4")]
    WittLengthTooLarge(usize),

    #[error("exact division failed: {0}")]
    NotDivisible(String),

    #[error("integrality of L* violated at coefficient {n}: {detail}")]
    NonIntegralCoefficient { n: usize, detail: String },

    #[error("degree oracle violated: coefficient c_{n} is nonzero beyond degree {degree}")]
    DegreeOracle { n: usize, degree: usize },

    #[error("endpoint oracle violated: ord_q(c_{degree}) = {found}, expected {expected}")]
    EndpointOracle {
        degree: usize,
        found: String,
        expected: String,
    },

    #[error("L* is not divisible by (1 - psi(Frob_0) s): {0}")]
    FrobeniusFactor(String),

    #[error("decay bound violated: {0}")]
    DecayBound(String),

    #[error("matrix truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("precision certificate failed: {0}")]
    Certificate(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("Newton polygon needs the anchor point (0, 0)")]
    MissingAnchor,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidTower(_) => "invalid_tower",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::WittLengthTooLarge(_) => "witt_length_too_large",
            Error::NotDivisible(_) => "not_divisible",
            Error::NonIntegralCoefficient { .. } => "non_integral_coefficient",
            Error::DegreeOracle { .. } => "degree_oracle",
            Error::EndpointOracle { .. } => "endpoint_oracle",
            Error::FrobeniusFactor(_) => "frobenius_factor",
            Error::DecayBound(_) => "decay_bound",
            Error::TruncationTooSmall(_) => "truncation_too_small",
            Error::Certificate(_) => "certificate",
            Error::Internal(_) => "internal",
            Error::MissingAnchor => "missing_anchor",
        }
    }

    /// Bad input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidTower(_) | Error::InvalidArgument(_) | Error::TruncationTooSmall(_)
        )
    }
}
