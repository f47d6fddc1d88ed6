use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("non-local operator `{0}` cannot be evaluated pointwise")]
    NonLocal(String),

    #[error("exponent {exponent} is not on the ladder alpha + m (alpha = {alpha})")]
    OffLadder { exponent: f64, alpha: f64 },

    #[error("invalid Lagrangian: {0}")]
    InvalidLagrangian(String),

    #[error("singular Legendre transform: {0}")]
    SingularLegendre(String),

    #[error("Lagrangian is not quadratic: {0}")]
    NonQuadratic(String),

    #[error("invalid boundary data: {0}")]
    Boundary(String),

    #[error("singular system (resonance): {0}")]
    Singular(String),

    #[error("system too large: {unknowns} unknowns exceeds the limit of {limit}")]
    TooLarge { unknowns: usize, limit: usize },

    #[error("quadratic form is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short stable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::Syntax { .. } => "syntax",
            Error::UnknownIdentifier { .. } => "unknown_identifier",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::UnboundVariable(_) => "unbound_variable",
            Error::DivisionByZero => "division_by_zero",
            Error::NonLocal(_) => "non_local",
            Error::OffLadder { .. } => "off_ladder",
            Error::InvalidLagrangian(_) => "invalid_lagrangian",
            Error::SingularLegendre(_) => "singular_legendre",
            Error::NonQuadratic(_) => "non_quadratic",
            Error::Boundary(_) => "boundary",
            Error::Singular(_) => "singular",
            Error::TooLarge { .. } => "too_large",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::Unsupported(_) => "unsupported",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status: 2 configuration, 3 derivation, 4 singular system.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::IndexOutOfRange(_)
            | Error::UnboundVariable(_)
            | Error::DivisionByZero
            | Error::NonLocal(_)
            | Error::OffLadder { .. }
            | Error::InvalidLagrangian(_)
            | Error::SingularLegendre(_)
            | Error::NonQuadratic(_) => 3,
            Error::Singular(_) | Error::NotPositiveDefinite(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
