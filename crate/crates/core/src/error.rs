use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("field elements from different moduli ({0} vs {1})")]
    ModulusMismatch(u32, u32),
    #[error("inversion of zero")]
    InverseOfZero,
    #[error("invalid evaluation points: {0}")]
    InvalidPoints(String),
    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("register of {amps} amplitudes exceeds the ceiling of {limit}")]
    TooLarge { amps: u128, limit: u128 },
    #[error("wire {0} out of range")]
    WireOutOfRange(usize),
    #[error("wires must be distinct")]
    WireCollision,
    #[error("Fourier parameter r must be nonzero")]
    ZeroFourierParameter,
    #[error("measurement branch has zero norm")]
    ZeroNormBranch,
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("malformed key string: {0}")]
    KeyFormat(String),
}

pub type Result<T> = core::result::Result<T, Error>;
