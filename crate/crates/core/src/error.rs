use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A computation produced NaN/Inf or otherwise broke down.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
