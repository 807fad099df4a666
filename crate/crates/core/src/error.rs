use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds a simulator capacity (qubit cap, enumeration budget).
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A caller-supplied guarantee (norm certificate, sup-norm bound) does not hold.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
macro_rules! capacity {
    ($($arg:tt)*) => { $crate::error::Error::Capacity(format!($($arg)*)) };
}
macro_rules! contract {
    ($($arg:tt)*) => { $crate::error::Error::Contract(format!($($arg)*)) };
}
pub(crate) use {capacity, contract, domain};
