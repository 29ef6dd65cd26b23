/// Error type shared by the whole crate.
///
/// `Parameter` means the caller handed us an invalid configuration (maps to a
/// config error at the CLI). `Contract` means a precondition or internal
/// invariant was violated at runtime (maps to a runtime failure at the CLI).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn contract_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
