use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("cannot assign {n} samples to {c} classes with at least one sample each")]
    InfeasibleCounts { n: u64, c: usize },
    #[error("cannot split {c} classes into {groups} non-empty groups")]
    InfeasiblePartition { c: usize, groups: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("argument {x} is below the branch point -1/e of the principal Lambert W branch")]
    LambertDomain { x: f64 },
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("class subset too small: {got} classes, need at least {need}")]
    SubsetTooSmall { got: usize, need: usize },
    #[error("duplicate index {0} in class subset")]
    DuplicateIndex(usize),
    #[error("no viable step size: every candidate run diverged")]
    NoViableStepSize,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
