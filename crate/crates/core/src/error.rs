//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("mismatched ramification: {0} vs {1}")]
    MismatchedRamification(u32, u32),
    #[error("exponent {0} not representable with ramification {1}")]
    BadExponent(String, u32),
    #[error("sector mismatch: {0}")]
    SectorMismatch(String),
    #[error("indeterminate residue: window {0} does not cover exponent -1")]
    IndeterminateResidue(String),
    #[error("insufficient window: {0}")]
    InsufficientWindow(String),
    #[error("inner series must have strictly positive leading exponent")]
    NonPositiveInner,
    #[error("leading coefficient must be nonzero")]
    ZeroLeadingCoefficient,
    #[error("coordinate change is not unipotent")]
    NotUnipotent,
    #[error("scaling not representable: {0}")]
    ScalingNotRepresentable(String),
    #[error("state is not primary: {0}")]
    NotPrimary(String),
    #[error("unsupported group: only Z/2 is implemented")]
    UnsupportedGroup,
    #[error("critical level k = -2 rejected: Sugawara grading needs k != -h^vee")]
    CriticalLevel,
    #[error("pole order exceeds window at {0}")]
    PoleOrderExceedsWindow(String),
    #[error("principal part at a branch point is unsupported")]
    BranchPrincipalPart,
    #[error("fiber point is irrational: s = {0} has no rational square root")]
    IrrationalFiberPoint(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("memory guard exceeded: {0}")]
    MemoryGuard(String),
}
