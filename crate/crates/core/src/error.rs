use alloc::boxed::Box;
use alloc::string::String;

use crate::flow::FlowState;

/// Errors produced by the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A piecewise-constant function or grid signal violates its invariants.
    #[error("invalid function: {0}")]
    Invalid(String),
    /// Two functions that must share an interval do not.
    #[error("domain mismatch: ({0}, {1}) vs ({2}, {3})")]
    DomainMismatch(f64, f64, f64, f64),
    /// The kernel does not satisfy the strengthened subadditivity (K2) on `[0, M]`.
    #[error("condition (K2) fails on [0, {range}]: grid infimum of the ratio is {infimum:e}")]
    ConditionK2Fails { range: f64, infimum: f64 },
    /// Monotone data was required.
    #[error("data is not monotone on [{0}, {1}]")]
    NonMonotone(f64, f64),
    /// The operation cannot handle a problem of this size.
    #[error("problem too large: {0}")]
    TooLarge(String),
    /// Invalid solver configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A non-finite value appeared while time stepping. `last` is the last finite state.
    #[error("solver diverged at step {step} (t = {t})")]
    Divergence {
        step: usize,
        t: f64,
        last: Box<FlowState>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain_err {
    ($($arg:tt)*) => {
        $crate::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain_err;
