use thiserror::Error;

use crate::exponent::Exponent;

/// Errors raised by the series engine, the kernel catalog, the operators and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nonpositive exponent {0} (atoms must have exponent > 0)")]
    NonPositiveExponent(Exponent),

    #[error("malformed exponent: {0}")]
    MalformedExponent(String),

    #[error("exponent overflow")]
    ExponentOverflow,

    #[error("singular at origin")]
    SingularAtOrigin,

    #[error("unsupported convolution power {0}")]
    UnsupportedConvolutionPower(usize),

    #[error("derivative leaves C-1: exponent {exponent} differentiated {order} times")]
    DerivativeLeavesDomain { exponent: Exponent, order: usize },

    #[error("projector singular at origin: exponent {exponent} blocks the order-{order} derivative at 0")]
    ProjectorSingular { exponent: Exponent, order: usize },

    #[error("order out of range: alpha = {alpha} is not in (n-1, n) for n = {n}")]
    OrderOutOfRange { alpha: Exponent, n: u32 },

    #[error("no associate in C-1,0: leading exponent {leading} is not in (n-1, n) for n = {n}")]
    NoAssociate { leading: Exponent, n: u32 },

    #[error("non-lattice kernel unsupported")]
    NonLatticeKernel,

    #[error("not an L_n pair: {}", .0.join("; "))]
    NotLnPair(Vec<String>),

    #[error("root finding failed (residual {residual:.3e})")]
    RootFindingFailed { residual: f64 },

    #[error("improper rational operator: deg Q = {num} > deg P = {den}")]
    ImproperRational { num: usize, den: usize },

    #[error("not a differential equation: the operator polynomial has degree 0")]
    NotDifferentialEquation,

    #[error("bare identity part outside the constant-extraction pattern")]
    BareIdentity,

    #[error("non-integrable singularity: exponent {0} <= -1")]
    NonIntegrableSingularity(f64),

    #[error("iteration {index}: {source}")]
    Iteration { index: usize, source: Box<Error> },

    #[error("solution formulas disagree: {0}")]
    FormulaMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
