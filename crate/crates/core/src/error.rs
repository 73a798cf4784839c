use std::fmt;

/// Parameter inequality whose failure puts a problem outside the solvable regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Inequality {
    /// beta1 > 0
    Beta1Positive,
    /// beta2 > 0
    Beta2Positive,
    /// beta' > -sqrt(beta1 beta2)
    BoundedBelow,
    /// beta1 beta2 > beta'^2
    CrossCouplingBound,
    /// beta' > alpha (single-condensate regime)
    CrossExceedsAlpha,
    /// alpha > 0 (single-condensate regime)
    AlphaPositive,
    /// alpha > beta' (two-condensate regime)
    AlphaExceedsCross,
    /// beta1 beta2 > beta' alpha (two-condensate regime, A^2 > 0)
    FirstVevPositive,
    /// alpha >= beta' (closed-form vacuum potential)
    AlphaAtLeastCross,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::Beta1Positive => "beta1 > 0",
            Inequality::Beta2Positive => "beta2 > 0",
            Inequality::BoundedBelow => "beta' > -sqrt(beta1*beta2)",
            Inequality::CrossCouplingBound => "beta1*beta2 > beta'^2",
            Inequality::CrossExceedsAlpha => "beta' > alpha",
            Inequality::AlphaPositive => "alpha > 0",
            Inequality::AlphaExceedsCross => "alpha > beta'",
            Inequality::FirstVevPositive => "beta1*beta2 > beta'*alpha",
            Inequality::AlphaAtLeastCross => "alpha >= beta'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("regime violation: {0} does not hold")]
    RegimeViolation(Inequality),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("existence condition radicand is non-positive ({radicand:e})")]
    RadicandNonpositive { radicand: f64 },

    #[error("invalid shooting parameter {param}: {reason}")]
    InvalidShoot { param: f64, reason: String },

    #[error("step size underflow at r = {r:e} (h = {h:e}), last state {state:?}")]
    StepUnderflow { r: f64, h: f64, state: [f64; 4] },

    #[error("shot cannot be classified: {0}")]
    Unclassifiable(String),

    #[error("no bracket found for {kind}: {reason}")]
    BracketNotFound { kind: String, reason: String },

    #[error("tolerance not reached in {what}: {detail}")]
    ToleranceNotReached { what: String, detail: String },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration diverged; residual trail {trail:?}")]
    NewtonDiverged { trail: Vec<f64> },

    #[error("grid too coarse: {points} points")]
    GridTooCoarse { points: usize },

    #[error("fit window too narrow: {points} points")]
    WindowTooNarrow { points: usize },

    #[error("tail already within the noise floor of its asymptote")]
    TailBelowNoiseFloor,

    #[error("boundary violation: {0}")]
    BoundaryViolation(String),

    #[error("gradient flow unstable at step {step} (dt = {dt:e})")]
    StabilityViolation { step: usize, dt: f64 },

    #[error("comparison window is empty")]
    EmptyWindow,

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RegimeViolation(_) => "RegimeViolation",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::RadicandNonpositive { .. } => "RadicandNonpositive",
            Error::InvalidShoot { .. } => "InvalidShoot",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::Unclassifiable(_) => "Unclassifiable",
            Error::BracketNotFound { .. } => "BracketNotFound",
            Error::ToleranceNotReached { .. } => "ToleranceNotReached",
            Error::PreconditionViolation(_) => "PreconditionViolation",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::WindowTooNarrow { .. } => "WindowTooNarrow",
            Error::TailBelowNoiseFloor => "TailBelowNoiseFloor",
            Error::BoundaryViolation(_) => "BoundaryViolation",
            Error::StabilityViolation { .. } => "StabilityViolation",
            Error::EmptyWindow => "EmptyWindow",
            Error::Usage(_) => "Usage",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
