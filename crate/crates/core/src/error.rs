use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are grouped by [`Error::class`]: guard and certificate failures
/// mean the inputs are outside the regime where the theory applies, while
/// numerical failures mean an algorithm did not deliver its accuracy target.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation overflowed at z = {re} + {im}i")]
    Overflow { re: f64, im: f64 },

    #[error("root too close to contour boundary: min |P| = {min_abs:e} at {re} + {im}i")]
    BoundaryRoot { min_abs: f64, re: f64, im: f64 },

    #[error("winding integral {value} is not within 0.25 of an integer")]
    NonIntegerWinding { value: f64 },

    #[error("Newton continuation failed to converge at r = {r}")]
    NewtonDivergence { r: f64 },

    #[error("continued root {value} left the strip [{lo}, {hi}] at r = {r}")]
    StripEscape { r: f64, value: f64, lo: f64, hi: f64 },

    #[error("root is degenerate: |P'(eta)| = {derivative:e}")]
    DegenerateRoot { derivative: f64 },

    #[error("characteristic function nearly vanishes on the contour: |P| = {min_abs:e}")]
    PoleOnContour { min_abs: f64 },

    #[error("frequency truncation failed: required cutoff {cutoff:e} exceeds limit")]
    TruncationFailure { cutoff: f64 },

    #[error("missing certificate: {0}")]
    MissingCertificate(String),

    #[error("grid too coarse for shifted arguments: dt = {dt} > r/2 = {half_r}")]
    GridTooCoarse { dt: f64, half_r: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("profile component {component} leaves [0, K] at t = {t}: value {value}")]
    RangeViolation { component: usize, t: f64, value: f64 },

    #[error("ordering violated at step {step}, component {component}, t = {t}: {detail}")]
    OrderingViolation {
        step: usize,
        component: usize,
        t: f64,
        detail: String,
    },

    #[error("no convergence after {iterations} iterations (last delta {last_delta:e})")]
    NoConvergence { iterations: usize, last_delta: f64 },

    #[error("guard violated: {0}")]
    GuardViolation(String),

    #[error("root ordering violated: {0}")]
    RootOrderViolation(String),

    #[error("CFL condition violated: dtime = {dtime} > {limit}")]
    CflViolation { dtime: f64, limit: f64 },

    #[error("history buffer cannot supply delayed values: {0}")]
    HistoryUnderflow(String),

    #[error("solution left the finite range (blow-up) at t = {t}")]
    BlowUp { t: f64 },

    #[error("no K/2 crossing recorded")]
    NoFront,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Inputs violate a hypothesis or a runtime certificate.
    Guard,
    /// A numerical method failed to reach its target.
    Numerical,
    /// Reading or writing files failed.
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Domain(_)
            | BoundaryRoot { .. }
            | MissingCertificate(_)
            | GuardViolation(_)
            | RootOrderViolation(_)
            | CflViolation { .. }
            | GridTooCoarse { .. }
            | RangeViolation { .. } => ErrorClass::Guard,
            Io(_) | Json(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
