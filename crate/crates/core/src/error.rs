use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("implicit solve did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergedImplicitSolve { iters: usize, residual: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("inverse gradient unavailable: {0}")]
    MissingInverse(&'static str),
    #[error("step too large: {0}")]
    StepTooLarge(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("energy tail is not monotone at sample {index}")]
    NonMonotoneTail { index: usize },
    #[error("component {index} is not positive ({value:e})")]
    NonPositiveState { index: usize, value: f64 },
    #[error("positivity lost at component {index} after {halvings} halvings")]
    PositivityLost { index: usize, halvings: usize },
    #[error("tau {tau} exceeds the admissible bound {bound}")]
    TauTooLarge { tau: f64, bound: f64 },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("outer S iteration stalled after {0} iterations")]
    SFixedPointStalled(usize),
    #[error("kernel periodization tail not below tolerance after {images} images")]
    TailNotConverged { images: usize },
    #[error("kernel spectrum not positive at mode {mode} ({value:e})")]
    SpectrumNonPositive { mode: usize, value: f64 },
    #[error("degenerate denominator in scaling factor")]
    DegenerateDenominator,
    #[error("delta {delta} must be below the constant state {ubar}")]
    DeltaTooLarge { delta: f64, ubar: f64 },
    #[error("CFL step stalled at {0:e}")]
    CflStall(f64),
    #[error("iteration diverged: {0}")]
    Diverged(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown registry entry `{0}`")]
    UnknownEntry(String),
    #[error("malformed registry spec: {0}")]
    BadSpec(String),
}

pub(crate) fn ensure_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
