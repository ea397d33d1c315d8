use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("critical point near y = {location:.6} has order above the declared maximum {declared}")]
    OrderTooHigh { location: f64, declared: usize },

    #[error("critical points at {a:.6} and {b:.6} are closer than 4σ♯ = {min_separation:.6}")]
    CriticalPointsTooClose { a: f64, b: f64, min_separation: f64 },

    #[error("degenerate critical point at {location:.6} (order {order}); a non-degenerate point is required")]
    DegenerateCriticalPoint { location: f64, order: usize },

    #[error("wave speeds b(γ) are not distinct: {0:.6}")]
    RepeatedWaveSpeed(f64),

    #[error("y = {y:.6} lies in the interpolation annulus of the critical point at {gamma:.6}")]
    AmbiguousRegime { y: f64, gamma: f64 },

    #[error("matrix is singular or nearly singular ({0})")]
    Singular(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("homogeneous negative-order norm needs a mean-zero field (|f̂(0)| = {0:.3e})")]
    NonZeroMean(f64),

    #[error("fit window rejected: {0}")]
    BadWindow(String),

    #[error("projection invalid: |∫φ²| = {0:.3e} is too small")]
    NearDefective(f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("boundary-layer contamination: {0:.3e} of the mass lies near the truncation ends")]
    BoundaryContamination(f64),

    #[error("coefficient overflow in Hermite expansion (index {0})")]
    CoefficientOverflow(usize),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
