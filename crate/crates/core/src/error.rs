use thiserror::Error;

/// Everything that can go wrong in the model, the solvers or the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OmitError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("singular response at delta = {delta:e} rad/s")]
    SingularResponse { delta: f64 },

    #[error("no real Coulomb coupling: |G| = {g_mag:e} is below sqrt(2)*kappa = {threshold:e}")]
    NoRealCoupling { g_mag: f64, threshold: f64 },

    #[error("bright/dark decomposition undefined for lambda = 0")]
    DegenerateModes,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("no feasible frequency ratio in [{lo}, {hi}]")]
    NoFeasibleRatio { lo: f64, hi: f64 },

    #[error("invalid step dt = {dt:e}: must not exceed {max:e}")]
    InvalidStep { dt: f64, max: f64 },

    #[error("integration diverged at t = {time:e}")]
    Divergence { time: f64 },
}

pub type Result<T> = std::result::Result<T, OmitError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> OmitError {
    OmitError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
