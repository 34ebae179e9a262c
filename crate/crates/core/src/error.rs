use thiserror::Error;

/// Errors surfaced by the analysis and integration routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),

    #[error("dissipativity bound undefined: rho1 = rho2 = 0 degenerates the weight function")]
    BoundUndefined,

    #[error("nullcline pole at {axis} = {location}")]
    NullclinePole { axis: &'static str, location: f64 },

    #[error("no critical point: {0}")]
    NoCriticalPoint(String),

    #[error("eigenvalue iteration did not converge within {0} iterations")]
    EigenvalueFailure(usize),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("integration stalled near t = {t}: step {h} below underflow threshold")]
    Stiffness { t: f64, h: f64 },

    #[error("state diverged near t = {t}")]
    Divergence { t: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
