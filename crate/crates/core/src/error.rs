use thiserror::Error;

/// Failure modes shared by every engine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability f = {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("window overflow: the walk needs half-width {needed} but the lattice window is {window}")]
    WindowOverflow { needed: usize, window: usize },

    #[error("n_traj must be at least 1 (got {0})")]
    InvalidTrajectoryCount(usize),

    #[error("non-finite integrand value at (k, p) = ({k}, {p})")]
    NonFinite { k: f64, p: f64 },

    #[error("I - M is numerically singular at (k, p) = ({k}, {p}) (condition number {cond:e}); change grid_n or use finite-time moments")]
    SingularResolvent { k: f64, p: f64, cond: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {0:e} < -1e-8")]
    NotPositive(f64),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(f))
    }
}
