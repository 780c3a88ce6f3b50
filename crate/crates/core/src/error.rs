use thiserror::Error;

/// Errors surfaced by mesh construction, the schemes and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Time step violates the stability restriction of an explicit scheme.
    /// `ratio` is the realized Courant number, which must not exceed 1.
    #[error("CFL condition violated: courant number {ratio:.6} > 1 (dt = {dt:e}, limit dt = {limit:e})")]
    Cfl { ratio: f64, dt: f64, limit: f64 },

    #[error("tridiagonal solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn cfl(dt: f64, limit: f64) -> Self {
        Error::Cfl {
            ratio: dt / limit,
            dt,
            limit,
        }
    }
}

/// Relative slack allowed on stability checks, so that an exactly critical
/// Courant number is not rejected because of the last bit of a division.
pub(crate) const CFL_ROUNDOFF: f64 = 1e-12;

pub(crate) fn check_cfl(dt: f64, limit: f64) -> Result<()> {
    if dt > limit * (1.0 + CFL_ROUNDOFF) {
        Err(Error::cfl(dt, limit))
    } else {
        Ok(())
    }
}
