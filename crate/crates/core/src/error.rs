use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure broke down (root finding, quadrature, linear solve).
    #[error("solver error: {0}")]
    Solver(String),

    /// The nonlinear iteration of a time step hit its iteration cap.
    #[error(
        "nonlinear iteration did not converge after {iterations} iterations \
         (last update {last_update:.3e}, residual {residual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_update: f64,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// A failed step inside a simulation run.
    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    /// Invalid run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error (or the step error it wraps) is a nonlinear non-convergence.
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } => true,
            Error::Step { source, .. } => source.is_non_convergence(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
