//! Error type shared by all solver components.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical or numerical parameter violated its domain (e.g. non-positive
    /// density, temperature, step size or relaxation time).
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// Generic precondition violation with a human-readable description.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// An operation requiring real eigenvalues met a complex pair.
    #[error("complex eigenvalue {re}{im:+}i encountered in {context}")]
    ComplexEigenvalue {
        re: f64,
        im: f64,
        context: &'static str,
    },

    /// The dense eigenvalue solver did not converge or hit a degenerate case.
    #[error("eigenvalue computation failed: {0}")]
    EigenSolver(String),

    /// Dense eigensolves are refused above a size guard.
    #[error("dense eigensolve refused: problem size {size} exceeds guard {guard}")]
    SizeGuard { size: usize, guard: usize },

    /// A NaN or infinity appeared in a state field.
    #[error("non-finite value in component {component} of cell {cell}")]
    NonFiniteField { cell: usize, component: usize },

    /// Time integrator parameters violate the scheme's constraints.
    #[error("integrator configuration invalid: {0}")]
    IntegratorConfig(String),

    /// A time-marching run aborted; carries the failing time and location.
    #[error("simulation aborted at t={time} (step {step}): non-finite value in component {component} of cell {cell}")]
    SimulationAborted {
        time: f64,
        step: usize,
        cell: usize,
        component: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
