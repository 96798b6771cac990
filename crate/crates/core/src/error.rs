use alloc::boxed::Box;
use alloc::string::String;

use crate::solvers::SolveReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("division by the zero Laurent series")]
    DivisionByZero,

    #[error("quadrature did not reach tolerance at moment k={k}, i={i}, j={j} (discrepancy {discrepancy:e})")]
    NumericalFailure {
        k: usize,
        i: usize,
        j: usize,
        discrepancy: f64,
    },

    #[error("quadrature tolerance {tol:e} unattainable (estimated error {estimate:e})")]
    QuadratureTolerance { tol: f64, estimate: f64 },

    #[error("matrix is numerically singular (pivot column {column})")]
    SingularMatrix { column: usize },

    #[error("Newton Jacobian is singular at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("fixed-point iterate collapsed to zero at iteration {iteration}")]
    DegenerateIterate { iteration: usize },

    #[error("iteration did not converge within {} iterations (last residual {:e})", .0.iterations, .0.residual_inf)]
    NotConverged(Box<SolveReport>),

    #[error("Newton iteration diverged at iteration {iteration} (|x| = {norm:e})")]
    Diverged { iteration: usize, norm: f64 },

    #[error("moment matrix is ill-conditioned (condition number {cond:e} exceeds {limit:e})")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("root has zero mass (m_0 = {mass:e}); only unit-mass densities are admissible")]
    SpuriousBranch { mass: f64 },

    #[error("re-expansion error {error:e} exceeds tolerance {tol:e}")]
    TruncationTooCoarse { error: f64, tol: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
