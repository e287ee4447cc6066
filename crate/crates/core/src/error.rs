use thiserror::Error;

/// Everything that can go wrong while evaluating a formula or running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pole of the Laplace exponent at theta = {theta}")]
    Pole { theta: f64 },

    #[error("transform tilt u = {u} must stay below Phi(q+lambda) = {phi}")]
    TransformPole { u: f64, phi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("draw-down function violates xi(x) < x at x = {x} (xi = {xi})")]
    DomainViolation { x: f64, xi: f64 },

    #[error("scale function vanishes at the draw-down gap (x = {x})")]
    BoundaryEval { x: f64 },

    #[error("integral diverges: {0}")]
    IntegralDivergence(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("tail truncation failed: reached {upper} with increment {increment:e}")]
    TruncationFailure { upper: f64, increment: f64 },

    #[error("{censored} of {total} paths hit the time horizon")]
    CensoringExcess { censored: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
