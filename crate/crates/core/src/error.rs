use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms: {what}")]
    Convergence { what: &'static str, terms: usize },

    #[error("non-finite result in {0}")]
    NonFinite(&'static str),

    #[error("vanishing expectation value <E_{0}>")]
    DegenerateExpectation(usize),

    #[error("no stationary point found: {0}")]
    NoSaddle(String),

    #[error("singular Hessian at stationary point (|det| = {0:e})")]
    DegenerateSaddle(f64),

    #[error("peak search did not converge: {0}")]
    NoPeak(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("quadrature accuracy error: {0}")]
    Accuracy(String),

    #[error("derivative audit failed for {what}: analytic {analytic:e}, finite difference {numeric:e}")]
    DerivativeAudit {
        what: String,
        analytic: f64,
        numeric: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
