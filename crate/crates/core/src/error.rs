use thiserror::Error;

/// Errors raised by model construction, analysis and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A time program was evaluated outside its (non-periodic) domain.
    #[error("time {t} outside program domain [{start}, {end}]")]
    Domain { t: f64, start: f64, end: f64 },

    /// Input data violates a structural invariant (shape, ordering, connectivity...).
    #[error("invalid structure: {0}")]
    Structural(String),

    /// The dissipation restricted to rigid translations is not coercive.
    #[error("dissipation is not coercive along rigid translations at t = {t}")]
    NonCoercive { t: f64 },

    /// Exhaustive subset enumeration would be too large.
    #[error("exhaustive subset test over {n} points exceeds the limit of {limit}")]
    Combinatorial { n: usize, limit: usize },

    /// The initial state does not satisfy the stress admissibility condition.
    #[error("initial state is not admissible (margin {margin:.3e})")]
    Inadmissible { margin: f64 },

    /// The closed-form result requires the uniqueness condition, which fails here.
    #[error("uniqueness condition violated: {0}")]
    UniquenessViolation(String),

    /// Parameters sit exactly on a regime boundary of a closed-form result.
    #[error("parameters on regime boundary: {0}")]
    RegimeBoundary(String),

    /// A stress vector is outside the stasis box where membership is required.
    #[error("stress outside the stasis domain by {excess:.3e}")]
    OutsideDomain { excess: f64 },

    /// Fatal solver failure.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
