use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A numerical procedure failed to reach its tolerance.
    #[error("evaluation error in {func}: {detail}")]
    Evaluation { func: &'static str, detail: String },

    /// A system description violates one of its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// The expanded term count of a model exceeds the guardrail.
    #[error("expansion too large: {terms} terms for {params} (limit {limit})")]
    TooManyTerms {
        terms: u64,
        limit: u64,
        params: String,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A simulation ran out of its wall-clock budget.
    #[error("simulation stopped after {completed} of {requested} trials (time limit)")]
    Partial { completed: u64, requested: u64 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn eval(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Evaluation {
            func,
            detail: detail.into(),
        }
    }
}
