use alloc::string::String;

use crate::model::ValidationReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("bad sampling bounds: {0}")]
    BadBounds(String),
    #[error("plan does not match instance/scenarios: {0}")]
    StructureMismatch(String),
    #[error("instance failed validation: {0}")]
    ValidationFailed(ValidationReport),
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("scenario {scenario} has no feasible recourse")]
    ScenarioInfeasible { scenario: usize },
    #[error("problem is infeasible")]
    Infeasible,
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("exhaustive search over {machines} machines exceeds the limit of {limit}")]
    TooLarge { machines: usize, limit: usize },
    #[error("branch-and-bound node limit reached")]
    NodeLimit,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("every random draw was infeasible ({trials} trials)")]
    AllInfeasible { trials: usize },
    #[error("bad argument: {0}")]
    BadArgument(String),
}

impl Error {
    /// True for errors caused by solver work limits rather than the input.
    pub fn is_limit(&self) -> bool {
        matches!(self, Error::NodeLimit | Error::IterationLimit)
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible | Error::ScenarioInfeasible { .. } | Error::AllInfeasible { .. }
        )
    }
}
