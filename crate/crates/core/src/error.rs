use thiserror::Error;

use crate::data::NodeId;

/// Errors raised while building or validating a model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is read-only and cannot be assigned or bound")]
    ReadOnlyVariable(String),
    #[error("variable `{name}` used unbound in process `{proc_name}`")]
    UnboundVariable { proc_name: String, name: String },
    #[error("type error in process `{proc_name}`: {detail}")]
    TypeError { proc_name: String, detail: String },
    #[error("guard in `{proc_name}` binds `{var}` of a type that cannot be enumerated or matched against the received frame")]
    UnbindableGuardVariable { proc_name: String, var: String },
    #[error("process `{0}` called with wrong number of arguments")]
    ArityMismatch(String),
    #[error("duplicate process name `{0}`")]
    DuplicateProcess(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("invalid duration configuration: {0}")]
    InvalidDuration(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

/// Errors raised while evaluating the operational semantics.
#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("probabilistic choice bound is unvalued")]
    UnvaluedProbBound,
    #[error("probabilistic choice bound is negative ({0})")]
    NegativeProbBound(i64),
    #[error("recursion unfolds more than {0} times without an action; defining equations are unguarded")]
    RecursionLimit(usize),
}

/// Errors raised during state-space exploration.
#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("state budget of {budget} states exceeded during exploration")]
    BudgetExceeded { budget: usize },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}
