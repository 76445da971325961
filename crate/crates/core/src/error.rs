use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("covering row {row} cannot be satisfied inside the box (A·X − b < 0)")]
    InfeasibleCovering { row: usize },

    #[error("unknown generator family `{0}`")]
    UnknownFamily(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("no valid completion exists at variable {variable}")]
    InfeasibleAtRoot { variable: usize },

    #[error("resource cap exceeded for {what}: needs {needed}, cap is {cap}")]
    Resource {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("c(P, w) is undefined: the polytope is the single point x*")]
    UndefinedC,

    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("wrong problem sense: expected {expected}")]
    WrongSense { expected: &'static str },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
