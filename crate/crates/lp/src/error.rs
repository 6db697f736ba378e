use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint has no nonzero terms")]
    EmptyConstraint,
    #[error("variable index {0} is not defined in this system")]
    UnknownVar(usize),
    #[error("variable `{0}` has lower bound above upper bound")]
    InvertedBounds(String),
    #[error("value {value} is outside the bounds of `{var}`")]
    OutOfBounds { var: String, value: Rat },
    #[error("system is infeasible")]
    Infeasible,
    #[error("variable `{0}` is unbounded over the system")]
    Unbounded(String),
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("dump parse error: {0}")]
    Dump(String),
}
