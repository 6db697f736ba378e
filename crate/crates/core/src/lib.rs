//! Circuits and register-machine pseudocode compiled into linear programs
//! whose optimum decides the encoded problem, plus the verifiers and
//! polytope laboratories around them.

pub mod circuit;
pub mod compiler;
pub mod driver;
pub mod exec;
pub mod matching;
pub mod pseudolang;
pub mod sandwich;
pub mod wef;
