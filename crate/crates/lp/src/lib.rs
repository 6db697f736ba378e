//! Exact-rational linear programming.
//!
//! Systems are built from `[lo, hi]`-boxed variables and linear rows with
//! rational coefficients. Solving is exact: optimal values and points are
//! rationals, never floats.

mod emit;
mod error;
mod presolve;
mod rat;
mod simplex;
mod solve;
mod system;

pub use emit::{from_json, to_json, to_lp_text, LoadedSystem, RationalStyle};
pub use error::LpError;
pub use rat::{rat, ParseRatError, Rat};
pub use solve::{solve, solve_with, var_range, var_ranges, OptResult, Solution, SolveOptions, VarRange};
pub use system::{fix_vars, Bounds, LPSystem, LinConstraint, Objective, Sense, VarId};
