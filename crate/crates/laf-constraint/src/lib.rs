//! The constraint domain: the input term is translated into a constraint
//! term whose variables carry condition maps (abstract values guarded by
//! conjunctions of boolean literals). Assumptions are propagated backward
//! (and optionally forward) through the constraint term; loops are solved by
//! a fixpoint over the condition map of the loop variable.

pub mod cond;
mod domain;
mod gen;
mod state;

pub use cond::{Cond, Lit};
pub use domain::{ConstraintDomain, Status};
pub use state::{ConstraintConfig, ConstraintState, Direction, Entries, Image, Stats};
