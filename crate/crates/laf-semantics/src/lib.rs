//! Ground-truth semantics of LAF terms: the set-based collecting semantics
//! and the stack machine, both with bounded enumeration of infinite sorts.

pub mod collect;
pub mod machine;
pub mod value;

pub use collect::{
    collect, collect_term, enumerate_sort, result_values, BudgetError, EnumBudget, Env,
};
pub use machine::{reachable_results, step, Frame, MachineState};
pub use value::{div_trunc, eval_op, Value};
