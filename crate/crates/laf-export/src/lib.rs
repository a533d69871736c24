//! Translations of LAF terms to first-order formulas and Horn clauses,
//! their SMT-LIB output, and checks of both against the concrete semantics.

pub mod bounded;
pub mod embed;
pub mod fo;
pub mod horn;
pub mod smt;
pub mod solver;

pub use bounded::{derive, fact_of, query_reachable, saturate, top_solutions, Facts};
pub use embed::{embed_model, EmbedError};
pub use fo::{flatten, scalars, to_fo, unflatten, FoFormula, Fx, Pair, SSort, SVar, SVarInfo};
pub use horn::{to_horn, Head, HornSystem, Pred, PredApp, Rule};
pub use smt::{emit_fo, emit_horn};
pub use solver::{parse_answer, SolverAnswer, SolverConfig};
