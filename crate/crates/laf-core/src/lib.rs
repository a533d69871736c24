//! The LAF intermediate representation.
//!
//! A term is an ordered sequence of named definitions followed by a result
//! variable. Variables are dense integer ids allocated in definition order,
//! so per-variable data can live in plain vectors indexed by id.

pub mod build;
pub mod ir;
pub mod text;
pub mod wf;

pub use build::TermBuilder;
pub use ir::{Context, Def, Literal, Mu, Op, Rhs, Sort, Term, Var, VarInfo, VarTable};
pub use text::{
    display_names, literal_as_i64, parse_term, print_term, read_sexps, ParseError, Sexp,
};
pub use wf::{check_wf, Diagnostic, WfError};
