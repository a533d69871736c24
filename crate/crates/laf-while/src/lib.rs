//! Frontend for a small imperative language: parsing, a reference
//! interpreter, and translation to LAF terms.

pub mod ast;
pub mod interp;
pub mod parse;
pub mod simplify;
pub mod translate;
pub mod types;

pub use ast::{unroll, BinOp, Expr, Program, Stmt, UnOp};
pub use interp::{final_stores, Store};
pub use parse::{parse_while, SyntaxError};
pub use simplify::{prune, simplify_translation};
pub use translate::{
    translate, translate_source, Assertion, FrontendError, TranslateOptions, Translation,
};
pub use types::{check_program, ProgVars, TypeError};
