//! Relational abstract domain for LAF terms: equalities with offsets
//! between scalar variables and tuple components, lifted so that each
//! variable carries its own element.

pub mod eqrel;
pub mod lift;

pub use eqrel::{EqRel, Node, Path};
pub use lift::{encode, paths_of, RelEnv, RelationalLift};
