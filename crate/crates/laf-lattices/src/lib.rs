//! Abstract values: lattices with join, meet, inclusion, widening,
//! concretization membership, forward transfer and backward refinement.

pub mod interval;
pub mod refine;
pub mod value;

pub use interval::{Bound, Interval};
pub use refine::refine_args;
pub use value::{itv, AbsValue, BoolSet, BvSet, Flat, IntFlavor, BV_SET_CAP};
