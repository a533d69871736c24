//! The abstract-domain contract, a soundness harness that checks a domain
//! against the concrete oracle, and a seeded generator of random terms.

pub mod domain;
pub mod gen;

pub use domain::{oracle, soundness_check, soundness_suite, AbstractDomain, SuiteReport, Verdict};
pub use gen::{gen_term, OpWeights, TermGenConfig};
