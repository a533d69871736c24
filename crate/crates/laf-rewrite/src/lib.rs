//! Rewriting abstract domain: the abstract state is a translated copy of the
//! input term, simplified at each definition by a term-rewriting system.

pub mod check;
pub mod domain;
pub mod engine;
pub mod rule;

pub use check::{check_rule, projection_rules, CheckConfig};
pub use domain::{GammaMode, RewriteDomain};
pub use engine::RewriteState;
pub use rule::{
    aggressive_rules, default_rulesets, parse_rules, Guard, Head, Param, Pattern, RewriteRule,
    RuleKind,
};
