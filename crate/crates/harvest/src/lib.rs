//! Rule-driven extraction from semi-structured XML.
//!
//! Semi-structured documents (office files, flat XML exports) carry their
//! meaning in layout conventions: headings, bold runs, list nesting,
//! colors. This crate turns such conventions into data. You describe the
//! shapes you care about as *block rules*: a path expression finds candidate
//! start nodes, a condition filters them, a grouping strategy extends each
//! hit over its following siblings. Rules then fire per block, running
//! actions that build up your own result object or an XML output document.
//!
//! The pieces, bottom to top:
//!
//! - [`docmodel`]: immutable document trees, loaded from plain XML or zipped
//!   office containers, with style resolution and stable node identity.
//! - [`pathlang`]: the path expression dialect used everywhere a rule file
//!   says `matches="..."`.
//! - [`selectors`]: named value extractors that run against a block; custom
//!   ones plug in through [`selectors::Selector`].
//! - [`conditions`]: the boolean test tree attached to blocks and rules.
//! - [`rulemodel`]: the rule file grammar, its loader, and the extension
//!   registry.
//! - [`engine`]: two-phase block construction and rule application.
//! - [`xmlout`]: an XML output backend with path-addressed writes.
//! - [`report`]: the traffic-light run report (green/yellow/red events).
//! - [`caseimport`]: a complete worked backend that turns styled office
//!   documents into training-case XML.
//! - [`cli`]: the `harvest` binary driving all of the above from the shell.
//!
//! The `examples/` directory walks each layer with runnable programs; start
//! with `load_document` and `first_ruleset`.

pub mod caseimport;
pub mod cli;
pub mod conditions;
pub mod docmodel;
pub mod engine;
pub mod pathlang;
pub mod report;
pub mod rulemodel;
pub mod selectors;
pub mod xmlout;

pub use docmodel::{DocumentTree, Fragment, NodeRef};
pub use engine::{Block, Engine, EngineConfig, RunOutcome};
pub use report::{Event, Severity};
pub use rulemodel::{load_rules, Registry, RuleSet};
