//! Rule sets: the declarative model, its XML grammar, and the registry
//! binding selector and action names to implementations.

mod load;
mod registry;

pub use load::{load_rules, parse_params, RuleLoadError};
pub use registry::{ActionFactory, Registry, SetupError};

use crate::conditions::Condition;
use crate::engine::Action;
use crate::pathlang::PathExpr;
use crate::selectors::BoundSelector;

/// A rule set: block type definitions plus optional enter/leave hooks.
pub struct RuleSet {
    pub id: String,
    pub pre: Option<Hook>,
    pub post: Option<Hook>,
    pub blocks: Vec<BlockDef>,
}

/// A named action invoked when a rule set application starts or ends.
pub struct Hook {
    pub name: String,
    pub action: Box<dyn Action>,
}

/// One block type: how to find starts, when they count, how far they reach,
/// and what to do with each block.
pub struct BlockDef {
    pub id: String,
    pub start: PathExpr,
    pub condition: Condition,
    pub grouping: Grouping,
    pub rules: Vec<Rule>,
}

/// How a minimal (single-node) block extends over following siblings.
pub enum Grouping {
    /// The block is just its start node.
    None,
    /// Append siblings while the expression matches them.
    Expression(PathExpr),
    /// Append siblings until one matches; the match is excluded.
    EndExpression(PathExpr),
    /// Append siblings up to the next start node of any block type.
    NextBlock,
}

/// A rule within a block: condition, optional action, optional inner rule
/// set applied to the block's content.
pub struct Rule {
    pub id: String,
    pub condition: Condition,
    pub action: Option<RuleAction>,
    pub inner: Option<RuleSet>,
}

/// The bound action of a rule plus the source selector feeding it. Without
/// an explicit source the action receives the whole block.
pub struct RuleAction {
    pub name: String,
    pub action: Box<dyn Action>,
    pub source: Option<BoundSelector>,
}
