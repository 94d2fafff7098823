//! Block construction and rule application.
//!
//! Applying a rule set to a scope (the document's top-level nodes, or a
//! block's content for nested rule sets) happens in two phases. Phase one
//! finds block starts: for each block type in declaration order, the start
//! expression is evaluated over the scope and every hit whose start
//! condition holds claims that node; a node already claimed stays with the
//! earlier block type. Phase two grows each claimed start over its
//! following siblings according to the block type's grouping, never leaving
//! the scope. The resulting blocks are processed in document order with
//! 1-based ordinals per type.
//!
//! Rules fire non-exclusively: every rule whose condition holds runs, its
//! action first, then its nested rule set over the block's content.
//!
//! State built up during a run lives in *user objects*. The engine keeps a
//! stack of them: entering a rule set runs its `pre` hook, which may push a
//! fresh child object (or inherit the parent's); leaving runs `post`, which
//! receives the finished child for merging. A failing action or hook
//! records a red event and the run continues; the stack is restored
//! regardless.

use std::any::Any;
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::docmodel::{normalize_text, DocumentTree, Fragment, NodeRef};
use crate::report::{status_of, Event, RunStats, Severity};
use crate::rulemodel::{BlockDef, Grouping, RuleSet};
use crate::selectors::{EvalContext, Params, SelectorCache, SelectorValue};

/// Engine-wide knobs.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Element names that count as paragraph starts for the
    /// paragraph-start condition.
    pub paragraph_elements: Vec<String>,
    /// Mirror trace events to stderr while running.
    pub trace: bool,
    /// Where actions that extract binary resources may write files.
    pub media_dir: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            paragraph_elements: ["text:p", "text:h", "p", "h1", "h2", "h3", "h4", "h5", "h6"]
                .into_iter()
                .map(str::to_string)
                .collect(),
            trace: false,
            media_dir: None,
        }
    }
}

static NEXT_BLOCK_UID: AtomicU64 = AtomicU64::new(1);

/// A constructed block: a typed, ordered run of nodes that rules fire on.
///
/// `ordinal` counts blocks of the same type within one rule-set application,
/// starting at 1. Provisional blocks (used while checking start conditions)
/// and the whole-document pseudo block carry ordinal 0.
#[derive(Clone, Debug)]
pub struct Block {
    type_id: String,
    ordinal: u32,
    fragment: Fragment,
    uid: u64,
}

impl Block {
    /// Build a block directly. The engine constructs blocks itself during
    /// a run; this is for driving selectors and actions in tests.
    pub fn new(type_id: impl Into<String>, ordinal: u32, fragment: Fragment) -> Block {
        Block {
            type_id: type_id.into(),
            ordinal,
            fragment,
            uid: NEXT_BLOCK_UID.fetch_add(1, Ordering::Relaxed),
        }
    }

    /// The block type id from the rule file.
    pub fn type_id(&self) -> &str {
        &self.type_id
    }

    /// 1-based position among same-type blocks; 0 for provisional blocks.
    pub fn ordinal(&self) -> u32 {
        self.ordinal
    }

    pub fn fragment(&self) -> &Fragment {
        &self.fragment
    }

    /// The node the block construction started from.
    pub fn start_node(&self) -> Option<&NodeRef> {
        self.fragment.first()
    }

    /// Instance key for run-scoped caches. Distinct constructed blocks get
    /// distinct uids even when they cover the same nodes.
    pub fn uid(&self) -> u64 {
        self.uid
    }
}

/// An action failed; the rule is reported red and the run continues.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct ActionError {
    pub message: String,
}

impl ActionError {
    pub fn new(message: impl Into<String>) -> ActionError {
        ActionError { message: message.into() }
    }
}

/// Everything an action may consult besides the user object and the block.
pub struct ActionContext<'a> {
    pub config: &'a EngineConfig,
    /// The document being processed (for styles and container resources).
    pub tree: &'a DocumentTree,
    pub events: &'a mut Vec<Event>,
    /// Value of the rule's source selector; the whole block if the rule
    /// declares no source.
    pub source: SelectorValue,
    /// The firing rule's id (or the rule set id for pre/post hooks).
    pub rule_id: &'a str,
}

/// The action extension point. A plain rule action implements [`perform`];
/// rule-set enter/leave hooks implement [`pre`] and [`post`]. The unneeded
/// entry points can be left at their defaults, which fail loudly if wired
/// up by mistake.
///
/// [`perform`]: Action::perform
/// [`pre`]: Action::pre
/// [`post`]: Action::post
pub trait Action: Send + Sync {
    /// Run for a block whose rule condition held.
    fn perform(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let _ = (user, block, ctx);
        Err(ActionError::new("action does not implement perform"))
    }

    /// Run when a rule set application starts. Return a new user object to
    /// push for the child scope, or `None` to share the parent's.
    fn pre(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<Option<Box<dyn Any>>, ActionError> {
        let _ = (user, block, ctx);
        Err(ActionError::new("action does not implement pre"))
    }

    /// Run when a rule set application ends. `child` is the object pushed
    /// by `pre`, or `None` if the scope shared the parent's object.
    fn post(
        &self,
        user: &mut dyn Any,
        child: Option<Box<dyn Any>>,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let _ = (user, child, block, ctx);
        Err(ActionError::new("action does not implement post"))
    }
}

/// Green breadcrumb per block: type, ordinal, and a text preview.
pub struct TraceAction;

impl Action for TraceAction {
    fn perform(
        &self,
        _user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let preview: String = normalize_text(&block.fragment().text()).chars().take(60).collect();
        let message = format!("trace {}#{}: {}", block.type_id(), block.ordinal(), preview);
        if ctx.config.trace {
            eprintln!("{message}");
        }
        ctx.events.push(
            Event::green(message)
                .with_block(block.type_id(), block.ordinal())
                .with_rule(ctx.rule_id),
        );
        Ok(())
    }
}

pub fn trace_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    if !params.is_empty() {
        return Err("trace takes no parameters".into());
    }
    Ok(Box::new(TraceAction))
}

/// What a run produced: the final user object, all events, and counters.
pub struct RunOutcome {
    pub user: Option<Box<dyn Any>>,
    pub events: Vec<Event>,
    pub stats: RunStats,
}

impl RunOutcome {
    /// Worst severity seen; green when nothing was reported.
    pub fn status(&self) -> Severity {
        status_of(&self.events)
    }

    /// Take the user object back at its concrete type.
    pub fn user_into<T: Any>(self) -> Option<Box<T>> {
        self.user.and_then(|user| user.downcast().ok())
    }
}

/// A loaded rule set plus configuration, ready to run against documents.
pub struct Engine {
    ruleset: RuleSet,
    config: EngineConfig,
}

impl Engine {
    pub fn new(ruleset: RuleSet) -> Engine {
        Engine { ruleset, config: EngineConfig::default() }
    }

    pub fn with_config(ruleset: RuleSet, config: EngineConfig) -> Engine {
        Engine { ruleset, config }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn ruleset(&self) -> &RuleSet {
        &self.ruleset
    }

    /// Apply the rule set to a document. `user` is the initial user object;
    /// it is returned (possibly replaced by hook semantics) in the outcome.
    pub fn run(&self, tree: &DocumentTree, user: Box<dyn Any>) -> RunOutcome {
        let mut events: Vec<Event> =
            tree.load_warnings().iter().map(|w| Event::yellow(w.clone())).collect();
        let mut cache = SelectorCache::default();
        let mut stats = RunStats::default();
        let mut stack: Vec<Rc<RefCell<Box<dyn Any>>>> = vec![Rc::new(RefCell::new(user))];

        let scope = tree.document_scope();
        let pseudo = Block::new("", 0, scope.clone());
        let mut run = RunCtx {
            tree,
            config: &self.config,
            cache: &mut cache,
            events: &mut events,
            stats: &mut stats,
        };
        apply_rule_set(&self.ruleset, &scope, &pseudo, &mut stack, &mut run);

        debug_assert_eq!(stack.len(), 1, "user stack must balance");
        let root = stack.pop().expect("root user frame");
        let user = Rc::try_unwrap(root).ok().map(RefCell::into_inner);
        RunOutcome { user, events, stats }
    }

    /// Construct the top-level blocks for a document without firing any
    /// rules. Useful to check start and grouping definitions against a
    /// sample file before wiring up actions.
    pub fn blocks(&self, tree: &DocumentTree) -> Vec<Block> {
        let mut cache = SelectorCache::default();
        let mut events = Vec::new();
        let mut stats = RunStats::default();
        let mut run = RunCtx {
            tree,
            config: &self.config,
            cache: &mut cache,
            events: &mut events,
            stats: &mut stats,
        };
        let scope = tree.document_scope();
        construct_blocks(&self.ruleset.blocks, &scope, &mut run)
            .into_iter()
            .map(|constructed| constructed.block)
            .collect()
    }
}

struct RunCtx<'a> {
    tree: &'a DocumentTree,
    config: &'a EngineConfig,
    cache: &'a mut SelectorCache,
    events: &'a mut Vec<Event>,
    stats: &'a mut RunStats,
}

impl RunCtx<'_> {
    fn eval_ctx(&mut self) -> EvalContext<'_> {
        EvalContext { config: self.config, cache: self.cache, events: self.events }
    }

    fn push_red(&mut self, message: String, rule_id: &str, block: &Block) {
        let mut event = Event::red(message, rule_id);
        if !block.type_id().is_empty() {
            event = event.with_block(block.type_id(), block.ordinal());
        }
        self.events.push(event);
    }
}

fn apply_rule_set(
    ruleset: &RuleSet,
    scope: &Fragment,
    hook_block: &Block,
    stack: &mut Vec<Rc<RefCell<Box<dyn Any>>>>,
    run: &mut RunCtx<'_>,
) {
    // Enter: push the child frame (a fresh object from pre, or the parent's).
    let parent_rc = stack.last().expect("parent frame").clone();
    let frame = match &ruleset.pre {
        Some(hook) => {
            let outcome = {
                let mut guard = parent_rc.borrow_mut();
                let mut ctx = ActionContext {
                    config: run.config,
                    tree: run.tree,
                    events: run.events,
                    source: SelectorValue::Absent,
                    rule_id: &ruleset.id,
                };
                hook.action.pre(guard.as_mut(), hook_block, &mut ctx)
            };
            match outcome {
                Ok(Some(child)) => Rc::new(RefCell::new(child)),
                Ok(None) => parent_rc.clone(),
                Err(e) => {
                    run.push_red(
                        format!("pre action '{}' failed: {}", hook.name, e.message),
                        &ruleset.id,
                        hook_block,
                    );
                    parent_rc.clone()
                }
            }
        }
        None => parent_rc.clone(),
    };
    stack.push(frame);

    let blocks = construct_blocks(&ruleset.blocks, scope, run);
    for constructed in &blocks {
        let def = &ruleset.blocks[constructed.def_index];
        apply_block_rules(def, &constructed.block, stack, run);
    }

    // Leave: pop the frame and hand the child object to post.
    let frame = stack.pop().expect("child frame");
    let parent_rc = stack.last().expect("parent frame").clone();
    let child: Option<Box<dyn Any>> = if Rc::ptr_eq(&frame, &parent_rc) {
        None
    } else {
        Rc::try_unwrap(frame).ok().map(RefCell::into_inner)
    };
    if let Some(hook) = &ruleset.post {
        let outcome = {
            let mut guard = parent_rc.borrow_mut();
            let mut ctx = ActionContext {
                config: run.config,
                tree: run.tree,
                events: run.events,
                source: SelectorValue::Absent,
                rule_id: &ruleset.id,
            };
            hook.action.post(guard.as_mut(), child, hook_block, &mut ctx)
        };
        if let Err(e) = outcome {
            run.push_red(
                format!("post action '{}' failed: {}", hook.name, e.message),
                &ruleset.id,
                hook_block,
            );
        }
    }
}

fn apply_block_rules(
    def: &BlockDef,
    block: &Block,
    stack: &mut Vec<Rc<RefCell<Box<dyn Any>>>>,
    run: &mut RunCtx<'_>,
) {
    for rule in &def.rules {
        let fired = rule.condition.eval(block, &mut run.eval_ctx());
        if !fired {
            continue;
        }
        *run.stats.rule_fires.entry(rule.id.clone()).or_insert(0) += 1;

        if let Some(rule_action) = &rule.action {
            let source = match &rule_action.source {
                Some(selector) => run.eval_ctx().select(selector, block),
                None => SelectorValue::Fragment(block.fragment().clone()),
            };
            let top = stack.last().expect("user frame").clone();
            let outcome = {
                let mut guard = top.borrow_mut();
                let mut ctx = ActionContext {
                    config: run.config,
                    tree: run.tree,
                    events: run.events,
                    source,
                    rule_id: &rule.id,
                };
                rule_action.action.perform(guard.as_mut(), block, &mut ctx)
            };
            if let Err(e) = outcome {
                run.push_red(
                    format!("action '{}' failed: {}", rule_action.name, e.message),
                    &rule.id,
                    block,
                );
            }
        }

        if let Some(inner) = &rule.inner {
            apply_rule_set(inner, block.fragment(), block, stack, run);
        }
    }
}

struct Constructed {
    def_index: usize,
    block: Block,
}

/// Two-phase block construction over a scope.
fn construct_blocks(defs: &[BlockDef], scope: &Fragment, run: &mut RunCtx<'_>) -> Vec<Constructed> {
    for def in defs {
        run.stats.blocks_by_type.entry(def.id.clone()).or_insert(0);
    }

    // Phase 1: claim start nodes, first declared block type wins.
    let mut claims: Vec<(NodeRef, usize)> = Vec::new();
    let mut claimed: HashSet<NodeRef> = HashSet::new();
    for (index, def) in defs.iter().enumerate() {
        for node in def.start.eval(scope).nodes() {
            if claimed.contains(node) {
                continue;
            }
            let provisional = Block::new(&def.id, 0, Fragment::single(node.clone()));
            if def.condition.eval(&provisional, &mut run.eval_ctx()) {
                claimed.insert(node.clone());
                claims.push((node.clone(), index));
            }
        }
    }
    claims.sort_by(|a, b| a.0.cmp(&b.0));

    // Phase 2: expand each start over its following siblings.
    let mut ordinals: HashMap<usize, u32> = HashMap::new();
    let mut out = Vec::new();
    for (node, index) in &claims {
        let def = &defs[*index];
        let mut nodes = vec![node.clone()];
        let candidates = expansion_candidates(scope, node);
        match &def.grouping {
            Grouping::None => {}
            Grouping::Expression(expr) => {
                for sibling in candidates {
                    if expr.matches(&Fragment::single(sibling.clone())) {
                        nodes.push(sibling);
                    } else {
                        break;
                    }
                }
            }
            Grouping::EndExpression(expr) => {
                for sibling in candidates {
                    if expr.matches(&Fragment::single(sibling.clone())) {
                        break;
                    }
                    nodes.push(sibling);
                }
            }
            Grouping::NextBlock => {
                for sibling in candidates {
                    if claimed.contains(&sibling) {
                        break;
                    }
                    nodes.push(sibling);
                }
            }
        }
        let ordinal = ordinals.entry(*index).or_insert(0);
        *ordinal += 1;
        *run.stats.blocks_by_type.entry(def.id.clone()).or_insert(0) += 1;
        out.push(Constructed {
            def_index: *index,
            block: Block::new(&def.id, *ordinal, Fragment::from_nodes(nodes)),
        });
    }
    out
}

/// Following siblings available for expansion. A start that is itself a
/// scope node may only grow over later scope nodes (stopping where the
/// sibling run does); a start below the scope level grows over its tree
/// siblings, which all lie inside the scope by construction.
fn expansion_candidates(scope: &Fragment, node: &NodeRef) -> Vec<NodeRef> {
    if let Some(position) = scope.nodes().iter().position(|n| n == node) {
        let parent = node.parent();
        scope.nodes()[position + 1..]
            .iter()
            .take_while(|n| n.parent() == parent)
            .cloned()
            .collect()
    } else {
        node.following_siblings()
    }
}
