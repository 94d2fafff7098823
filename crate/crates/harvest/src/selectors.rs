//! Selectors extract a value from a block.
//!
//! A selector is a named, parameterized function from a block to a value:
//! absent, a single node, or a node list. Rules use selectors to feed
//! conditions and actions; the built-ins cover identity, block position,
//! path lookup, regular-expression capture over the block's text, and
//! style-based lookup. Custom selectors implement [`Selector`] and register
//! under a name.
//!
//! Results are cached per run, keyed by selector instance and block
//! instance, so one value feeds any number of conditions and actions
//! without re-running. A selector that fails does not abort the run: the
//! failure becomes a yellow event and the value counts as absent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicU32, Ordering};

use regex::Regex;

use crate::docmodel::{Fragment, NodeRef, TreeBuilder};
use crate::engine::{Block, EngineConfig};
use crate::pathlang::PathExpr;
use crate::report::Event;

/// Parameters from a rule file: `key=value` pairs.
pub type Params = BTreeMap<String, String>;

/// What a selector produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectorValue {
    /// Nothing; conditions treat this as non-existent.
    Absent,
    Node(NodeRef),
    Fragment(Fragment),
}

impl SelectorValue {
    pub fn is_absent(&self) -> bool {
        matches!(self, SelectorValue::Absent)
    }

    /// Concatenated text of the selected nodes; `None` when absent.
    pub fn text(&self) -> Option<String> {
        match self {
            SelectorValue::Absent => None,
            SelectorValue::Node(node) => Some(node.text()),
            SelectorValue::Fragment(fragment) => Some(fragment.text()),
        }
    }

    /// View as a node list; `None` when absent.
    pub fn as_fragment(&self) -> Option<Fragment> {
        match self {
            SelectorValue::Absent => None,
            SelectorValue::Node(node) => Some(Fragment::single(node.clone())),
            SelectorValue::Fragment(fragment) => Some(fragment.clone()),
        }
    }
}

/// A selector failed. The run continues; the value counts as absent and the
/// message becomes a yellow event.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct SelectorFault {
    pub message: String,
}

impl SelectorFault {
    pub fn new(message: impl Into<String>) -> SelectorFault {
        SelectorFault { message: message.into() }
    }
}

/// Read-only environment handed to a selector.
pub struct SelectorContext<'a> {
    pub config: &'a EngineConfig,
}

/// The extension point: a value extractor over blocks.
pub trait Selector: Send + Sync {
    fn select(
        &self,
        block: &Block,
        ctx: &SelectorContext<'_>,
    ) -> Result<SelectorValue, SelectorFault>;

    /// Whether the result may be reused for the same block within one run.
    /// Defaults to true; return false for selectors that consult state
    /// outside the block.
    fn cacheable(&self) -> bool {
        true
    }
}

/// Builds a selector from rule-file parameters. Validation is eager: a bad
/// parameter set fails rule loading, not the run.
pub type SelectorFactory = fn(&Params) -> Result<Box<dyn Selector>, String>;

static NEXT_INSTANCE_ID: AtomicU32 = AtomicU32::new(1);

/// A selector instance as it occurs in a loaded rule set. Each syntactic
/// occurrence gets its own cache identity.
pub struct BoundSelector {
    instance_id: u32,
    inner: Box<dyn Selector>,
}

impl std::fmt::Debug for BoundSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BoundSelector#{}", self.instance_id)
    }
}

impl BoundSelector {
    pub fn bind(inner: Box<dyn Selector>) -> BoundSelector {
        BoundSelector { instance_id: NEXT_INSTANCE_ID.fetch_add(1, Ordering::Relaxed), inner }
    }

    /// The default selector where a rule file names none.
    pub fn identity() -> BoundSelector {
        BoundSelector::bind(Box::new(IdentitySelector))
    }
}

/// Run-scoped selector result cache.
#[derive(Default)]
pub struct SelectorCache {
    map: HashMap<(u32, u64), SelectorValue>,
}

/// Mutable evaluation state threaded through condition checks and rule
/// application: configuration, the selector cache, and the event stream.
pub struct EvalContext<'a> {
    pub config: &'a EngineConfig,
    pub cache: &'a mut SelectorCache,
    pub events: &'a mut Vec<Event>,
}

impl EvalContext<'_> {
    /// Run a selector against a block, consulting the cache and converting
    /// faults into yellow events plus an absent value.
    pub fn select(&mut self, selector: &BoundSelector, block: &Block) -> SelectorValue {
        let key = (selector.instance_id, block.uid());
        let cacheable = selector.inner.cacheable();
        if cacheable {
            if let Some(hit) = self.cache.map.get(&key) {
                return hit.clone();
            }
        }
        let value = match selector.inner.select(block, &SelectorContext { config: self.config }) {
            Ok(value) => value,
            Err(fault) => {
                self.events.push(
                    Event::yellow(format!("selector failed: {}", fault.message))
                        .with_block(block.type_id(), block.ordinal()),
                );
                SelectorValue::Absent
            }
        };
        if cacheable {
            self.cache.map.insert(key, value.clone());
        }
        value
    }
}

fn require<'p>(params: &'p Params, key: &str) -> Result<&'p str, String> {
    params
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| format!("missing required parameter '{key}'"))
}

fn reject_unknown(params: &Params, known: &[&str]) -> Result<(), String> {
    for key in params.keys() {
        if !known.contains(&key.as_str()) {
            return Err(format!("unknown parameter '{key}'"));
        }
    }
    Ok(())
}

/// The whole block, unchanged.
pub struct IdentitySelector;

impl Selector for IdentitySelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        Ok(SelectorValue::Fragment(block.fragment().clone()))
    }
}

pub fn identity_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &[])?;
    Ok(Box::new(IdentitySelector))
}

/// The block's 1-based ordinal, as a synthetic text node.
pub struct PositionSelector;

impl Selector for PositionSelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        Ok(SelectorValue::Node(NodeRef::synthetic_text(block.ordinal().to_string())))
    }
}

pub fn position_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &[])?;
    Ok(Box::new(PositionSelector))
}

/// The node the block started from.
pub struct StartNodeSelector;

impl Selector for StartNodeSelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        Ok(match block.start_node() {
            Some(node) => SelectorValue::Node(node.clone()),
            None => SelectorValue::Absent,
        })
    }
}

pub fn start_node_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &[])?;
    Ok(Box::new(StartNodeSelector))
}

/// First node matching a path expression evaluated over the block.
pub struct XPathSelector {
    expr: PathExpr,
}

impl Selector for XPathSelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        let result = self.expr.eval(block.fragment());
        Ok(match result.first() {
            Some(node) => SelectorValue::Node(node.clone()),
            None => SelectorValue::Absent,
        })
    }
}

pub fn xpath_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &["xpath", "xPath", "expression"])?;
    let raw = params
        .get("xpath")
        .or_else(|| params.get("xPath"))
        .or_else(|| params.get("expression"))
        .ok_or_else(|| "missing required parameter 'xpath'".to_string())?;
    let expr = PathExpr::parse(raw).map_err(|e| e.to_string())?;
    Ok(Box::new(XPathSelector { expr }))
}

/// First regular-expression match over the block's concatenated text.
///
/// If the expression has a capture group, group 1 is the selected span,
/// otherwise the whole match. A span inside one text node comes back as a
/// synthetic text node; a span crossing nodes comes back as a pruned copy
/// of the smallest enclosing element, with the boundary text nodes cut to
/// the span. The input tree is never modified.
pub struct RegexpSelector {
    re: Regex,
}

impl Selector for RegexpSelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        let mut segments: Vec<(NodeRef, usize)> = Vec::new();
        let mut text = String::new();
        for node in block.fragment().iter() {
            for part in node.descendants_or_self() {
                if part.is_text() {
                    segments.push((part.clone(), text.len()));
                    text.push_str(part.value().unwrap_or(""));
                }
            }
        }
        let Some(caps) = self.re.captures(&text) else {
            return Ok(SelectorValue::Absent);
        };
        let m = caps.get(1).or_else(|| caps.get(0)).expect("group 0 always present");
        if m.start() == m.end() {
            return Ok(SelectorValue::Node(NodeRef::synthetic_text("")));
        }

        let covered: Vec<(NodeRef, usize, usize)> = segments
            .iter()
            .filter_map(|(node, seg_start)| {
                let seg_end = seg_start + node.value().map(str::len).unwrap_or(0);
                let lo = m.start().max(*seg_start);
                let hi = m.end().min(seg_end);
                (lo < hi).then(|| (node.clone(), lo - seg_start, hi - seg_start))
            })
            .collect();
        match covered.as_slice() {
            [] => Ok(SelectorValue::Absent),
            [(node, lo, hi)] => {
                let value = node.value().unwrap_or("");
                Ok(SelectorValue::Node(NodeRef::synthetic_text(&value[*lo..*hi])))
            }
            many => Ok(clone_span(many).unwrap_or_else(|| {
                SelectorValue::Node(NodeRef::synthetic_text(m.as_str()))
            })),
        }
    }
}

/// Copy the smallest element containing all covered text nodes, keeping only
/// subtrees that hold covered text and trimming the boundary text nodes.
/// Returns `None` when the covered nodes share no element ancestor; the
/// caller falls back to a flat text copy.
fn clone_span(covered: &[(NodeRef, usize, usize)]) -> Option<SelectorValue> {
    let chains: Vec<Vec<NodeRef>> = covered
        .iter()
        .map(|(node, _, _)| {
            let mut chain = vec![node.clone()];
            let mut current = node.clone();
            while let Some(parent) = current.parent() {
                chain.push(parent.clone());
                current = parent;
            }
            chain.reverse();
            chain
        })
        .collect();
    // Deepest node present in every root-to-text chain.
    let first = &chains[0];
    let mut nca: Option<NodeRef> = None;
    for (depth, node) in first.iter().enumerate() {
        if !node.is_element() {
            break;
        }
        if chains.iter().all(|c| c.get(depth) == Some(node)) {
            nca = Some(node.clone());
        } else {
            break;
        }
    }
    let nca = nca?;

    let mut keep: HashSet<NodeRef> = HashSet::new();
    let mut cuts: HashMap<NodeRef, (usize, usize)> = HashMap::new();
    for (node, lo, hi) in covered {
        cuts.insert(node.clone(), (*lo, *hi));
        let mut current = node.clone();
        keep.insert(current.clone());
        while let Some(parent) = current.parent() {
            keep.insert(parent.clone());
            if parent == nca {
                break;
            }
            current = parent;
        }
    }

    let mut builder = TreeBuilder::new();
    copy_pruned(&mut builder, &nca, &keep, &cuts);
    let tree = builder.finish();
    Some(SelectorValue::Node(tree.root()))
}

fn copy_pruned(
    builder: &mut TreeBuilder,
    node: &NodeRef,
    keep: &HashSet<NodeRef>,
    cuts: &HashMap<NodeRef, (usize, usize)>,
) {
    builder.open_element(node.name().unwrap_or(""));
    for attr in node.attribute_nodes() {
        builder.attribute(attr.name().unwrap_or(""), attr.value().unwrap_or(""));
    }
    for child in node.children() {
        if !keep.contains(&child) {
            continue;
        }
        if child.is_text() {
            let value = child.value().unwrap_or("");
            let (lo, hi) = cuts.get(&child).copied().unwrap_or((0, value.len()));
            builder.text(&value[lo..hi]);
        } else if child.is_element() {
            copy_pruned(builder, &child, keep, cuts);
        }
    }
    builder.close_element();
}

pub fn regexp_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &["regexp", "regExp", "pattern"])?;
    let raw = params
        .get("regexp")
        .or_else(|| params.get("regExp"))
        .or_else(|| params.get("pattern"))
        .ok_or_else(|| "missing required parameter 'regexp'".to_string())?;
    let re = Regex::new(raw).map_err(|e| format!("invalid regexp: {e}"))?;
    Ok(Box::new(RegexpSelector { re }))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum StyledScope {
    All,
    Leading,
}

/// Nodes styled a particular way, via resolved style properties.
///
/// `scope=all` (default) selects every element under the block whose
/// resolved `property` equals `value`. `scope=leading` selects the outermost
/// element on the path to the block's first non-whitespace text whose
/// resolved property matches: the style run the block visibly starts with.
pub struct StyledSelector {
    property: String,
    value: String,
    scope: StyledScope,
}

impl Selector for StyledSelector {
    fn select(&self, block: &Block, _: &SelectorContext<'_>) -> Result<SelectorValue, SelectorFault> {
        match self.scope {
            StyledScope::All => {
                let mut hits = Vec::new();
                for node in block.fragment().iter() {
                    for part in node.descendants_or_self() {
                        if part.is_element()
                            && part.resolved_style(&self.property).as_deref()
                                == Some(self.value.as_str())
                        {
                            hits.push(part);
                        }
                    }
                }
                Ok(if hits.is_empty() {
                    SelectorValue::Absent
                } else {
                    SelectorValue::Fragment(Fragment::sorted(hits))
                })
            }
            StyledScope::Leading => {
                Ok(match leading_styled_run(block.fragment(), &self.property, &self.value) {
                    Some(node) => SelectorValue::Node(node),
                    None => SelectorValue::Absent,
                })
            }
        }
    }
}

/// The style run a fragment visibly starts with: the outermost element on
/// the path from the fragment top down to the first non-whitespace text
/// whose resolved `property` equals `value`.
pub(crate) fn leading_styled_run(
    fragment: &Fragment,
    property: &str,
    value: &str,
) -> Option<NodeRef> {
    let tops: HashSet<NodeRef> = fragment.iter().cloned().collect();
    let first_text = fragment
        .iter()
        .flat_map(|n| n.descendants_or_self())
        .find(|part| part.is_text() && !part.value().unwrap_or("").trim().is_empty())?;
    if tops.contains(&first_text) {
        return None;
    }
    let mut path = Vec::new();
    let mut current = first_text;
    while let Some(parent) = current.parent() {
        path.push(parent.clone());
        if tops.contains(&parent) {
            break;
        }
        current = parent;
    }
    path.into_iter()
        .rev()
        .find(|node| node.is_element() && node.resolved_style(property).as_deref() == Some(value))
}

pub fn styled_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_unknown(params, &["property", "value", "scope"])?;
    let property = require(params, "property")?.to_string();
    let value = require(params, "value")?.to_string();
    let scope = match params.get("scope").map(String::as_str) {
        None | Some("all") => StyledScope::All,
        Some("leading") => StyledScope::Leading,
        Some(other) => return Err(format!("unknown scope '{other}', expected all or leading")),
    };
    Ok(Box::new(StyledSelector { property, value, scope }))
}

/// Built-in selector names and factories, in registration order.
pub fn builtin_selectors() -> Vec<(&'static str, SelectorFactory)> {
    vec![
        ("identity", identity_factory),
        ("position", position_factory),
        ("start-node", start_node_factory),
        ("xpath", xpath_factory),
        ("regexp", regexp_factory),
        ("styled", styled_factory),
    ]
}
