//! XML output backend: a mutable result document that actions write into.
//!
//! The backend's user object is an [`OutputCursor`]: a position in a shared
//! output document. The set-node action writes a selector value at a path
//! relative to the cursor; the descend action (as a rule set's `pre` hook)
//! pushes a cursor deeper into the document so nested rule sets write into
//! their own subtree.
//!
//! Write paths are deliberately small: slash-separated element names with
//! an optional trailing `@attribute`. Missing intermediate elements are
//! created on demand; when several children share a name the most recently
//! created one is reused, so repeated writes land in the subtree the last
//! descend opened.

use std::any::Any;
use std::cell::RefCell;
use std::fmt::Write as _;
use std::rc::Rc;

use crate::docmodel::{normalize_text, DocumentTree, Fragment, Kind, NodeRef};
use crate::engine::{Action, ActionContext, ActionError, Block, Engine, RunOutcome};
use crate::report::Event;
use crate::selectors::Params;

/// A write failed (bad path for the current position).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct WriteError(String);

enum OutNode {
    Document { children: Vec<usize> },
    Element { name: String, attrs: Vec<(String, String)>, children: Vec<usize> },
    Text(String),
}

struct OutDoc {
    nodes: Vec<OutNode>,
}

impl OutDoc {
    fn children(&self, id: usize) -> &[usize] {
        match &self.nodes[id] {
            OutNode::Document { children } | OutNode::Element { children, .. } => children,
            OutNode::Text(_) => &[],
        }
    }

    fn push_child(&mut self, parent: usize, node: OutNode) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node);
        match &mut self.nodes[parent] {
            OutNode::Document { children } | OutNode::Element { children, .. } => children.push(id),
            OutNode::Text(_) => unreachable!("text nodes have no children"),
        }
        id
    }

    fn create_element(&mut self, parent: usize, name: &str) -> usize {
        self.push_child(
            parent,
            OutNode::Element { name: name.into(), attrs: Vec::new(), children: Vec::new() },
        )
    }

    /// Reuse the most recent child element with this name, else create one.
    fn ensure_element(&mut self, parent: usize, name: &str) -> usize {
        let found = self
            .children(parent)
            .iter()
            .rev()
            .copied()
            .find(|&c| matches!(&self.nodes[c], OutNode::Element { name: n, .. } if n == name));
        found.unwrap_or_else(|| self.create_element(parent, name))
    }

    fn set_attr(&mut self, element: usize, name: &str, value: &str, overwrite: bool) {
        let OutNode::Element { attrs, .. } = &mut self.nodes[element] else {
            unreachable!("attribute writes target elements");
        };
        match attrs.iter_mut().find(|(n, _)| n == name) {
            Some((_, old)) => {
                if overwrite {
                    *old = value.into();
                }
            }
            None => attrs.push((name.into(), value.into())),
        }
    }

    fn clear_children(&mut self, element: usize) {
        if let OutNode::Element { children, .. } = &mut self.nodes[element] {
            children.clear();
        }
    }

    /// Deep-copy a source node under `parent`. Attribute nodes become
    /// attributes of `parent` itself.
    fn copy_from(&mut self, parent: usize, node: &NodeRef) {
        match node.kind() {
            Kind::Text => {
                self.push_child(parent, OutNode::Text(node.value().unwrap_or("").to_string()));
            }
            Kind::Attribute => {
                self.set_attr(parent, node.name().unwrap_or(""), node.value().unwrap_or(""), true);
            }
            Kind::Element => {
                let id = self.create_element(parent, node.name().unwrap_or(""));
                for attr in node.attribute_nodes() {
                    self.set_attr(id, attr.name().unwrap_or(""), attr.value().unwrap_or(""), true);
                }
                for child in node.children() {
                    self.copy_from(id, &child);
                }
            }
        }
    }

    fn fill(&mut self, parent: usize, fragment: &Fragment) {
        for node in fragment.iter() {
            self.copy_from(parent, node);
        }
    }
}

/// A result document under construction.
pub struct OutputDocument {
    doc: Rc<RefCell<OutDoc>>,
}

impl Default for OutputDocument {
    fn default() -> Self {
        Self::new()
    }
}

impl OutputDocument {
    pub fn new() -> OutputDocument {
        OutputDocument {
            doc: Rc::new(RefCell::new(OutDoc { nodes: vec![OutNode::Document { children: Vec::new() }] })),
        }
    }

    /// A cursor at the document node.
    pub fn cursor(&self) -> OutputCursor {
        OutputCursor { doc: self.doc.clone(), node: 0 }
    }

    /// Pretty-printed UTF-8 XML. A single top-level element serializes
    /// as-is; zero or several are wrapped in a synthetic `<result>` root so
    /// the output is always well formed.
    pub fn serialize(&self) -> String {
        let doc = self.doc.borrow();
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let roots = doc.children(0);
        match roots {
            [single] => write_node(&doc, *single, 0, &mut out),
            [] => out.push_str("<result/>\n"),
            many => {
                out.push_str("<result>\n");
                for &child in many {
                    write_node(&doc, child, 1, &mut out);
                }
                out.push_str("</result>\n");
            }
        }
        out
    }
}

/// A position in an [`OutputDocument`]; the XML backend's user object.
#[derive(Clone)]
pub struct OutputCursor {
    doc: Rc<RefCell<OutDoc>>,
    node: usize,
}

impl OutputCursor {
    /// Walk (and create) elements along `path`, returning a cursor at the
    /// final element. With `overwrite` the final element is always created
    /// fresh, so each call opens a new sibling; without it the last
    /// matching element is reused.
    pub fn descend(&self, path: &WritePath, overwrite: bool) -> Result<OutputCursor, WriteError> {
        if path.attr.is_some() {
            return Err(WriteError(format!("descend path '{path}' must end at an element")));
        }
        let mut doc = self.doc.borrow_mut();
        let mut cur = self.node;
        let last = path.steps.len() - 1;
        for (i, step) in path.steps.iter().enumerate() {
            cur = if i == last && overwrite {
                doc.create_element(cur, step)
            } else {
                doc.ensure_element(cur, step)
            };
        }
        Ok(OutputCursor { doc: self.doc.clone(), node: cur })
    }

    /// Deep-copy a fragment's nodes as children of the cursor's element,
    /// after any existing content.
    pub fn append(&self, value: &Fragment) -> Result<(), WriteError> {
        let mut doc = self.doc.borrow_mut();
        if matches!(doc.nodes[self.node], OutNode::Document { .. })
            && value.iter().any(|n| n.is_attribute())
        {
            return Err(WriteError("cannot append attributes at the document itself".into()));
        }
        doc.fill(self.node, value);
        Ok(())
    }

    /// Write a value at `path`. Element targets receive a deep copy of the
    /// fragment (existing content is replaced when `overwrite`, kept
    /// untouched otherwise); attribute targets receive the fragment's
    /// normalized text. Intermediate elements are created as needed.
    pub fn set_node(
        &self,
        path: &WritePath,
        overwrite: bool,
        value: &Fragment,
    ) -> Result<(), WriteError> {
        let mut doc = self.doc.borrow_mut();
        match &path.attr {
            Some(attr) => {
                let mut cur = self.node;
                for step in &path.steps {
                    cur = doc.ensure_element(cur, step);
                }
                if matches!(doc.nodes[cur], OutNode::Document { .. }) {
                    return Err(WriteError(format!(
                        "path '{path}' sets an attribute on the document itself"
                    )));
                }
                let text = normalize_text(&value.text());
                doc.set_attr(cur, attr, &text, overwrite);
            }
            None => {
                let (final_step, mids) = path.steps.split_last().expect("element path has steps");
                let mut cur = self.node;
                for step in mids {
                    cur = doc.ensure_element(cur, step);
                }
                let existing = doc
                    .children(cur)
                    .iter()
                    .rev()
                    .copied()
                    .find(|&c| matches!(&doc.nodes[c], OutNode::Element { name, .. } if name == final_step));
                match existing {
                    Some(id) if overwrite => {
                        doc.clear_children(id);
                        doc.fill(id, value);
                    }
                    Some(_) => {}
                    None => {
                        let id = doc.create_element(cur, final_step);
                        doc.fill(id, value);
                    }
                }
            }
        }
        Ok(())
    }
}

/// A slash-separated element path with an optional trailing attribute,
/// e.g. `organization/person/@id`.
#[derive(Clone, Debug)]
pub struct WritePath {
    steps: Vec<String>,
    attr: Option<String>,
}

impl WritePath {
    pub fn parse(raw: &str) -> Result<WritePath, String> {
        let trimmed = raw.trim();
        let body = trimmed.strip_prefix('/').unwrap_or(trimmed);
        if body.is_empty() {
            return Err("empty path".into());
        }
        let parts: Vec<&str> = body.split('/').collect();
        let mut steps = Vec::new();
        let mut attr = None;
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(format!("empty component in path '{raw}'"));
            }
            if let Some(name) = part.strip_prefix('@') {
                if i != parts.len() - 1 {
                    return Err(format!("attribute must be the last component in '{raw}'"));
                }
                if name.is_empty() || name.contains('@') {
                    return Err(format!("bad attribute name in '{raw}'"));
                }
                attr = Some(name.to_string());
            } else {
                if part.contains('@') {
                    return Err(format!("'@' may only introduce the final component in '{raw}'"));
                }
                steps.push(part.to_string());
            }
        }
        Ok(WritePath { steps, attr })
    }

    pub fn is_attribute(&self) -> bool {
        self.attr.is_some()
    }
}

impl std::fmt::Display for WritePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for step in &self.steps {
            if !first {
                f.write_str("/")?;
            }
            f.write_str(step)?;
            first = false;
        }
        if let Some(attr) = &self.attr {
            if !first {
                f.write_str("/")?;
            }
            write!(f, "@{attr}")?;
        }
        Ok(())
    }
}

fn escape_text(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
}

fn escape_attr(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

fn open_tag(doc: &OutDoc, id: usize, out: &mut String) {
    let OutNode::Element { name, attrs, .. } = &doc.nodes[id] else {
        unreachable!("open_tag takes elements");
    };
    let _ = write!(out, "<{name}");
    for (attr, value) in attrs {
        let _ = write!(out, " {attr}=\"");
        escape_attr(value, out);
        out.push('"');
    }
}

/// Block layout: children indented one level, except that an element with
/// any text child renders its whole content inline to keep the text intact.
fn write_node(doc: &OutDoc, id: usize, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    match &doc.nodes[id] {
        OutNode::Text(value) => {
            escape_text(value, out);
            out.push('\n');
        }
        OutNode::Element { name, children, .. } => {
            open_tag(doc, id, out);
            if children.is_empty() {
                out.push_str("/>\n");
            } else if children.iter().any(|&c| matches!(doc.nodes[c], OutNode::Text(_))) {
                out.push('>');
                for &child in children {
                    write_inline(doc, child, out);
                }
                let _ = writeln!(out, "</{name}>");
            } else {
                out.push_str(">\n");
                for &child in children {
                    write_node(doc, child, depth + 1, out);
                }
                for _ in 0..depth {
                    out.push_str("  ");
                }
                let _ = writeln!(out, "</{name}>");
            }
        }
        OutNode::Document { .. } => unreachable!("document node is handled by serialize"),
    }
}

fn write_inline(doc: &OutDoc, id: usize, out: &mut String) {
    match &doc.nodes[id] {
        OutNode::Text(value) => escape_text(value, out),
        OutNode::Element { name, children, .. } => {
            open_tag(doc, id, out);
            if children.is_empty() {
                out.push_str("/>");
            } else {
                out.push('>');
                for &child in children {
                    write_inline(doc, child, out);
                }
                let _ = write!(out, "</{name}>");
            }
        }
        OutNode::Document { .. } => unreachable!("document node is never inline"),
    }
}

fn require<'p>(params: &'p Params, key: &str) -> Result<&'p str, String> {
    params
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| format!("missing required parameter '{key}'"))
}

fn parse_overwrite(params: &Params) -> Result<bool, String> {
    match params.get("overwrite").map(String::as_str) {
        None => Ok(true),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(format!("overwrite must be true or false, got '{other}'")),
    }
}

fn backend_cursor<'u>(user: &'u mut dyn Any, what: &str) -> Result<&'u mut OutputCursor, ActionError> {
    user.downcast_mut::<OutputCursor>()
        .ok_or_else(|| ActionError::new(format!("{what} requires the XML output backend")))
}

/// Writes the rule's source value into the output document.
pub struct SetNodeAction {
    path: WritePath,
    overwrite: bool,
}

impl Action for SetNodeAction {
    fn perform(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let cursor = backend_cursor(user, "set-node")?;
        let Some(fragment) = ctx.source.as_fragment() else {
            ctx.events.push(
                Event::yellow(format!("set-node '{}': source is absent, nothing written", self.path))
                    .with_block(block.type_id(), block.ordinal())
                    .with_rule(ctx.rule_id),
            );
            return Ok(());
        };
        cursor
            .set_node(&self.path, self.overwrite, &fragment)
            .map_err(|e| ActionError::new(e.to_string()))
    }
}

pub fn set_node_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    for key in params.keys() {
        if key != "path" && key != "overwrite" {
            return Err(format!("unknown parameter '{key}'"));
        }
    }
    let path = WritePath::parse(require(params, "path")?)?;
    let overwrite = parse_overwrite(params)?;
    Ok(Box::new(SetNodeAction { path, overwrite }))
}

/// As a rule set's `pre` hook: moves the cursor down a path, so the nested
/// rule set writes into that subtree. With overwrite (the default) every
/// application opens a fresh element, which is how repeated blocks become
/// repeated output elements.
pub struct DescendNodePreAction {
    path: WritePath,
    overwrite: bool,
}

impl Action for DescendNodePreAction {
    fn pre(
        &self,
        user: &mut dyn Any,
        _block: &Block,
        _ctx: &mut ActionContext<'_>,
    ) -> Result<Option<Box<dyn Any>>, ActionError> {
        let cursor = backend_cursor(user, "descend")?;
        let inner = cursor
            .descend(&self.path, self.overwrite)
            .map_err(|e| ActionError::new(e.to_string()))?;
        Ok(Some(Box::new(inner)))
    }
}

pub fn descend_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    for key in params.keys() {
        if key != "path" && key != "overwrite" {
            return Err(format!("unknown parameter '{key}'"));
        }
    }
    let path = WritePath::parse(require(params, "path")?)?;
    if path.is_attribute() {
        return Err(format!("descend path '{path}' must end at an element"));
    }
    let overwrite = parse_overwrite(params)?;
    Ok(Box::new(DescendNodePreAction { path, overwrite }))
}

/// Run an engine with the XML backend: the user object is a cursor into a
/// fresh output document, returned alongside the outcome.
pub fn run_to_xml(engine: &Engine, tree: &DocumentTree) -> (RunOutcome, OutputDocument) {
    let doc = OutputDocument::new();
    let outcome = engine.run(tree, Box::new(doc.cursor()));
    (outcome, doc)
}
