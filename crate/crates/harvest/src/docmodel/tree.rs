//! Immutable document tree.
//!
//! Nodes live in a per-tree arena in preorder, so node ids double as
//! document-order keys. `NodeRef` is a cheap handle (shared arena + id) with
//! stable identity for the lifetime of the tree. Nothing here mutates after
//! construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::style::StyleTable;

/// Node payload stored in the arena.
#[derive(Debug)]
pub(crate) enum NodeKind {
    Element {
        name: String,
        style_name: Option<String>,
        attrs: Vec<u32>,
        children: Vec<u32>,
    },
    Text(String),
    Attribute {
        name: String,
        value: String,
    },
}

#[derive(Debug)]
pub(crate) struct NodeEntry {
    pub(crate) kind: NodeKind,
    pub(crate) parent: Option<u32>,
}

/// Shared, immutable node arena plus the document-level tables.
pub(crate) struct TreeCore {
    pub(crate) nodes: Vec<NodeEntry>,
    pub(crate) namespaces: BTreeMap<String, String>,
    pub(crate) styles: StyleTable,
    pub(crate) resources: BTreeMap<String, Vec<u8>>,
    pub(crate) warnings: Vec<String>,
}

impl fmt::Debug for TreeCore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeCore")
            .field("nodes", &self.nodes.len())
            .field("resources", &self.resources.len())
            .finish()
    }
}

/// A parsed document: an immutable tree, namespace prefixes as written,
/// resolved-on-demand styles, and any embedded container resources.
#[derive(Clone, Debug)]
pub struct DocumentTree {
    pub(crate) core: Arc<TreeCore>,
}

impl DocumentTree {
    /// The root element.
    pub fn root(&self) -> NodeRef {
        NodeRef { core: Arc::clone(&self.core), id: 0 }
    }

    /// Namespace prefix declarations seen during load, prefix to URI.
    pub fn namespaces(&self) -> &BTreeMap<String, String> {
        &self.core.namespaces
    }

    /// Styles collected from the document (and the container's styles entry).
    pub fn styles(&self) -> &StyleTable {
        &self.core.styles
    }

    /// Embedded container entries (e.g. pictures) by entry name.
    pub fn resources(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.core.resources
    }

    /// Non-fatal problems noticed while loading, e.g. a broken style cycle.
    pub fn load_warnings(&self) -> &[String] {
        &self.core.warnings
    }

    /// The scope a whole-document run starts from: the root's children act
    /// as the top-level node list.
    pub fn document_scope(&self) -> Fragment {
        Fragment::from_nodes(self.root().children().collect())
    }

    /// SHA-256 over the structural content (kinds, names, text, attributes,
    /// in preorder). Two trees with equal structure digest equally; any
    /// mutation would change it.
    pub fn structural_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (id, entry) in self.core.nodes.iter().enumerate() {
            hasher.update((id as u64).to_le_bytes());
            match &entry.kind {
                NodeKind::Element { name, style_name, attrs, children } => {
                    hasher.update([0u8]);
                    hasher.update(name.as_bytes());
                    hasher.update([0xff]);
                    if let Some(s) = style_name {
                        hasher.update(s.as_bytes());
                    }
                    for part in attrs.iter().chain(children.iter()) {
                        hasher.update(part.to_le_bytes());
                    }
                }
                NodeKind::Text(t) => {
                    hasher.update([1u8]);
                    hasher.update(t.as_bytes());
                }
                NodeKind::Attribute { name, value } => {
                    hasher.update([2u8]);
                    hasher.update(name.as_bytes());
                    hasher.update([0xff]);
                    hasher.update(value.as_bytes());
                }
            }
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// What a node is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Element,
    Text,
    Attribute,
}

/// Handle to one node of an immutable tree.
///
/// Identity is (tree, id): two handles to the same node compare equal, and
/// ids are preorder so comparing handles within one tree compares document
/// position.
#[derive(Clone)]
pub struct NodeRef {
    pub(crate) core: Arc<TreeCore>,
    pub(crate) id: u32,
}

impl PartialEq for NodeRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.core, &other.core) && self.id == other.id
    }
}

impl Eq for NodeRef {}

impl std::hash::Hash for NodeRef {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.core) as usize).hash(state);
        self.id.hash(state);
    }
}

impl PartialOrd for NodeRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NodeRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (Arc::as_ptr(&self.core) as usize, self.id)
            .cmp(&(Arc::as_ptr(&other.core) as usize, other.id))
    }
}

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.entry() {
            NodeKind::Element { name, .. } => write!(f, "Element<{name}>#{}", self.id),
            NodeKind::Text(t) => write!(f, "Text({t:?})#{}", self.id),
            NodeKind::Attribute { name, value } => {
                write!(f, "Attr({name}={value:?})#{}", self.id)
            }
        }
    }
}

impl NodeRef {
    fn entry(&self) -> &NodeKind {
        &self.core.nodes[self.id as usize].kind
    }

    fn make(&self, id: u32) -> NodeRef {
        NodeRef { core: Arc::clone(&self.core), id }
    }

    /// A free-standing text node that belongs to no document, e.g. a value
    /// produced by a selector rather than read from the input.
    pub fn synthetic_text(text: impl Into<String>) -> NodeRef {
        let core = TreeCore {
            nodes: vec![NodeEntry { kind: NodeKind::Text(text.into()), parent: None }],
            namespaces: BTreeMap::new(),
            styles: StyleTable::default(),
            resources: BTreeMap::new(),
            warnings: Vec::new(),
        };
        NodeRef { core: Arc::new(core), id: 0 }
    }

    pub fn kind(&self) -> Kind {
        match self.entry() {
            NodeKind::Element { .. } => Kind::Element,
            NodeKind::Text(_) => Kind::Text,
            NodeKind::Attribute { .. } => Kind::Attribute,
        }
    }

    pub fn is_element(&self) -> bool {
        self.kind() == Kind::Element
    }

    pub fn is_text(&self) -> bool {
        self.kind() == Kind::Text
    }

    pub fn is_attribute(&self) -> bool {
        self.kind() == Kind::Attribute
    }

    /// Qualified name as written, for elements and attributes.
    pub fn name(&self) -> Option<&str> {
        match self.entry() {
            NodeKind::Element { name, .. } | NodeKind::Attribute { name, .. } => Some(name),
            NodeKind::Text(_) => None,
        }
    }

    /// Local part of the name (after any prefix).
    pub fn local_name(&self) -> Option<&str> {
        self.name().map(|n| n.rsplit(':').next().unwrap_or(n))
    }

    /// Text-node content or attribute value.
    pub fn value(&self) -> Option<&str> {
        match self.entry() {
            NodeKind::Text(t) => Some(t),
            NodeKind::Attribute { value, .. } => Some(value),
            NodeKind::Element { .. } => None,
        }
    }

    /// Style name carried by the element (any `*:style-name` attribute).
    pub fn style_name(&self) -> Option<&str> {
        match self.entry() {
            NodeKind::Element { style_name, .. } => style_name.as_deref(),
            _ => None,
        }
    }

    pub fn parent(&self) -> Option<NodeRef> {
        self.core.nodes[self.id as usize].parent.map(|id| self.make(id))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeRef> + '_ {
        let ids: &[u32] = match self.entry() {
            NodeKind::Element { children, .. } => children,
            _ => &[],
        };
        ids.iter().map(move |&id| self.make(id))
    }

    pub fn attribute_nodes(&self) -> impl Iterator<Item = NodeRef> + '_ {
        let ids: &[u32] = match self.entry() {
            NodeKind::Element { attrs, .. } => attrs,
            _ => &[],
        };
        ids.iter().map(move |&id| self.make(id))
    }

    /// Attribute value by qualified name.
    pub fn attribute(&self, name: &str) -> Option<&str> {
        let ids: &[u32] = match self.entry() {
            NodeKind::Element { attrs, .. } => attrs,
            _ => return None,
        };
        for &id in ids {
            if let NodeKind::Attribute { name: n, value } = &self.core.nodes[id as usize].kind {
                if n == name {
                    return Some(value);
                }
            }
        }
        None
    }

    /// Siblings after this node, in document order.
    pub fn following_siblings(&self) -> Vec<NodeRef> {
        let Some(parent) = self.parent() else { return Vec::new() };
        let mut out = Vec::new();
        let mut seen_self = false;
        for child in parent.children() {
            if seen_self {
                out.push(child);
            } else if child.id == self.id {
                seen_self = true;
            }
        }
        out
    }

    /// This node plus all element and text descendants, preorder.
    pub fn descendants_or_self(&self) -> Vec<NodeRef> {
        let mut out = Vec::new();
        let mut stack = vec![self.id];
        while let Some(id) = stack.pop() {
            out.push(self.make(id));
            if let NodeKind::Element { children, .. } = &self.core.nodes[id as usize].kind {
                for &c in children.iter().rev() {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Concatenated descendant text in document order. Attribute nodes
    /// contribute their value.
    pub fn text(&self) -> String {
        let mut out = String::new();
        collect_text(self, &mut out);
        out
    }

    /// Resolved style property for this element, walking parent-style chains.
    pub fn resolved_style(&self, property: &str) -> Option<String> {
        let name = self.style_name()?;
        self.core.styles.resolve(name, property).map(str::to_owned)
    }
}

fn collect_text(node: &NodeRef, out: &mut String) {
    match node.entry() {
        NodeKind::Text(t) => out.push_str(t),
        NodeKind::Attribute { value, .. } => out.push_str(value),
        NodeKind::Element { .. } => {
            for child in node.children() {
                collect_text(&child, out);
            }
        }
    }
}

/// Ordered node collection: a block's sibling run, an evaluation scope, or a
/// synthetic selection.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fragment {
    nodes: Vec<NodeRef>,
}

impl Fragment {
    /// Wrap nodes in the given order. The caller vouches for ordering.
    pub fn from_nodes(nodes: Vec<NodeRef>) -> Fragment {
        Fragment { nodes }
    }

    pub fn single(node: NodeRef) -> Fragment {
        Fragment { nodes: vec![node] }
    }

    /// Sort into document order and drop duplicates.
    pub fn sorted(mut nodes: Vec<NodeRef>) -> Fragment {
        nodes.sort();
        nodes.dedup();
        Fragment { nodes }
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeRef> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Option<&NodeRef> {
        self.nodes.first()
    }

    /// Concatenated text of all nodes, in order.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            out.push_str(&node.text());
        }
        out
    }
}

/// Trim the ends and collapse every internal whitespace run to one space.
/// All text comparisons in conditions and attribute writes go through this.
pub fn normalize_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for ch in s.trim().chars() {
        if ch.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws && !out.is_empty() {
                out.push(' ');
            }
            in_ws = false;
            out.push(ch);
        }
    }
    out
}

/// Incremental preorder tree builder. Loaders feed it parse events; tests and
/// selectors use it to assemble synthetic structure.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<NodeEntry>,
    open: Vec<u32>,
    roots: Vec<u32>,
    pub(crate) namespaces: BTreeMap<String, String>,
    pub(crate) styles: StyleTable,
    pub(crate) resources: BTreeMap<String, Vec<u8>>,
    pub(crate) warnings: Vec<String>,
}

impl TreeBuilder {
    pub fn new() -> TreeBuilder {
        TreeBuilder::default()
    }

    fn push(&mut self, kind: NodeKind) -> u32 {
        let id = self.nodes.len() as u32;
        let parent = self.open.last().copied();
        self.nodes.push(NodeEntry { kind, parent });
        id
    }

    /// Open an element as a child of the currently open element (or as a
    /// root). Attributes must be added before any children so ids stay in
    /// document order.
    pub fn open_element(&mut self, name: impl Into<String>) -> u32 {
        let id = self.push(NodeKind::Element {
            name: name.into(),
            style_name: None,
            attrs: Vec::new(),
            children: Vec::new(),
        });
        match self.open.last().copied() {
            Some(parent) => self.attach_child(parent, id),
            None => self.roots.push(id),
        }
        self.open.push(id);
        id
    }

    fn attach_child(&mut self, parent: u32, child: u32) {
        if let NodeKind::Element { children, .. } = &mut self.nodes[parent as usize].kind {
            children.push(child);
        }
    }

    pub fn attribute(&mut self, name: impl Into<String>, value: impl Into<String>) {
        let owner = *self.open.last().expect("attribute outside an element");
        let name = name.into();
        let value = value.into();
        if let NodeKind::Element { children, .. } = &self.nodes[owner as usize].kind {
            assert!(children.is_empty(), "attributes must precede children");
        }
        if name.starts_with("xmlns:") {
            let prefix = name["xmlns:".len()..].to_string();
            self.namespaces.entry(prefix).or_insert_with(|| value.clone());
        } else if name == "xmlns" {
            self.namespaces.entry(String::new()).or_insert_with(|| value.clone());
        }
        let is_style_name = name.rsplit(':').next() == Some("style-name");
        let id = self.push(NodeKind::Attribute { name, value: value.clone() });
        self.nodes[id as usize].parent = Some(owner);
        if let NodeKind::Element { attrs, style_name, .. } = &mut self.nodes[owner as usize].kind {
            attrs.push(id);
            if is_style_name && style_name.is_none() {
                *style_name = Some(value);
            }
        }
    }

    /// Append text under the open element, merging with a preceding text
    /// sibling so adjacent runs stay one node.
    pub fn text(&mut self, text: impl AsRef<str>) {
        let text = text.as_ref();
        if text.is_empty() {
            return;
        }
        let Some(&owner) = self.open.last() else {
            // Top-level text is only legal as whitespace between elements.
            return;
        };
        if let NodeKind::Element { children, .. } = &self.nodes[owner as usize].kind {
            if let Some(&last) = children.last() {
                if let NodeKind::Text(existing) = &mut self.nodes[last as usize].kind {
                    existing.push_str(text);
                    return;
                }
            }
        }
        let id = self.push(NodeKind::Text(text.to_string()));
        self.attach_child(owner, id);
    }

    pub fn close_element(&mut self) {
        self.open.pop().expect("close without matching open");
    }

    pub fn depth(&self) -> usize {
        self.open.len()
    }

    pub(crate) fn root_count(&self) -> usize {
        self.roots.len()
    }

    /// Finish into a tree. There must be exactly one root element and no
    /// element left open.
    pub fn finish(mut self) -> DocumentTree {
        assert!(self.open.is_empty(), "unclosed element at finish");
        assert_eq!(self.roots.len(), 1, "expected exactly one root element");
        self.styles.break_cycles(&mut self.warnings);
        debug_assert_eq!(self.roots[0], 0);
        DocumentTree {
            core: Arc::new(TreeCore {
                nodes: self.nodes,
                namespaces: self.namespaces,
                styles: self.styles,
                resources: self.resources,
                warnings: self.warnings,
            }),
        }
    }
}
