//! Style table with parent-chain inheritance.
//!
//! Office formats describe formatting indirectly: elements carry a style
//! name, styles carry properties and may point at a parent style. The table
//! keeps that indirection and resolves a property by walking the chain,
//! nearest definition first.

use std::collections::BTreeMap;

/// One named style.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StyleEntry {
    pub parent: Option<String>,
    pub properties: BTreeMap<String, String>,
}

/// All styles of a document, by name.
#[derive(Clone, Debug, Default)]
pub struct StyleTable {
    entries: BTreeMap<String, StyleEntry>,
}

impl StyleTable {
    pub fn get(&self, name: &str) -> Option<&StyleEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert a style. An existing entry of the same name wins: documents
    /// define styles closest to the content first (automatic styles before
    /// any shared styles entry), and the first definition is kept.
    pub fn insert_if_absent(&mut self, name: impl Into<String>, entry: StyleEntry) {
        self.entries.entry(name.into()).or_insert(entry);
    }

    /// Resolve a property by walking the parent chain from `name` upward.
    /// The first style defining the property wins. Unknown style or parent
    /// names end the walk.
    pub fn resolve(&self, name: &str, property: &str) -> Option<&str> {
        let mut current = Some(name);
        while let Some(style_name) = current {
            let entry = self.entries.get(style_name)?;
            if let Some(value) = entry.properties.get(property) {
                return Some(value);
            }
            current = entry.parent.as_deref();
        }
        None
    }

    /// Cut parent links that would loop. Walks every chain; on the first
    /// revisited name the link is dropped and a warning recorded, so later
    /// resolution always terminates.
    pub(crate) fn break_cycles(&mut self, warnings: &mut Vec<String>) {
        let names: Vec<String> = self.entries.keys().cloned().collect();
        for start in names {
            let mut seen = vec![start.clone()];
            let mut current = start;
            while let Some(parent) = self.entries.get(&current).and_then(|e| e.parent.clone()) {
                if seen.contains(&parent) {
                    warnings.push(format!(
                        "style cycle broken: {current} no longer inherits from {parent}"
                    ));
                    if let Some(entry) = self.entries.get_mut(&current) {
                        entry.parent = None;
                    }
                    break;
                }
                seen.push(parent.clone());
                current = parent;
            }
        }
    }
}

/// Map an office-format property attribute onto the canonical key set.
/// Returns `(key, value)`; attributes that express a known trait are
/// canonicalized, everything else passes through under its written name.
pub(crate) fn canonical_property(attr_name: &str, raw: &str) -> (String, String) {
    match attr_name {
        "fo:font-weight" => ("bold".into(), (raw == "bold").to_string()),
        "fo:font-style" => ("italic".into(), (raw == "italic").to_string()),
        "fo:background-color" => ("background-color".into(), raw.to_string()),
        _ => (attr_name.to_string(), raw.to_string()),
    }
}
