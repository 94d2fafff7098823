//! Brute-force block construction over flat documents.
//!
//! An independent reimplementation of the two-phase semantics on plain
//! vectors: nodes are (name, text) entries of a single sibling run, block
//! types are name sets, and the expected block list is computed index by
//! index. The engine under test parses the same structure from XML and
//! must produce exactly the same (type, ordinal, node indices) list.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

pub const NAMES: [&str; 4] = ["a", "b", "c", "d"];
pub const TEXTS: [&str; 6] = ["", "x", "y", "x y", "  x  ", "z"];

/// One top-level node: an element with text content, or a bare text node.
#[derive(Clone, Debug)]
pub struct FlatNode {
    pub name: Option<&'static str>,
    pub text: &'static str,
}

#[derive(Clone, Debug)]
pub struct FlatDoc {
    pub nodes: Vec<FlatNode>,
}

#[derive(Clone, Debug)]
pub enum OracleGrouping {
    None,
    Group(Vec<&'static str>),
    End(Vec<&'static str>),
    NextBlock,
}

#[derive(Clone, Debug)]
pub struct OracleDef {
    pub id: String,
    pub starts: Vec<&'static str>,
    pub contains: Option<&'static str>,
    pub grouping: OracleGrouping,
}

impl FlatDoc {
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<doc>");
        for node in &self.nodes {
            match node.name {
                Some(name) => {
                    if node.text.is_empty() {
                        out.push_str(&format!("<{name}/>"));
                    } else {
                        out.push_str(&format!("<{name}>{}</{name}>", node.text));
                    }
                }
                None => out.push_str(node.text),
            }
        }
        out.push_str("</doc>");
        out
    }
}

pub fn rules_xml(defs: &[OracleDef]) -> String {
    let mut out = String::from("<RuleSet ID='oracle'>");
    for def in defs {
        out.push_str(&format!("<Block ID='{}'><Definition>", def.id));
        out.push_str(&format!("<Start matches='{}'/>", def.starts.join(" | ")));
        if let Some(value) = def.contains {
            out.push_str(&format!("<Condition type='contains' value='{value}'/>"));
        }
        match &def.grouping {
            OracleGrouping::None => {}
            OracleGrouping::Group(names) => out.push_str(&format!(
                "<Grouping type='GROUPING_EXPRESSION'><GroupingExpression matches='{}'/></Grouping>",
                names.join(" | ")
            )),
            OracleGrouping::End(names) => out.push_str(&format!(
                "<Grouping type='END_EXPRESSION'><GroupingExpression matches='{}'/></Grouping>",
                names.join(" | ")
            )),
            OracleGrouping::NextBlock => out.push_str("<Grouping type='NEXT_BLOCK'/>"),
        }
        out.push_str("</Definition></Block>");
    }
    out.push_str("</RuleSet>");
    out
}

fn normalized(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn node_matches(node: &FlatNode, names: &[&str]) -> bool {
    node.name.is_some_and(|n| names.contains(&n))
}

/// The expected block list: (type id, ordinal, node indices), in document
/// order of the start nodes.
pub fn expected_blocks(doc: &FlatDoc, defs: &[OracleDef]) -> Vec<(String, u32, Vec<usize>)> {
    // Phase 1: each type claims its surviving start nodes in declaration
    // order; a node belongs to the first type that claims it.
    let mut claimed_by: Vec<Option<usize>> = vec![None; doc.nodes.len()];
    let mut claims: Vec<(usize, usize)> = Vec::new();
    for (def_index, def) in defs.iter().enumerate() {
        for (node_index, node) in doc.nodes.iter().enumerate() {
            if claimed_by[node_index].is_some() || !node_matches(node, &def.starts) {
                continue;
            }
            if let Some(value) = def.contains {
                if !normalized(node.text).contains(value) {
                    continue;
                }
            }
            claimed_by[node_index] = Some(def_index);
            claims.push((node_index, def_index));
        }
    }
    claims.sort_by_key(|&(node_index, _)| node_index);

    // Phase 2: expansion over following siblings, per grouping kind.
    let mut ordinals = vec![0u32; defs.len()];
    let mut out = Vec::new();
    for &(start, def_index) in &claims {
        let def = &defs[def_index];
        let mut nodes = vec![start];
        match &def.grouping {
            OracleGrouping::None => {}
            OracleGrouping::Group(names) => {
                for next in start + 1..doc.nodes.len() {
                    if node_matches(&doc.nodes[next], names) {
                        nodes.push(next);
                    } else {
                        break;
                    }
                }
            }
            OracleGrouping::End(names) => {
                for next in start + 1..doc.nodes.len() {
                    if node_matches(&doc.nodes[next], names) {
                        break;
                    }
                    nodes.push(next);
                }
            }
            OracleGrouping::NextBlock => {
                for next in start + 1..doc.nodes.len() {
                    if claimed_by[next].is_some() {
                        break;
                    }
                    nodes.push(next);
                }
            }
        }
        ordinals[def_index] += 1;
        out.push((def.id.clone(), ordinals[def_index], nodes));
    }
    out
}

pub fn random_doc(rng: &mut impl Rng) -> FlatDoc {
    let len = rng.gen_range(0..=40);
    let mut nodes: Vec<FlatNode> = Vec::with_capacity(len);
    for _ in 0..len {
        // Two adjacent bare texts would merge into one parsed text node and
        // desynchronize the index mapping, so text only follows an element.
        let text_allowed = nodes.last().is_some_and(|last: &FlatNode| last.name.is_some());
        if text_allowed && rng.gen_bool(0.15) {
            nodes.push(FlatNode { name: None, text: [" ", "x", " y "][rng.gen_range(0..3)] });
        } else {
            nodes.push(FlatNode {
                name: Some(NAMES[rng.gen_range(0..NAMES.len())]),
                text: TEXTS[rng.gen_range(0..TEXTS.len())],
            });
        }
    }
    FlatDoc { nodes }
}

fn random_name_set(rng: &mut impl Rng, min: usize) -> Vec<&'static str> {
    let mut pool: Vec<&'static str> = NAMES.to_vec();
    pool.shuffle(rng);
    let take = rng.gen_range(min..=pool.len());
    let mut set: Vec<&'static str> = pool.into_iter().take(take).collect();
    set.sort_unstable();
    set
}

pub fn random_defs(rng: &mut impl Rng) -> Vec<OracleDef> {
    let count = rng.gen_range(1..=3);
    (0..count)
        .map(|index| {
            let grouping = match rng.gen_range(0..4) {
                0 => OracleGrouping::None,
                1 => OracleGrouping::Group(random_name_set(rng, 1)),
                2 => OracleGrouping::End(random_name_set(rng, 1)),
                _ => OracleGrouping::NextBlock,
            };
            OracleDef {
                id: format!("t{index}"),
                starts: random_name_set(rng, 1),
                contains: match rng.gen_range(0..3) {
                    0 => Some("x"),
                    1 => Some("y"),
                    _ => None,
                },
                grouping,
            }
        })
        .collect()
}
