//! Path expressions for locating nodes.
//!
//! The dialect is a small XPath subset with one twist: expressions are
//! evaluated against a *fragment* (an ordered node list), and the first step
//! treats the fragment's nodes as the top level. `/text:p` over a fragment
//! therefore matches fragment nodes named `text:p` themselves, not their
//! children; later steps walk downward as usual. A leading `/` is accepted
//! and ignored, so absolute and relative spellings select the same nodes.
//!
//! Supported per step: the child axis (default), `@attr`, `self::`,
//! `descendant-or-self::`, name tests with `*`, and one optional predicate
//! of the forms `contains(text(),'..')`, `text()='..'` and
//! `starts-with(text(),'..')`. Branches joined with `|` are unioned. Name
//! tests compare the written prefixed name, so `text:p` matches exactly what
//! the document spells `text:p`. Results come back in document order without
//! duplicates.

use std::collections::BTreeSet;
use std::fmt;

use crate::docmodel::{Fragment, NodeRef};

/// A parsed path expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathExpr {
    branches: Vec<Branch>,
    source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Branch {
    absolute: bool,
    steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Step {
    axis: Axis,
    test: NameTest,
    predicate: Option<Predicate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Child,
    Attribute,
    SelfAxis,
    DescendantOrSelf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum NameTest {
    Any,
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Predicate {
    Contains(String),
    Equals(String),
    StartsWith(String),
}

/// Parse failure with the byte position inside the expression.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid path expression at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { position, message: message.into() })
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for PathExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PathExpr::parse(s)
    }
}

impl PathExpr {
    pub fn parse(source: &str) -> Result<PathExpr, ParseError> {
        if source.trim().is_empty() {
            return err(0, "empty expression");
        }
        let mut branches = Vec::new();
        let mut offset = 0;
        for piece in source.split('|') {
            let trimmed = piece.trim();
            let at = offset + piece.len() - piece.trim_start().len();
            if trimmed.is_empty() {
                return err(at, "empty union branch");
            }
            branches.push(parse_branch(trimmed, at)?);
            offset += piece.len() + 1;
        }
        Ok(PathExpr { branches, source: source.trim().to_string() })
    }

    /// Evaluate over a fragment. The result is in document order with
    /// duplicates removed; nodes from distinct trees order by tree identity.
    pub fn eval(&self, scope: &Fragment) -> Fragment {
        let mut out: BTreeSet<NodeRef> = BTreeSet::new();
        for branch in &self.branches {
            let mut current: Vec<NodeRef> = scope.nodes().to_vec();
            for (index, step) in branch.steps.iter().enumerate() {
                current = apply_step(step, &current, index == 0);
                if current.is_empty() {
                    break;
                }
            }
            out.extend(current);
        }
        Fragment::sorted(out.into_iter().collect())
    }

    /// True when evaluating over `scope` selects at least one node.
    pub fn matches(&self, scope: &Fragment) -> bool {
        !self.eval(scope).is_empty()
    }
}

fn parse_branch(text: &str, base: usize) -> Result<Branch, ParseError> {
    let (absolute, rest, mut at) = match text.strip_prefix('/') {
        Some(rest) => (true, rest, base + 1),
        None => (false, text, base),
    };
    if rest.starts_with('/') {
        return err(at, "'//' is not supported, use descendant-or-self::");
    }
    let mut steps = Vec::new();
    for piece in rest.split('/') {
        let trimmed = piece.trim();
        let step_at = at + piece.len() - piece.trim_start().len();
        if trimmed.is_empty() {
            return err(step_at, "empty step");
        }
        steps.push(parse_step(trimmed, step_at)?);
        at += piece.len() + 1;
    }
    Ok(Branch { absolute, steps })
}

fn parse_step(text: &str, at: usize) -> Result<Step, ParseError> {
    let (head, predicate) = match text.find('[') {
        Some(open) => {
            if !text.ends_with(']') {
                return err(at + text.len(), "unterminated predicate, expected ']'");
            }
            let inner = &text[open + 1..text.len() - 1];
            if inner.contains('[') {
                return err(at + open + 1, "at most one predicate per step");
            }
            (text[..open].trim_end(), Some(parse_predicate(inner.trim(), at + open + 1)?))
        }
        None => {
            if text.contains(']') {
                return err(at, "']' without matching '['");
            }
            (text, None)
        }
    };

    let (axis, test_text) = if let Some(rest) = head.strip_prefix('@') {
        (Axis::Attribute, rest)
    } else if let Some((axis_name, rest)) = head.split_once("::") {
        let axis = match axis_name.trim() {
            "self" => Axis::SelfAxis,
            "descendant-or-self" => Axis::DescendantOrSelf,
            "child" => Axis::Child,
            "attribute" => Axis::Attribute,
            other => return err(at, format!("unknown axis '{other}'")),
        };
        (axis, rest)
    } else {
        (Axis::Child, head)
    };

    let test_text = test_text.trim();
    if test_text.is_empty() {
        return err(at, "missing name test");
    }
    let test = if test_text == "*" {
        NameTest::Any
    } else {
        if let Some(bad) = test_text.find(|c: char| "/@[]|*\"'".contains(c) || c.is_whitespace()) {
            return err(at + bad, format!("unexpected character in name test '{test_text}'"));
        }
        NameTest::Name(test_text.to_string())
    };
    Ok(Step { axis, test, predicate })
}

fn parse_predicate(text: &str, at: usize) -> Result<Predicate, ParseError> {
    if let Some(rest) = text.strip_prefix("contains") {
        let literal = parse_text_call(rest, at, "contains")?;
        return Ok(Predicate::Contains(literal));
    }
    if let Some(rest) = text.strip_prefix("starts-with") {
        let literal = parse_text_call(rest, at, "starts-with")?;
        return Ok(Predicate::StartsWith(literal));
    }
    if let Some(rest) = text.strip_prefix("text()") {
        let rest = rest.trim_start();
        let Some(rest) = rest.strip_prefix('=') else {
            return err(at, "expected '=' after text()");
        };
        let literal = parse_literal(rest.trim(), at, true)?;
        return Ok(Predicate::Equals(literal));
    }
    err(at, format!("unsupported predicate '{text}'"))
}

/// Parse the tail of `contains(text(),'lit')` style calls, starting at the
/// opening parenthesis.
fn parse_text_call(rest: &str, at: usize, name: &str) -> Result<String, ParseError> {
    let rest = rest.trim_start();
    let Some(rest) = rest.strip_prefix('(') else {
        return err(at, format!("expected '(' after {name}"));
    };
    let rest = rest.trim_start();
    let Some(rest) = rest.strip_prefix("text()") else {
        return err(at, format!("{name} only supports text() as first argument"));
    };
    let rest = rest.trim_start();
    let Some(rest) = rest.strip_prefix(',') else {
        return err(at, format!("expected ',' in {name}(..)"));
    };
    let rest = rest.trim();
    let Some(rest) = rest.strip_suffix(')') else {
        return err(at, format!("expected ')' closing {name}(..)"));
    };
    parse_literal(rest.trim(), at, false)
}

fn parse_literal(text: &str, at: usize, _tail: bool) -> Result<String, ParseError> {
    for quote in ['\'', '"'] {
        if let Some(rest) = text.strip_prefix(quote) {
            if let Some(inner) = rest.strip_suffix(quote) {
                if inner.contains(quote) {
                    return err(at, "quote character inside literal");
                }
                return Ok(inner.to_string());
            }
            return err(at, "unterminated string literal");
        }
    }
    err(at, "expected a quoted string literal")
}

fn apply_step(step: &Step, context: &[NodeRef], first: bool) -> Vec<NodeRef> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for node in context {
        for candidate in candidates(step.axis, node, first) {
            if !test_matches(&step.test, step.axis, &candidate) {
                continue;
            }
            if let Some(pred) = &step.predicate {
                if !predicate_holds(pred, &candidate) {
                    continue;
                }
            }
            if seen.insert(candidate.clone()) {
                out.push(candidate);
            }
        }
    }
    out
}

/// Candidate nodes for one axis. On the first step the fragment's own nodes
/// are the top level: child and self both test the node itself, attributes
/// come straight off it.
fn candidates(axis: Axis, node: &NodeRef, first: bool) -> Vec<NodeRef> {
    match axis {
        Axis::Child if first => vec![node.clone()],
        Axis::Child => node.children().collect(),
        Axis::SelfAxis => vec![node.clone()],
        Axis::DescendantOrSelf => node.descendants_or_self(),
        Axis::Attribute => node.attribute_nodes().collect(),
    }
}

fn test_matches(test: &NameTest, axis: Axis, node: &NodeRef) -> bool {
    let principal = match axis {
        Axis::Attribute => node.is_attribute(),
        _ => node.is_element(),
    };
    if !principal {
        return false;
    }
    match test {
        NameTest::Any => true,
        NameTest::Name(name) => node.name() == Some(name.as_str()),
    }
}

/// Predicates compare against the node's raw concatenated text, without
/// whitespace normalization.
fn predicate_holds(pred: &Predicate, node: &NodeRef) -> bool {
    let text = node.text();
    match pred {
        Predicate::Contains(lit) => text.contains(lit),
        Predicate::Equals(lit) => text == *lit,
        Predicate::StartsWith(lit) => text.starts_with(lit),
    }
}
