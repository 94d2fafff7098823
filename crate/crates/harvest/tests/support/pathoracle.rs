//! Reference-evaluator conformance for the path dialect.
//!
//! Both evaluators run over the same unprefixed document and results are
//! compared as stable node keys: elements by preorder position, attributes
//! by owner position and name. The reference side is sxd-xpath, a full
//! XPath 1.0 engine, with the dialect's two deviations translated:
//!
//! - evaluation starts at the root element's children rather than at the
//!   root, and the first step tests those nodes themselves, so a leading
//!   `@x` or `descendant-or-self::` step needs a `*/` prefix and a leading
//!   `self::` drops (plain name and `*` steps line up as written);
//! - `text()` in predicates means the node's whole concatenated text, which
//!   is XPath's `.`, not XPath's first-text-child `text()`.

#![allow(dead_code)]

use harvest::docmodel::DocumentTree;
use harvest::pathlang::PathExpr;
use sxd_document::dom::{ChildOfElement, ChildOfRoot, Element};
use sxd_document::Package;
use sxd_xpath::{Context, Factory, Value};

/// Translate one dialect expression into reference XPath, relative to the
/// document's root element.
pub fn translate(ours: &str) -> String {
    ours.split('|')
        .map(|branch| {
            let branch = branch.trim();
            let branch = branch.strip_prefix('/').unwrap_or(branch);
            let branch = branch.replace("text()", ".");
            if branch.starts_with('@') || branch.starts_with("descendant-or-self::") {
                format!("*/{branch}")
            } else if let Some(rest) = branch.strip_prefix("self::") {
                rest.to_string()
            } else {
                branch
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Result keys from the engine under test, sorted.
pub fn our_keys(tree: &DocumentTree, expr: &str) -> Vec<String> {
    let parsed = PathExpr::parse(expr).unwrap_or_else(|e| panic!("{expr}: {e}"));
    let scope = tree.document_scope();
    let elements = element_order(tree);
    let mut keys: Vec<String> = parsed
        .eval(&scope)
        .iter()
        .map(|node| {
            if node.is_attribute() {
                let owner = node.parent().expect("attribute has an owner");
                let owner_key = elements.iter().position(|e| *e == owner).unwrap();
                format!("a{}:{}", owner_key, node.name().unwrap_or(""))
            } else {
                let key = elements.iter().position(|e| e == node).unwrap();
                format!("e{key}")
            }
        })
        .collect();
    keys.sort();
    keys
}

fn element_order(tree: &DocumentTree) -> Vec<harvest::docmodel::NodeRef> {
    tree.root().descendants_or_self().into_iter().filter(|n| n.is_element()).collect()
}

/// Result keys from the reference evaluator, sorted.
pub fn ref_keys(xml: &str, expr: &str) -> Vec<String> {
    let package = sxd_document::parser::parse(xml).expect("reference parser accepts the fixture");
    let root = root_element(&package);
    let mut order = Vec::new();
    preorder(root, &mut order);

    let factory = Factory::new();
    let xpath = factory
        .build(expr)
        .unwrap_or_else(|e| panic!("{expr}: {e}"))
        .expect("non-empty expression");
    let value = xpath
        .evaluate(&Context::new(), root)
        .unwrap_or_else(|e| panic!("{expr}: {e}"));
    let Value::Nodeset(set) = value else {
        panic!("{expr}: reference evaluation produced a non-nodeset")
    };

    let mut keys: Vec<String> = set
        .iter()
        .map(|node| match node {
            sxd_xpath::nodeset::Node::Element(element) => {
                let key = order.iter().position(|e| *e == element).unwrap();
                format!("e{key}")
            }
            sxd_xpath::nodeset::Node::Attribute(attribute) => {
                let owner = attribute.parent().expect("attribute has an owner");
                let owner_key = order.iter().position(|e| *e == owner).unwrap();
                format!("a{}:{}", owner_key, attribute.name().local_part())
            }
            other => panic!("{expr}: unexpected reference node {other:?}"),
        })
        .collect();
    keys.sort();
    keys
}

fn root_element(package: &Package) -> Element<'_> {
    package
        .as_document()
        .root()
        .children()
        .into_iter()
        .find_map(|child| match child {
            ChildOfRoot::Element(element) => Some(element),
            _ => None,
        })
        .expect("document has a root element")
}

fn preorder<'d>(element: Element<'d>, out: &mut Vec<Element<'d>>) {
    out.push(element);
    for child in element.children() {
        if let ChildOfElement::Element(inner) = child {
            preorder(inner, out);
        }
    }
}
