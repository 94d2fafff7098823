//! Rule file loader.
//!
//! Rule sets are XML documents. Loading validates everything eagerly:
//! unknown elements or attributes, missing IDs, unparseable path or regular
//! expressions, unknown selector or action names, and malformed parameter
//! lists all fail the load, each error naming the RuleSet/Block/Rule path
//! it occurred under. A rule set that loads will not fail later for
//! grammatical reasons.

use crate::conditions::{anchored_regex, Condition};
use crate::docmodel::{load_xml, NodeRef};
use crate::pathlang::PathExpr;
use crate::selectors::{BoundSelector, Params};

use super::registry::Registry;
use super::{BlockDef, Grouping, Hook, Rule, RuleAction, RuleSet};

/// Load failure, naming the position in the rule structure.
#[derive(Debug, thiserror::Error)]
#[error("at {path}: {message}")]
pub struct RuleLoadError {
    pub path: String,
    pub message: String,
}

struct Ctx<'a> {
    registry: &'a Registry,
    path: Vec<String>,
}

impl Ctx<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, RuleLoadError> {
        Err(RuleLoadError {
            path: if self.path.is_empty() { "document".into() } else { self.path.join(" > ") },
            message: message.into(),
        })
    }
}

/// Parse `key=value;key=value` parameter strings. Keys are trimmed, values
/// are taken as written; duplicate keys and pieces without `=` are errors.
pub fn parse_params(raw: &str) -> Result<Params, String> {
    let mut params = Params::new();
    for piece in raw.split(';') {
        if piece.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = piece.split_once('=') else {
            return Err(format!("parameter '{piece}' has no '='"));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(format!("parameter '{piece}' has an empty key"));
        }
        if params.insert(key.clone(), value.to_string()).is_some() {
            return Err(format!("duplicate parameter '{key}'"));
        }
    }
    Ok(params)
}

/// Load a rule set document, binding all selector and action names through
/// the registry.
pub fn load_rules(bytes: &[u8], registry: &Registry) -> Result<RuleSet, RuleLoadError> {
    let tree = load_xml(bytes)
        .map_err(|e| RuleLoadError { path: "document".into(), message: e.to_string() })?;
    let mut ctx = Ctx { registry, path: Vec::new() };
    let root = tree.root();
    if root.name() != Some("RuleSet") {
        return ctx.fail(format!(
            "root element must be RuleSet, found {}",
            root.name().unwrap_or("?")
        ));
    }
    parse_rule_set(&root, &mut ctx, true)
}

/// Element children; any non-whitespace text inside a grammar element is an
/// error.
fn element_children(node: &NodeRef, ctx: &Ctx<'_>) -> Result<Vec<NodeRef>, RuleLoadError> {
    let mut out = Vec::new();
    for child in node.children() {
        if child.is_text() {
            let text = child.value().unwrap_or("");
            if !text.trim().is_empty() {
                return ctx.fail(format!("unexpected text '{}'", text.trim()));
            }
        } else {
            out.push(child);
        }
    }
    Ok(out)
}

/// Reject attributes outside `allowed`. Namespace declarations and xsi
/// schema attributes are always allowed on the root rule set.
fn check_attrs(
    node: &NodeRef,
    allowed: &[&str],
    allow_namespace_decls: bool,
    ctx: &Ctx<'_>,
) -> Result<(), RuleLoadError> {
    for attr in node.attribute_nodes() {
        let name = attr.name().unwrap_or("");
        if allowed.contains(&name) {
            continue;
        }
        if allow_namespace_decls
            && (name == "xmlns" || name.starts_with("xmlns:") || name.starts_with("xsi:"))
        {
            continue;
        }
        return ctx.fail(format!(
            "unexpected attribute '{name}' on {}",
            node.name().unwrap_or("?")
        ));
    }
    Ok(())
}

fn required_attr<'n>(
    node: &'n NodeRef,
    name: &str,
    ctx: &Ctx<'_>,
) -> Result<&'n str, RuleLoadError> {
    match node.attribute(name) {
        Some(value) if !value.trim().is_empty() => Ok(value),
        Some(_) => ctx.fail(format!("attribute '{name}' must not be empty")),
        None => ctx.fail(format!(
            "missing required attribute '{name}' on {}",
            node.name().unwrap_or("?")
        )),
    }
}

fn parse_rule_set(
    node: &NodeRef,
    ctx: &mut Ctx<'_>,
    is_root: bool,
) -> Result<RuleSet, RuleLoadError> {
    check_attrs(node, &["ID", "pre", "post"], is_root, ctx)?;
    let id = required_attr(node, "ID", ctx)?.to_string();
    ctx.path.push(format!("RuleSet {id}"));

    // A hook attribute is an action name, optionally followed by
    // parameters in the Action syntax: "descend;path=person;overwrite=true".
    let hook = |raw: Option<&str>, ctx: &Ctx<'_>| -> Result<Option<Hook>, RuleLoadError> {
        match raw {
            None => Ok(None),
            Some(raw) => {
                let (name, params_raw) = match raw.split_once(';') {
                    Some((name, rest)) => (name.trim(), rest),
                    None => (raw.trim(), ""),
                };
                let fail = |message: String| RuleLoadError {
                    path: ctx.path.join(" > "),
                    message,
                };
                let Some(factory) = ctx.registry.action(name) else {
                    return ctx.fail(format!("unknown action '{name}'"));
                };
                let params = parse_params(params_raw)
                    .map_err(|e| fail(format!("action '{name}': {e}")))?;
                let action =
                    factory(&params).map_err(|e| fail(format!("action '{name}': {e}")))?;
                Ok(Some(Hook { name: name.to_string(), action }))
            }
        }
    };
    let pre = hook(node.attribute("pre"), ctx)?;
    let post = hook(node.attribute("post"), ctx)?;

    let mut blocks = Vec::new();
    for child in element_children(node, ctx)? {
        match child.name() {
            Some("Block") => {
                let block = parse_block(&child, ctx)?;
                if blocks.iter().any(|b: &BlockDef| b.id == block.id) {
                    return ctx.fail(format!("duplicate Block ID '{}'", block.id));
                }
                blocks.push(block);
            }
            other => {
                return ctx.fail(format!(
                    "unexpected element '{}' in RuleSet",
                    other.unwrap_or("?")
                ))
            }
        }
    }
    ctx.path.pop();
    Ok(RuleSet { id, pre, post, blocks })
}

fn parse_block(node: &NodeRef, ctx: &mut Ctx<'_>) -> Result<BlockDef, RuleLoadError> {
    check_attrs(node, &["ID"], false, ctx)?;
    let id = required_attr(node, "ID", ctx)?.to_string();
    ctx.path.push(format!("Block {id}"));

    let mut definition: Option<NodeRef> = None;
    let mut rules_node: Option<NodeRef> = None;
    for child in element_children(node, ctx)? {
        match child.name() {
            Some("Definition") => {
                if definition.replace(child).is_some() {
                    return ctx.fail("more than one Definition");
                }
            }
            Some("Rules") => {
                if rules_node.replace(child).is_some() {
                    return ctx.fail("more than one Rules element");
                }
            }
            other => {
                return ctx.fail(format!("unexpected element '{}' in Block", other.unwrap_or("?")))
            }
        }
    }
    let Some(definition) = definition else {
        return ctx.fail("Block requires a Definition");
    };

    check_attrs(&definition, &[], false, ctx)?;
    let mut start: Option<PathExpr> = None;
    let mut condition = Condition::Always;
    let mut saw_condition = false;
    let mut grouping = Grouping::None;
    let mut saw_grouping = false;
    for child in element_children(&definition, ctx)? {
        match child.name() {
            Some("Start") => {
                check_attrs(&child, &["matches"], false, ctx)?;
                let raw = required_attr(&child, "matches", ctx)?;
                let expr = match PathExpr::parse(raw) {
                    Ok(expr) => expr,
                    Err(e) => return ctx.fail(format!("Start: {e}")),
                };
                if start.replace(expr).is_some() {
                    return ctx.fail("more than one Start");
                }
            }
            Some("Condition") => {
                if saw_condition {
                    return ctx.fail("more than one Condition in Definition");
                }
                saw_condition = true;
                condition = parse_condition(&child, ctx)?;
            }
            Some("Grouping") => {
                if saw_grouping {
                    return ctx.fail("more than one Grouping");
                }
                saw_grouping = true;
                grouping = parse_grouping(&child, ctx)?;
            }
            other => {
                return ctx.fail(format!(
                    "unexpected element '{}' in Definition",
                    other.unwrap_or("?")
                ))
            }
        }
    }
    let Some(start) = start else {
        return ctx.fail("Definition requires a Start");
    };

    let mut rules = Vec::new();
    if let Some(rules_node) = rules_node {
        check_attrs(&rules_node, &[], false, ctx)?;
        for child in element_children(&rules_node, ctx)? {
            match child.name() {
                Some("Rule") => rules.push(parse_rule(&child, ctx)?),
                other => {
                    return ctx.fail(format!(
                        "unexpected element '{}' in Rules",
                        other.unwrap_or("?")
                    ))
                }
            }
        }
    }

    ctx.path.pop();
    Ok(BlockDef { id, start, condition, grouping, rules })
}

fn parse_grouping(node: &NodeRef, ctx: &Ctx<'_>) -> Result<Grouping, RuleLoadError> {
    check_attrs(node, &["type"], false, ctx)?;
    let kind = required_attr(node, "type", ctx)?;
    let children = element_children(node, ctx)?;
    let expression = |children: &[NodeRef]| -> Result<PathExpr, RuleLoadError> {
        let [child] = children else {
            return ctx.fail(format!(
                "Grouping type {kind} requires exactly one GroupingExpression"
            ));
        };
        if child.name() != Some("GroupingExpression") {
            return ctx.fail(format!(
                "unexpected element '{}' in Grouping",
                child.name().unwrap_or("?")
            ));
        }
        check_attrs(child, &["matches"], false, ctx)?;
        let raw = required_attr(child, "matches", ctx)?;
        PathExpr::parse(raw).map_err(|e| RuleLoadError {
            path: ctx.path.join(" > "),
            message: format!("GroupingExpression: {e}"),
        })
    };
    match kind {
        "GROUPING_EXPRESSION" => Ok(Grouping::Expression(expression(&children)?)),
        "END_EXPRESSION" => Ok(Grouping::EndExpression(expression(&children)?)),
        "NEXT_BLOCK" | "NONE" => {
            if !children.is_empty() {
                return ctx.fail(format!("Grouping type {kind} takes no children"));
            }
            Ok(if kind == "NEXT_BLOCK" { Grouping::NextBlock } else { Grouping::None })
        }
        other => ctx.fail(format!("unknown Grouping type '{other}'")),
    }
}

fn bind_selector(
    selector: Option<&str>,
    raw_params: Option<&str>,
    ctx: &Ctx<'_>,
) -> Result<BoundSelector, RuleLoadError> {
    match selector {
        None => {
            if raw_params.is_some() {
                return ctx.fail("selectorParameters given without a selector");
            }
            Ok(BoundSelector::identity())
        }
        Some(name) => {
            let Some(factory) = ctx.registry.selector(name) else {
                return ctx.fail(format!("unknown selector '{name}'"));
            };
            let params = parse_params(raw_params.unwrap_or("")).map_err(|e| RuleLoadError {
                path: ctx.path.join(" > "),
                message: format!("selector '{name}': {e}"),
            })?;
            let boxed = factory(&params).map_err(|e| RuleLoadError {
                path: ctx.path.join(" > "),
                message: format!("selector '{name}': {e}"),
            })?;
            Ok(BoundSelector::bind(boxed))
        }
    }
}

fn parse_condition(node: &NodeRef, ctx: &Ctx<'_>) -> Result<Condition, RuleLoadError> {
    check_attrs(node, &["type", "selector", "selectorParameters", "value", "min", "max"], false, ctx)?;
    let kind_raw = required_attr(node, "type", ctx)?;
    let kind = kind_raw.to_ascii_lowercase();
    let children = element_children(node, ctx)?;
    let selector_attr = node.attribute("selector");
    let params_attr = node.attribute("selectorParameters");
    let value_attr = node.attribute("value");

    let composite = matches!(kind.as_str(), "and" | "or" | "not" | "minmax" | "min-max");
    if composite && (selector_attr.is_some() || params_attr.is_some() || value_attr.is_some()) {
        return ctx.fail(format!(
            "composite condition '{kind_raw}' takes no selector or value attributes"
        ));
    }
    if !composite && !children.is_empty() {
        return ctx.fail(format!("condition '{kind_raw}' takes no child conditions"));
    }
    if !matches!(kind.as_str(), "minmax" | "min-max")
        && (node.attribute("min").is_some() || node.attribute("max").is_some())
    {
        return ctx.fail(format!("condition '{kind_raw}' takes no min/max attributes"));
    }

    let parse_children = |ctx: &Ctx<'_>| -> Result<Vec<Condition>, RuleLoadError> {
        let mut out = Vec::new();
        for child in &children {
            if child.name() != Some("Condition") {
                return ctx.fail(format!(
                    "unexpected element '{}' in condition",
                    child.name().unwrap_or("?")
                ));
            }
            out.push(parse_condition(child, ctx)?);
        }
        Ok(out)
    };
    let value = |what: &str| -> Result<String, RuleLoadError> {
        match value_attr {
            Some(v) => Ok(v.to_string()),
            None => ctx.fail(format!("condition '{what}' requires a value attribute")),
        }
    };

    match kind.as_str() {
        "and" => Ok(Condition::And(parse_children(ctx)?)),
        "or" => Ok(Condition::Or(parse_children(ctx)?)),
        "not" => {
            let mut parsed = parse_children(ctx)?;
            if parsed.len() != 1 {
                return ctx.fail("condition 'not' requires exactly one child");
            }
            Ok(Condition::Not(Box::new(parsed.remove(0))))
        }
        "minmax" | "min-max" => {
            let min: usize = required_attr(node, "min", ctx)?
                .trim()
                .parse()
                .map_err(|_| ctx.fail::<()>("min must be a non-negative integer").unwrap_err())?;
            let max: usize = required_attr(node, "max", ctx)?
                .trim()
                .parse()
                .map_err(|_| ctx.fail::<()>("max must be a non-negative integer").unwrap_err())?;
            if min > max {
                return ctx.fail(format!("minmax requires min <= max, got {min} > {max}"));
            }
            Ok(Condition::MinMax { min, max, children: parse_children(ctx)? })
        }
        "paragraphstart" => {
            if selector_attr.is_some() || params_attr.is_some() || value_attr.is_some() {
                return ctx.fail("condition 'paragraphStart' takes no further attributes");
            }
            Ok(Condition::ParagraphStart)
        }
        "exists" => {
            if value_attr.is_some() {
                return ctx.fail("condition 'exists' takes no value attribute");
            }
            Ok(Condition::Exists { selector: bind_selector(selector_attr, params_attr, ctx)? })
        }
        "intequals" => {
            let raw = value(kind_raw)?;
            let parsed: i64 = raw.trim().parse().map_err(|_| {
                ctx.fail::<()>(format!("intEquals value '{raw}' is not an integer")).unwrap_err()
            })?;
            Ok(Condition::IntEquals {
                selector: bind_selector(selector_attr, params_attr, ctx)?,
                value: parsed,
            })
        }
        "textequals" => Ok(Condition::TextEquals {
            selector: bind_selector(selector_attr, params_attr, ctx)?,
            value: value(kind_raw)?,
        }),
        "contains" | "textcontains" => Ok(Condition::TextContains {
            selector: bind_selector(selector_attr, params_attr, ctx)?,
            value: value(kind_raw)?,
        }),
        "textstartswith" => Ok(Condition::TextStartsWith {
            selector: bind_selector(selector_attr, params_attr, ctx)?,
            value: value(kind_raw)?,
        }),
        "textendswith" => Ok(Condition::TextEndsWith {
            selector: bind_selector(selector_attr, params_attr, ctx)?,
            value: value(kind_raw)?,
        }),
        "textmatches" => {
            let pattern = value(kind_raw)?;
            let regex = anchored_regex(&pattern).map_err(|e| {
                ctx.fail::<()>(format!("textMatches pattern: {e}")).unwrap_err()
            })?;
            Ok(Condition::TextMatches {
                selector: bind_selector(selector_attr, params_attr, ctx)?,
                regex,
            })
        }
        other => ctx.fail(format!("unknown condition type '{other}'")),
    }
}

fn parse_rule(node: &NodeRef, ctx: &mut Ctx<'_>) -> Result<Rule, RuleLoadError> {
    check_attrs(node, &["ID"], false, ctx)?;
    let id = required_attr(node, "ID", ctx)?.to_string();
    ctx.path.push(format!("Rule {id}"));

    let mut condition = Condition::Always;
    let mut saw_condition = false;
    let mut action: Option<RuleAction> = None;
    let mut inner: Option<RuleSet> = None;
    for child in element_children(node, ctx)? {
        match child.name() {
            Some("Condition") => {
                if saw_condition {
                    return ctx.fail("more than one Condition in Rule");
                }
                saw_condition = true;
                condition = parse_condition(&child, ctx)?;
            }
            Some("Action") => {
                if action.is_some() {
                    return ctx.fail("more than one Action in Rule");
                }
                action = Some(parse_action(&child, ctx)?);
            }
            Some("RuleSet") => {
                if inner.is_some() {
                    return ctx.fail("more than one RuleSet in Rule");
                }
                inner = Some(parse_rule_set(&child, ctx, false)?);
            }
            other => {
                return ctx.fail(format!("unexpected element '{}' in Rule", other.unwrap_or("?")))
            }
        }
    }
    if action.is_none() && inner.is_none() {
        return ctx.fail("Rule requires an Action or a nested RuleSet");
    }
    ctx.path.pop();
    Ok(Rule { id, condition, action, inner })
}

fn parse_action(node: &NodeRef, ctx: &Ctx<'_>) -> Result<RuleAction, RuleLoadError> {
    check_attrs(node, &["class", "parameters"], false, ctx)?;
    let class = required_attr(node, "class", ctx)?;
    let Some(factory) = ctx.registry.action(class) else {
        return ctx.fail(format!("unknown action '{class}'"));
    };
    let params = parse_params(node.attribute("parameters").unwrap_or("")).map_err(|e| {
        ctx.fail::<()>(format!("action '{class}': {e}")).unwrap_err()
    })?;
    let action = factory(&params).map_err(|e| {
        ctx.fail::<()>(format!("action '{class}': {e}")).unwrap_err()
    })?;

    let mut source = None;
    for child in element_children(node, ctx)? {
        if child.name() != Some("Source") {
            return ctx.fail(format!(
                "unexpected element '{}' in Action",
                child.name().unwrap_or("?")
            ));
        }
        if source.is_some() {
            return ctx.fail("more than one Source in Action");
        }
        check_attrs(&child, &["selector", "selectorParameters"], false, ctx)?;
        let name = required_attr(&child, "selector", ctx)?;
        source = Some(bind_selector(Some(name), child.attribute("selectorParameters"), ctx)?);
    }
    Ok(RuleAction { name: class.to_string(), action, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulemodel::Grouping;

    fn load(xml: &str) -> Result<RuleSet, RuleLoadError> {
        load_rules(xml.as_bytes(), &Registry::with_builtins())
    }

    const VALID: &str = r#"<RuleSet ID="RS:default"
        xmlns:text="http://openoffice.org/2000/text"
        xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
        xsi:noNamespaceSchemaLocation="http://example.org/rules.xsd">
      <Block ID="body">
        <Definition>
          <Start matches="/text:p | /text:h"/>
          <Condition type="and">
            <Condition type="paragraphStart"/>
            <Condition type="exists"
                selector="de.knowit.phoenix.selectors.RegexpSelector"
                selectorParameters="regexp=\s*(.*)\s*:"/>
          </Condition>
          <Grouping type="END_EXPRESSION">
            <GroupingExpression matches="descendant-or-self::*[contains(text(),'Ende')]"/>
          </Grouping>
        </Definition>
        <Rules>
          <Rule ID="R1">
            <Condition type="contains" selector="regexp"
                selectorParameters="regexp=(.*):" value="Definition"/>
            <Action class="de.knowit.phoenix.xmlUserObject.SetNodeAction"
                parameters="path=@title;overwrite=false">
              <Source selector="example.selectors.StartingNodeSelector" />
            </Action>
            <RuleSet ID="RS:R1">
              <Block ID="inner">
                <Definition>
                  <Start matches="self::*"/>
                  <Grouping type="NEXT_BLOCK"/>
                </Definition>
                <Rules>
                  <Rule ID="R2">
                    <Action class="trace"/>
                  </Rule>
                </Rules>
              </Block>
            </RuleSet>
          </Rule>
        </Rules>
      </Block>
    </RuleSet>"#;

    #[test]
    fn loads_the_full_grammar() {
        let rs = load(VALID).unwrap();
        assert_eq!(rs.id, "RS:default");
        assert!(rs.pre.is_none());
        assert_eq!(rs.blocks.len(), 1);
        let block = &rs.blocks[0];
        assert_eq!(block.id, "body");
        assert!(matches!(block.grouping, Grouping::EndExpression(_)));
        assert_eq!(block.rules.len(), 1);
        let rule = &block.rules[0];
        assert_eq!(rule.id, "R1");
        let action = rule.action.as_ref().unwrap();
        assert_eq!(action.name, "de.knowit.phoenix.xmlUserObject.SetNodeAction");
        assert!(action.source.is_some());
        let inner = rule.inner.as_ref().unwrap();
        assert_eq!(inner.id, "RS:R1");
        assert!(matches!(inner.blocks[0].grouping, Grouping::NextBlock));
    }

    #[test]
    fn hooks_bind_by_name() {
        let rs = load(
            r#"<RuleSet ID="RS" pre="trace" post="trace">
                 <Block ID="b">
                   <Definition><Start matches="*"/></Definition>
                 </Block>
               </RuleSet>"#,
        )
        .unwrap();
        assert_eq!(rs.pre.as_ref().unwrap().name, "trace");
        assert_eq!(rs.post.as_ref().unwrap().name, "trace");
        assert!(rs.blocks[0].rules.is_empty());
    }

    #[test]
    fn params_parsing() {
        let p = parse_params("path=@title;overwrite=false").unwrap();
        assert_eq!(p["path"], "@title");
        assert_eq!(p["overwrite"], "false");
        let p = parse_params("regexp=a=b;  x =1;").unwrap();
        assert_eq!(p["regexp"], "a=b", "value may contain '='");
        assert_eq!(p["x"], "1", "keys are trimmed");
        assert!(parse_params("").unwrap().is_empty());
        assert!(parse_params("novalue").is_err());
        assert!(parse_params("a=1;a=2").is_err());
        assert!(parse_params("=1").is_err());
    }

    fn rejects(xml: &str, needle: &str) {
        match load(xml) {
            Err(e) => {
                let text = e.to_string();
                assert!(text.contains(needle), "error {text:?} should mention {needle:?}");
            }
            Ok(_) => panic!("expected load failure mentioning {needle:?}"),
        }
    }

    #[test]
    fn rejects_structural_mistakes() {
        rejects("<Rules/>", "root element must be RuleSet");
        rejects("<RuleSet><Block ID='b'><Definition><Start matches='*'/></Definition></Block></RuleSet>",
            "missing required attribute 'ID'");
        rejects("<RuleSet ID='r'><Banana/></RuleSet>", "unexpected element 'Banana'");
        rejects("<RuleSet ID='r' IDD='x'/>", "unexpected attribute 'IDD'");
        rejects(
            "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/></Definition></Block><Block ID='b'><Definition><Start matches='*'/></Definition></Block></RuleSet>",
            "duplicate Block ID",
        );
        rejects("<RuleSet ID='r'><Block ID='b'/></RuleSet>", "requires a Definition");
        rejects(
            "<RuleSet ID='r'><Block ID='b'><Definition/></Block></RuleSet>",
            "requires a Start",
        );
        rejects(
            "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='a//b'/></Definition></Block></RuleSet>",
            "Start:",
        );
        rejects(
            "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/></Definition>stray text</Block></RuleSet>",
            "unexpected text",
        );
    }

    #[test]
    fn rejects_condition_mistakes() {
        let wrap = |condition: &str| {
            format!(
                "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/>{condition}</Definition></Block></RuleSet>"
            )
        };
        rejects(&wrap("<Condition type='banana'/>"), "unknown condition type");
        rejects(&wrap("<Condition type='contains'/>"), "requires a value");
        rejects(&wrap("<Condition type='intEquals' value='xyz'/>"), "not an integer");
        rejects(&wrap("<Condition type='textMatches' value='('/>"), "textMatches pattern");
        rejects(&wrap("<Condition type='not'/>"), "exactly one child");
        rejects(
            &wrap("<Condition type='minmax' min='3' max='1'><Condition type='paragraphStart'/></Condition>"),
            "min <= max",
        );
        rejects(&wrap("<Condition type='minmax' max='1'/>"), "missing required attribute 'min'");
        rejects(
            &wrap("<Condition type='and' value='x'/>"),
            "takes no selector or value",
        );
        rejects(
            &wrap("<Condition type='exists' selector='no.such.Selector'/>"),
            "unknown selector",
        );
        rejects(
            &wrap("<Condition type='exists' selector='regexp' selectorParameters='regexp=('/>"),
            "invalid regexp",
        );
        rejects(
            &wrap("<Condition type='exists' selectorParameters='x=1'/>"),
            "selectorParameters given without a selector",
        );
        rejects(
            &wrap("<Condition type='paragraphStart' value='x'/>"),
            "no further attributes",
        );
        rejects(&wrap("<Condition type='exists' min='1'/>"), "takes no min/max");
    }

    #[test]
    fn condition_type_names_are_case_insensitive() {
        let wrap = |condition: &str| {
            format!(
                "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/>{condition}</Definition></Block></RuleSet>"
            )
        };
        for spelling in [
            "<Condition type='PARAGRAPHSTART'/>",
            "<Condition type='ParagraphStart'/>",
            "<Condition type='Min-Max' min='0' max='1'/>",
            "<Condition type='TextContains' value='x'/>",
            "<Condition type='Contains' value='x'/>",
        ] {
            assert!(load(&wrap(spelling)).is_ok(), "should accept {spelling}");
        }
    }

    #[test]
    fn rejects_grouping_mistakes() {
        let wrap = |grouping: &str| {
            format!(
                "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/>{grouping}</Definition></Block></RuleSet>"
            )
        };
        rejects(&wrap("<Grouping type='SIDEWAYS'/>"), "unknown Grouping type");
        rejects(&wrap("<Grouping type='END_EXPRESSION'/>"), "exactly one GroupingExpression");
        rejects(
            &wrap("<Grouping type='NEXT_BLOCK'><GroupingExpression matches='*'/></Grouping>"),
            "takes no children",
        );
        rejects(
            &wrap("<Grouping type='END_EXPRESSION'><GroupingExpression matches='a//'/></Grouping>"),
            "GroupingExpression:",
        );
        rejects(&wrap("<Grouping type='end_expression'/>"), "unknown Grouping type");
    }

    #[test]
    fn rejects_rule_mistakes() {
        let wrap = |rule: &str| {
            format!(
                "<RuleSet ID='r'><Block ID='b'><Definition><Start matches='*'/></Definition><Rules>{rule}</Rules></Block></RuleSet>"
            )
        };
        rejects(&wrap("<Rule ID='R'/>"), "requires an Action or a nested RuleSet");
        rejects(&wrap("<Rule><Action class='trace'/></Rule>"), "missing required attribute 'ID'");
        rejects(&wrap("<Rule ID='R'><Action class='no.such.Action'/></Rule>"), "unknown action");
        rejects(
            &wrap("<Rule ID='R'><Action class='set-node'/></Rule>"),
            "set-node",
        );
        rejects(
            &wrap("<Rule ID='R'><Action class='trace'><Source/></Action></Rule>"),
            "missing required attribute 'selector'",
        );
        rejects(
            &wrap("<Rule ID='R'><Action class='trace'/><Action class='trace'/></Rule>"),
            "more than one Action",
        );
        rejects(
            &wrap("<Rule ID='R'><Action class='trace' parameters='nope'/></Rule>"),
            "has no '='",
        );
    }

    #[test]
    fn error_paths_name_the_location() {
        let err = load(
            "<RuleSet ID='outer'><Block ID='blk'><Definition><Start matches='*'/></Definition><Rules><Rule ID='r9'><Action class='missing.Action'/></Rule></Rules></Block></RuleSet>",
        )
        .err()
        .unwrap();
        assert_eq!(err.path, "RuleSet outer > Block blk > Rule r9");
        assert!(err.message.contains("missing.Action"));
    }

    #[test]
    fn malformed_xml_reports_document_error() {
        let err = load("<RuleSet ID='r'>").err().unwrap();
        assert_eq!(err.path, "document");
    }
}
