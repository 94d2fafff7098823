//! Conditions: the boolean test tree on blocks and rules.
//!
//! Terminal conditions run a selector against the block and test the result;
//! composites combine children with and/or/not and a count window. Absent
//! selector values make `exists` false and every comparison false. All text
//! comparisons see the selector value's text after whitespace normalization
//! (trimmed, runs collapsed to single spaces).

use regex::Regex;

use crate::docmodel::normalize_text;
use crate::engine::Block;
use crate::selectors::{BoundSelector, EvalContext};

pub enum Condition {
    /// The selector produced anything at all.
    Exists { selector: BoundSelector },
    /// The selector text parses as an integer equal to `value`.
    IntEquals { selector: BoundSelector, value: i64 },
    TextEquals { selector: BoundSelector, value: String },
    TextContains { selector: BoundSelector, value: String },
    TextStartsWith { selector: BoundSelector, value: String },
    TextEndsWith { selector: BoundSelector, value: String },
    /// The whole normalized text matches the expression (anchored).
    TextMatches { selector: BoundSelector, regex: Regex },
    /// The block's first node is a paragraph-type element.
    ParagraphStart,
    /// Always true; stands in for an omitted condition.
    Always,
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
    /// Between `min` and `max` children hold (inclusive).
    MinMax { min: usize, max: usize, children: Vec<Condition> },
}

impl std::fmt::Debug for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::Exists { .. } => write!(f, "exists"),
            Condition::IntEquals { value, .. } => write!(f, "intEquals({value})"),
            Condition::TextEquals { value, .. } => write!(f, "textEquals({value:?})"),
            Condition::TextContains { value, .. } => write!(f, "textContains({value:?})"),
            Condition::TextStartsWith { value, .. } => write!(f, "textStartsWith({value:?})"),
            Condition::TextEndsWith { value, .. } => write!(f, "textEndsWith({value:?})"),
            Condition::TextMatches { regex, .. } => write!(f, "textMatches({})", regex.as_str()),
            Condition::ParagraphStart => write!(f, "paragraphStart"),
            Condition::Always => write!(f, "always"),
            Condition::And(c) => f.debug_tuple("and").field(c).finish(),
            Condition::Or(c) => f.debug_tuple("or").field(c).finish(),
            Condition::Not(c) => f.debug_tuple("not").field(c).finish(),
            Condition::MinMax { min, max, children } => {
                write!(f, "minmax[{min},{max}]{children:?}")
            }
        }
    }
}

/// Compile the anchored matcher for a textMatches condition. Anchoring is
/// explicit so `b` does not silently mean "contains b".
pub fn anchored_regex(pattern: &str) -> Result<Regex, regex::Error> {
    Regex::new(&format!("^(?:{pattern})$"))
}

impl Condition {
    pub fn eval(&self, block: &Block, ctx: &mut EvalContext<'_>) -> bool {
        match self {
            Condition::Exists { selector } => !ctx.select(selector, block).is_absent(),
            Condition::IntEquals { selector, value } => {
                match selected_text(selector, block, ctx) {
                    Some(text) => text.parse::<i64>() == Ok(*value),
                    None => false,
                }
            }
            Condition::TextEquals { selector, value } => {
                selected_text(selector, block, ctx).is_some_and(|t| t == *value)
            }
            Condition::TextContains { selector, value } => {
                selected_text(selector, block, ctx).is_some_and(|t| t.contains(value))
            }
            Condition::TextStartsWith { selector, value } => {
                selected_text(selector, block, ctx).is_some_and(|t| t.starts_with(value))
            }
            Condition::TextEndsWith { selector, value } => {
                selected_text(selector, block, ctx).is_some_and(|t| t.ends_with(value))
            }
            Condition::TextMatches { selector, regex } => {
                selected_text(selector, block, ctx).is_some_and(|t| regex.is_match(&t))
            }
            Condition::ParagraphStart => block.start_node().is_some_and(|node| {
                node.is_element()
                    && node
                        .name()
                        .is_some_and(|n| ctx.config.paragraph_elements.iter().any(|p| p == n))
            }),
            Condition::Always => true,
            Condition::And(children) => children.iter().all(|c| c.eval(block, ctx)),
            Condition::Or(children) => children.iter().any(|c| c.eval(block, ctx)),
            Condition::Not(child) => !child.eval(block, ctx),
            Condition::MinMax { min, max, children } => {
                let count = children.iter().filter(|c| c.eval(block, ctx)).count();
                *min <= count && count <= *max
            }
        }
    }
}

fn selected_text(
    selector: &BoundSelector,
    block: &Block,
    ctx: &mut EvalContext<'_>,
) -> Option<String> {
    ctx.select(selector, block).text().map(|t| normalize_text(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{load_xml, Fragment, NodeRef};
    use crate::engine::EngineConfig;
    use crate::selectors::{Selector, SelectorCache, SelectorContext, SelectorFault, SelectorValue};

    struct Fixed(Option<String>);

    impl Selector for Fixed {
        fn select(
            &self,
            _: &Block,
            _: &SelectorContext<'_>,
        ) -> Result<SelectorValue, SelectorFault> {
            Ok(match &self.0 {
                Some(text) => SelectorValue::Node(NodeRef::synthetic_text(text.clone())),
                None => SelectorValue::Absent,
            })
        }
    }

    fn fixed(text: &str) -> BoundSelector {
        BoundSelector::bind(Box::new(Fixed(Some(text.to_string()))))
    }

    fn absent() -> BoundSelector {
        BoundSelector::bind(Box::new(Fixed(None)))
    }

    fn check(condition: &Condition) -> bool {
        check_on(condition, b"<r><text:p>x</text:p></r>")
    }

    fn check_on(condition: &Condition, xml: &[u8]) -> bool {
        let tree = load_xml(xml).unwrap();
        let block = Block::new("t", 1, tree.document_scope());
        let config = EngineConfig::default();
        let mut cache = SelectorCache::default();
        let mut events = Vec::new();
        let mut ctx = EvalContext { config: &config, cache: &mut cache, events: &mut events };
        condition.eval(&block, &mut ctx)
    }

    #[test]
    fn exists_follows_absence() {
        assert!(check(&Condition::Exists { selector: fixed("") }));
        assert!(!check(&Condition::Exists { selector: absent() }));
    }

    #[test]
    fn comparisons_on_absent_are_false() {
        assert!(!check(&Condition::TextEquals { selector: absent(), value: "x".into() }));
        assert!(!check(&Condition::TextContains { selector: absent(), value: "".into() }));
        assert!(!check(&Condition::IntEquals { selector: absent(), value: 0 }));
        assert!(!check(&Condition::TextMatches {
            selector: absent(),
            regex: anchored_regex(".*").unwrap(),
        }));
    }

    #[test]
    fn text_comparisons_normalize_first() {
        let sel = || fixed("  Befund   und  Diagnose \n");
        assert!(check(&Condition::TextEquals { selector: sel(), value: "Befund und Diagnose".into() }));
        assert!(check(&Condition::TextStartsWith { selector: sel(), value: "Befund u".into() }));
        assert!(check(&Condition::TextEndsWith { selector: sel(), value: "Diagnose".into() }));
        assert!(check(&Condition::TextContains { selector: sel(), value: "und Diag".into() }));
        assert!(!check(&Condition::TextContains { selector: sel(), value: "und  Diag".into() }));
    }

    #[test]
    fn int_equals_parses_signed_integers() {
        assert!(check(&Condition::IntEquals { selector: fixed(" 42 "), value: 42 }));
        assert!(check(&Condition::IntEquals { selector: fixed("-7"), value: -7 }));
        assert!(check(&Condition::IntEquals { selector: fixed("+7"), value: 7 }));
        assert!(!check(&Condition::IntEquals { selector: fixed("42x"), value: 42 }));
        assert!(!check(&Condition::IntEquals { selector: fixed("4 2"), value: 42 }));
        assert!(!check(&Condition::IntEquals { selector: fixed(""), value: 0 }));
    }

    #[test]
    fn matches_is_anchored() {
        let cond = |pattern: &str, text: &str| Condition::TextMatches {
            selector: fixed(text),
            regex: anchored_regex(pattern).unwrap(),
        };
        assert!(check(&cond("b.d", "bad")));
        assert!(!check(&cond("b.d", "xbadx")), "must match the whole text");
        assert!(check(&cond("a|b", "b")));
        assert!(!check(&cond("a|b", "ab")), "alternation stays inside the group");
    }

    #[test]
    fn paragraph_start_consults_the_configured_set() {
        assert!(check_on(&Condition::ParagraphStart, b"<r><text:p>x</text:p></r>"));
        assert!(check_on(&Condition::ParagraphStart, b"<r><h2>x</h2></r>"));
        assert!(!check_on(&Condition::ParagraphStart, b"<r><div>x</div></r>"));

        let tree = load_xml(b"<r><div>x</div></r>").unwrap();
        let block = Block::new("t", 1, tree.document_scope());
        let config = EngineConfig {
            paragraph_elements: vec!["div".into()],
            ..EngineConfig::default()
        };
        let mut cache = SelectorCache::default();
        let mut events = Vec::new();
        let mut ctx = EvalContext { config: &config, cache: &mut cache, events: &mut events };
        assert!(Condition::ParagraphStart.eval(&block, &mut ctx));
    }

    #[test]
    fn paragraph_start_is_false_for_text_start_nodes() {
        let tree = load_xml(b"<r>loose<text:p>x</text:p></r>").unwrap();
        let first = tree.document_scope().nodes()[0].clone();
        let block = Block::new("t", 1, Fragment::single(first));
        let config = EngineConfig::default();
        let mut cache = SelectorCache::default();
        let mut events = Vec::new();
        let mut ctx = EvalContext { config: &config, cache: &mut cache, events: &mut events };
        assert!(!Condition::ParagraphStart.eval(&block, &mut ctx));
    }

    #[test]
    fn composites() {
        let t = || Condition::Always;
        let f = || Condition::Not(Box::new(Condition::Always));
        assert!(check(&Condition::And(vec![])), "empty and is vacuously true");
        assert!(!check(&Condition::Or(vec![])), "empty or is false");
        assert!(check(&Condition::And(vec![t(), t()])));
        assert!(!check(&Condition::And(vec![t(), f()])));
        assert!(check(&Condition::Or(vec![f(), t()])));
        assert!(!check(&Condition::Not(Box::new(t()))));
        let window = |min, max, outcomes: &[bool]| {
            Condition::MinMax {
                min,
                max,
                children: outcomes
                    .iter()
                    .map(|&b| if b { t() } else { f() })
                    .collect(),
            }
        };
        assert!(check(&window(1, 2, &[true, false, true])));
        assert!(!check(&window(3, 3, &[true, false, true])));
        assert!(check(&window(0, 0, &[false, false])));
        assert!(!check(&window(1, 9, &[false, false])));
    }

    #[test]
    fn and_short_circuits() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static CALLS: AtomicUsize = AtomicUsize::new(0);
        struct Spy;
        impl Selector for Spy {
            fn select(
                &self,
                _: &Block,
                _: &SelectorContext<'_>,
            ) -> Result<SelectorValue, SelectorFault> {
                CALLS.fetch_add(1, Ordering::Relaxed);
                Ok(SelectorValue::Absent)
            }
        }
        let cond = Condition::And(vec![
            Condition::Not(Box::new(Condition::Always)),
            Condition::Exists { selector: BoundSelector::bind(Box::new(Spy)) },
        ]);
        assert!(!check(&cond));
        assert_eq!(CALLS.load(Ordering::Relaxed), 0, "second arm never evaluated");
    }

    proptest::proptest! {
        #[test]
        fn de_morgan_holds(outcomes in proptest::collection::vec(proptest::bool::ANY, 0..6)) {
            let leaf = |b: bool| if b {
                Condition::Always
            } else {
                Condition::Not(Box::new(Condition::Always))
            };
            let not_and = Condition::Not(Box::new(Condition::And(
                outcomes.iter().map(|&b| leaf(b)).collect(),
            )));
            let or_nots = Condition::Or(
                outcomes.iter().map(|&b| Condition::Not(Box::new(leaf(b)))).collect(),
            );
            proptest::prop_assert_eq!(check(&not_and), check(&or_nots));
        }

        #[test]
        fn minmax_counts_exactly(
            outcomes in proptest::collection::vec(proptest::bool::ANY, 0..8),
            min in 0usize..5,
            width in 0usize..5,
        ) {
            let max = min + width;
            let leaf = |b: bool| if b {
                Condition::Always
            } else {
                Condition::Not(Box::new(Condition::Always))
            };
            let cond = Condition::MinMax {
                min,
                max,
                children: outcomes.iter().map(|&b| leaf(b)).collect(),
            };
            let count = outcomes.iter().filter(|&&b| b).count();
            proptest::prop_assert_eq!(check(&cond), min <= count && count <= max);
        }
    }
}
