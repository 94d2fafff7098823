//! Name-to-factory registry for selectors and actions.
//!
//! Rule files reference extensions by name. Short names cover the
//! built-ins; the fully qualified Java class names used by legacy rule
//! files are registered as aliases, so those files load unchanged.

use std::collections::BTreeMap;

use crate::engine::{trace_factory, Action};
use crate::selectors::{builtin_selectors, Params, SelectorFactory};
use crate::xmlout::{descend_factory, set_node_factory};

/// Registration problem: duplicate or reserved name.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct SetupError(pub String);

/// Builds an action from rule-file parameters, validating eagerly.
pub type ActionFactory = fn(&Params) -> Result<Box<dyn Action>, String>;

pub struct Registry {
    selectors: BTreeMap<String, SelectorFactory>,
    actions: BTreeMap<String, ActionFactory>,
}

impl Registry {
    /// A registry with no entries at all.
    pub fn empty() -> Registry {
        Registry { selectors: BTreeMap::new(), actions: BTreeMap::new() }
    }

    /// All built-ins under their short names, plus the legacy class-name
    /// aliases found in existing rule files.
    pub fn with_builtins() -> Registry {
        let mut registry = Registry::empty();
        for (name, factory) in builtin_selectors() {
            registry.register_selector(name, factory).expect("builtin names are unique");
        }
        let legacy_selectors: &[(&str, &str)] = &[
            ("de.knowit.phoenix.selectors.IdentitySelector", "identity"),
            ("de.knowit.phoenix.selectors.PositionSelector", "position"),
            ("de.knowit.phoenix.selectors.XPathSelector", "xpath"),
            ("de.knowit.phoenix.selectors.RegexpSelector", "regexp"),
            ("de.knowit.phoenix.selectors.RegExpSelector", "regexp"),
            ("example.selectors.StartingNodeSelector", "start-node"),
        ];
        for &(alias, short) in legacy_selectors {
            let factory = registry.selectors[short];
            registry.register_selector(alias, factory).expect("legacy names are unique");
        }
        registry.register_action("trace", trace_factory).expect("unique");
        registry.register_action("set-node", set_node_factory).expect("unique");
        registry.register_action("descend", descend_factory).expect("unique");
        let legacy_actions: &[(&str, &str)] = &[
            ("de.knowit.phoenix.actions.Trace", "trace"),
            ("de.knowit.phoenix.xmlUserObject.SetNodeAction", "set-node"),
            ("de.knowit.phoenix.xmlUserObject.DescendNodePreAction", "descend"),
        ];
        for &(alias, short) in legacy_actions {
            let factory = registry.actions[short];
            registry.register_action(alias, factory).expect("legacy names are unique");
        }
        registry
    }

    pub fn register_selector(
        &mut self,
        name: impl Into<String>,
        factory: SelectorFactory,
    ) -> Result<(), SetupError> {
        let name = name.into();
        if self.selectors.contains_key(&name) {
            return Err(SetupError(format!("selector '{name}' is already registered")));
        }
        self.selectors.insert(name, factory);
        Ok(())
    }

    pub fn register_action(
        &mut self,
        name: impl Into<String>,
        factory: ActionFactory,
    ) -> Result<(), SetupError> {
        let name = name.into();
        if self.actions.contains_key(&name) {
            return Err(SetupError(format!("action '{name}' is already registered")));
        }
        self.actions.insert(name, factory);
        Ok(())
    }

    pub fn selector(&self, name: &str) -> Option<&SelectorFactory> {
        self.selectors.get(name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionFactory> {
        self.actions.get(name)
    }

    pub fn selector_names(&self) -> impl Iterator<Item = &str> {
        self.selectors.keys().map(String::as_str)
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }
}
