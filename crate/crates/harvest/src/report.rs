//! Traffic-light run reporting.
//!
//! Every run produces a stream of events: green for confirmed progress
//! (traces), yellow for degraded extraction (missing values, broken styles),
//! red for failures (action errors, unloadable inputs). The report
//! aggregates events per input plus run statistics; the overall status is
//! the worst severity seen. Serialization is deterministic: sorted maps, no
//! timestamps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Green,
    Yellow,
    Red,
}

impl Severity {
    pub fn marker(self) -> char {
        match self {
            Severity::Green => 'G',
            Severity::Yellow => 'Y',
            Severity::Red => 'R',
        }
    }
}

/// One observation from a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub severity: Severity,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block_ordinal: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule_id: Option<String>,
}

impl Event {
    pub fn new(severity: Severity, message: impl Into<String>) -> Event {
        Event {
            severity,
            message: message.into(),
            block_type: None,
            block_ordinal: None,
            rule_id: None,
        }
    }

    pub fn green(message: impl Into<String>) -> Event {
        Event::new(Severity::Green, message)
    }

    pub fn yellow(message: impl Into<String>) -> Event {
        Event::new(Severity::Yellow, message)
    }

    /// Red events always point at the rule that failed.
    pub fn red(message: impl Into<String>, rule_id: impl Into<String>) -> Event {
        let mut event = Event::new(Severity::Red, message);
        event.rule_id = Some(rule_id.into());
        event
    }

    pub fn with_block(mut self, block_type: impl Into<String>, ordinal: u32) -> Event {
        self.block_type = Some(block_type.into());
        self.block_ordinal = Some(ordinal);
        self
    }

    pub fn with_rule(mut self, rule_id: impl Into<String>) -> Event {
        self.rule_id = Some(rule_id.into());
        self
    }
}

/// Worst severity in a list; no events means green.
pub fn status_of(events: &[Event]) -> Severity {
    events.iter().map(|e| e.severity).max().unwrap_or(Severity::Green)
}

/// Counts collected while running a rule set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Blocks constructed, by block type id.
    pub blocks_by_type: BTreeMap<String, u64>,
    /// Rules that fired (condition held), by rule id.
    pub rule_fires: BTreeMap<String, u64>,
}

/// Whole-run report, one entry per input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub ruleset: String,
    pub status: Severity,
    pub totals: Totals,
    pub inputs: Vec<InputReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub green: u64,
    pub yellow: u64,
    pub red: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputReport {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sha256: Option<String>,
    pub status: Severity,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<String>,
    pub events: Vec<Event>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stats: Option<RunStats>,
}

impl Report {
    pub fn assemble(
        tool: impl Into<String>,
        version: impl Into<String>,
        ruleset: impl Into<String>,
        inputs: Vec<InputReport>,
    ) -> Report {
        let mut totals = Totals::default();
        let mut status = Severity::Green;
        for input in &inputs {
            status = status.max(input.status);
            for event in &input.events {
                match event.severity {
                    Severity::Green => totals.green += 1,
                    Severity::Yellow => totals.yellow += 1,
                    Severity::Red => totals.red += 1,
                }
            }
        }
        Report {
            tool: tool.into(),
            version: version.into(),
            ruleset: ruleset.into(),
            status,
            totals,
            inputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text rendering: a header, one line per event, a totals line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} ruleset={} status={:?}\n",
            self.tool,
            self.version,
            self.ruleset,
            self.status
        ));
        for input in &self.inputs {
            out.push_str(&format!("input {} status={:?}\n", input.path, input.status));
            for event in &input.events {
                out.push_str(&format!("  {} {}", event.severity.marker(), event.message));
                if let (Some(block), Some(ordinal)) = (&event.block_type, event.block_ordinal) {
                    out.push_str(&format!(" [block {block}#{ordinal}]"));
                }
                if let Some(rule) = &event.rule_id {
                    out.push_str(&format!(" [rule {rule}]"));
                }
                out.push('\n');
            }
        }
        out.push_str(&format!(
            "totals green={} yellow={} red={}\n",
            self.totals.green, self.totals.yellow, self.totals.red
        ));
        out
    }
}
