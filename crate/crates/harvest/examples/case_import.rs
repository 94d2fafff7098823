//! End-to-end case import: load an office container, run the shipped case
//! rules, print the resulting case XML and a run summary.
//!
//! ```text
//! cargo run --example case_import [path/to/document.sxw]
//! ```
//!
//! Without an argument the bundled `fixtures/letter.sxw` is used. Images
//! are copied to a temporary media directory, printed at the end.

use std::path::{Path, PathBuf};

use harvest::caseimport::{self, CaseModel};
use harvest::docmodel::load_auto;
use harvest::engine::{Engine, EngineConfig};
use harvest::rulemodel::{load_rules, Registry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let input: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest.join("fixtures/letter.sxw"));

    let tree = load_auto(&std::fs::read(&input)?)?;

    let mut registry = Registry::with_builtins();
    caseimport::register(&mut registry)?;
    let ruleset = load_rules(&std::fs::read(manifest.join("rules/caseimport.rules.xml"))?, &registry)?;

    let media_dir = std::env::temp_dir().join("harvest-case-media");
    let config = EngineConfig { media_dir: Some(media_dir.clone()), ..EngineConfig::default() };
    let engine = Engine::with_config(ruleset, config);

    let outcome = engine.run(&tree, Box::new(CaseModel::default()));
    let status = outcome.status();
    let events = outcome.events.clone();
    let model = outcome.user_into::<CaseModel>().expect("case model comes back");

    print!("{}", model.to_xml());

    eprintln!("status: {status:?}");
    for event in &events {
        eprintln!("  [{:?}] {}", event.severity, event.message);
    }
    if !model.images.is_empty() {
        eprintln!("media copied to {}", media_dir.display());
    }
    Ok(())
}
