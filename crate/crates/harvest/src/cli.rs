//! Command-line driver: load a rule set, run each input document through the
//! engine, write the extracted output and a traffic-light report.
//!
//! Exit codes: 0 when no input produced a red event, 1 when at least one did,
//! 2 for usage errors and rule-set load failures. The code depends only on
//! the worst severity in the report and on whether the rule set loaded, so
//! scripted callers can branch on it.
//!
//! Reports carry no timestamps; two runs over the same inputs produce
//! byte-identical output and report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, ValueEnum};
use sha2::{Digest, Sha256};

use crate::caseimport::{self, CaseModel};
use crate::docmodel::{load_auto, load_container, load_xml, DocumentTree, LoadError};
use crate::engine::{Engine, EngineConfig, RunOutcome};
use crate::report::{status_of, Event, InputReport, Report, RunStats, Severity};
use crate::rulemodel::{load_rules, Registry};
use crate::xmlout::run_to_xml;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Sniff each file: zip magic means container, anything else plain XML.
    Auto,
    Xml,
    Container,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

/// The user object the rules build: a fresh XML output document, or the
/// case model shipped with the case-import rules.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Xml,
    Case,
}

/// One run: a rule set applied to one or more input documents.
#[derive(Debug, Parser)]
#[command(name = "harvest", version, about = "Rule-driven extraction from semi-structured XML")]
pub struct RunConfig {
    /// Rule file with block definitions and rules.
    #[arg(long)]
    pub ruleset: PathBuf,

    /// Input document. Repeat the flag to process several.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,

    /// Output file. With several inputs, each writes next to this path with
    /// a -1, -2, ... suffix. Omitted: outputs print to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Report file. Omitted: the report prints to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Report rendering.
    #[arg(long = "report-format", value_enum, default_value_t = ReportFormat::Json)]
    pub report_format: ReportFormat,

    /// Input format override; `auto` sniffs each file.
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,

    /// Mirror rule firing to the error stream.
    #[arg(long)]
    pub trace: bool,

    /// Comma-separated element names treated as paragraphs by the
    /// `paragraphStart` and `paragraphEnd` conditions.
    #[arg(long = "paragraph-elements")]
    pub paragraph_elements: Option<String>,

    /// Process inputs concurrently. Results and the report are identical to
    /// a sequential run; only wall-clock time changes.
    #[arg(long)]
    pub parallel: bool,

    /// Which user object the rules build.
    #[arg(long, value_enum, default_value_t = Backend::Xml)]
    pub backend: Backend,
}

/// Entry point for the `harvest` binary. Usage errors exit 2 via clap;
/// `--help` and `--version` exit 0.
pub fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(config) => config,
        Err(e) => e.exit(),
    };
    ExitCode::from(run(&config))
}

/// Run a parsed configuration. Returns the process exit code.
pub fn run(config: &RunConfig) -> u8 {
    let mut registry = Registry::with_builtins();
    caseimport::register(&mut registry).expect("case names are free in a fresh registry");

    let ruleset_bytes = match fs::read(&config.ruleset) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("harvest: cannot read ruleset {}: {}", config.ruleset.display(), e);
            return 2;
        }
    };
    // Rule files validate eagerly: an unknown action or a bad path
    // expression fails here, before any document is touched.
    let ruleset = match load_rules(&ruleset_bytes, &registry) {
        Ok(ruleset) => ruleset,
        Err(e) => {
            eprintln!("harvest: {}", e);
            return 2;
        }
    };
    let engine = Engine::with_config(ruleset, engine_config(config));

    let count = config.inputs.len();
    let results: Vec<(InputReport, Option<String>)> = if config.parallel && count > 1 {
        run_parallel(&engine, config)
    } else {
        config
            .inputs
            .iter()
            .enumerate()
            .map(|(index, path)| process_input(&engine, config, index, path))
            .collect()
    };

    let mut inputs = Vec::with_capacity(count);
    for (input, stdout_doc) in results {
        if let Some(doc) = stdout_doc {
            print!("{}", doc);
        }
        inputs.push(input);
    }

    let report = Report::assemble(
        "harvest",
        env!("CARGO_PKG_VERSION"),
        config.ruleset.display().to_string(),
        inputs,
    );
    let rendered = match config.report_format {
        ReportFormat::Json => format!("{}\n", report.to_json()),
        ReportFormat::Text => report.to_text(),
    };
    match &config.report {
        Some(path) => {
            if let Err(e) = fs::write(path, rendered.as_bytes()) {
                eprintln!("harvest: cannot write report {}: {}", path.display(), e);
                return 2;
            }
        }
        None => print!("{}", rendered),
    }

    if report.status == Severity::Red {
        1
    } else {
        0
    }
}

fn engine_config(config: &RunConfig) -> EngineConfig {
    let mut engine_config = EngineConfig::default();
    engine_config.trace = config.trace;
    if let Some(spec) = &config.paragraph_elements {
        engine_config.paragraph_elements = spec
            .split(',')
            .map(str::trim)
            .filter(|name| !name.is_empty())
            .map(String::from)
            .collect();
    }
    // Extracted media lands next to the output files; without an output
    // location images are recorded in the model but not copied.
    if let Some(base) = &config.output {
        let dir = base.parent().unwrap_or_else(|| Path::new(""));
        engine_config.media_dir = Some(dir.join("media"));
    }
    engine_config
}

/// Worker threads share the engine read-only; every per-run structure
/// (user object, selector cache, events) lives in `process_input`. Slots
/// keyed by index keep the report in input order.
fn run_parallel(engine: &Engine, config: &RunConfig) -> Vec<(InputReport, Option<String>)> {
    let count = config.inputs.len();
    let mut slots: Vec<Option<(InputReport, Option<String>)>> = Vec::new();
    slots.resize_with(count, || None);
    thread::scope(|scope| {
        let mut handles = Vec::with_capacity(count);
        for (index, path) in config.inputs.iter().enumerate() {
            handles.push(scope.spawn(move || (index, process_input(engine, config, index, path))));
        }
        for handle in handles {
            let (index, result) = handle.join().expect("input worker panicked");
            slots[index] = Some(result);
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every input fills its slot"))
        .collect()
}

/// Load, run, and serialize one input. Failures become red events in the
/// input's report entry; later inputs still run. The second return value is
/// the serialized output when it should go to stdout.
fn process_input(
    engine: &Engine,
    config: &RunConfig,
    index: usize,
    path: &Path,
) -> (InputReport, Option<String>) {
    let shown = path.display().to_string();
    let bytes = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) => {
            return (
                failed_input(shown, None, format!("cannot read input: {}", e)),
                None,
            )
        }
    };
    let digest = format!("{:x}", Sha256::digest(&bytes));
    let tree = match load_input(config.format, &bytes) {
        Ok(tree) => tree,
        Err(e) => {
            return (
                failed_input(shown, Some(digest), format!("load failed: {}", e)),
                None,
            )
        }
    };

    let (mut events, stats, output_xml) = run_backend(engine, &tree, config.backend);

    let mut output_field = None;
    let mut stdout_doc = None;
    match &config.output {
        Some(base) => {
            let target = output_target(base, index, config.inputs.len());
            match write_output(&target, &output_xml) {
                Ok(()) => output_field = Some(target.display().to_string()),
                Err(e) => events.push(Event::new(
                    Severity::Red,
                    format!("cannot write {}: {}", target.display(), e),
                )),
            }
        }
        None => stdout_doc = Some(output_xml),
    }

    let status = status_of(&events);
    (
        InputReport {
            path: shown,
            sha256: Some(digest),
            status,
            output: output_field,
            events,
            stats: Some(stats),
        },
        stdout_doc,
    )
}

fn failed_input(path: String, sha256: Option<String>, message: String) -> InputReport {
    InputReport {
        path,
        sha256,
        status: Severity::Red,
        output: None,
        events: vec![Event::new(Severity::Red, message)],
        stats: None,
    }
}

fn load_input(format: InputFormat, bytes: &[u8]) -> Result<DocumentTree, LoadError> {
    match format {
        InputFormat::Auto => load_auto(bytes),
        InputFormat::Xml => load_xml(bytes),
        InputFormat::Container => load_container(bytes),
    }
}

fn run_backend(engine: &Engine, tree: &DocumentTree, backend: Backend) -> (Vec<Event>, RunStats, String) {
    match backend {
        Backend::Xml => {
            let (outcome, doc) = run_to_xml(engine, tree);
            let RunOutcome { events, stats, .. } = outcome;
            (events, stats, doc.serialize())
        }
        Backend::Case => {
            let outcome = engine.run(tree, Box::new(CaseModel::default()));
            let RunOutcome { user, events, stats } = outcome;
            let xml = user
                .and_then(|user| user.downcast::<CaseModel>().ok())
                .map(|model| model.to_xml())
                .unwrap_or_default();
            (events, stats, xml)
        }
    }
}

/// Single input: exactly the requested path. Several inputs: `out.xml`
/// becomes `out-1.xml`, `out-2.xml`, ... in the same directory.
fn output_target(base: &Path, index: usize, count: usize) -> PathBuf {
    if count == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{}-{}.{}", stem, index + 1, ext),
        None => format!("{}-{}", stem, index + 1),
    };
    base.with_file_name(name)
}

fn write_output(target: &Path, xml: &str) -> std::io::Result<()> {
    if let Some(dir) = target.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(target, xml.as_bytes())
}
