//! Selectors and actions that assemble a [`CaseModel`], plus their
//! registry entries. The fully qualified names mirror the classes legacy
//! rule files reference.

use std::any::Any;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::caseimport::extract::{
    collect_entries, colored_runs, image_alt, image_elements, image_href, merge_entry,
    split_title,
};
use crate::caseimport::{CaseModel, CaseParagraph, ImageRef, Relation, Section};
use crate::docmodel::{normalize_text, NodeRef};
use crate::engine::{Action, ActionContext, ActionError, Block};
use crate::report::Event;
use crate::rulemodel::{Registry, SetupError};
use crate::selectors::{Params, Selector, SelectorContext, SelectorFault, SelectorValue};

const DIAGNOSES_KEY: &str = "Diagnosen";

fn reject_params(params: &Params, name: &str) -> Result<(), String> {
    match params.keys().next() {
        Some(key) => Err(format!("{name} takes no parameters, got '{key}'")),
        None => Ok(()),
    }
}

fn case_model<'a>(user: &'a mut dyn Any, what: &str) -> Result<&'a mut CaseModel, ActionError> {
    user.downcast_mut::<CaseModel>()
        .ok_or_else(|| ActionError::new(format!("{what} requires a case model user object")))
}

/// The heading title of a block, as a detached text node.
pub struct TitleSelector;

impl Selector for TitleSelector {
    fn select(
        &self,
        block: &Block,
        _ctx: &SelectorContext<'_>,
    ) -> Result<SelectorValue, SelectorFault> {
        match split_title(block) {
            Some((title, _)) => Ok(SelectorValue::Node(NodeRef::synthetic_text(title))),
            None => Err(SelectorFault::new("block does not start with a heading run")),
        }
    }
}

pub fn title_selector_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_params(params, "the title selector")?;
    Ok(Box::new(TitleSelector))
}

/// Everything after a block's heading paragraph.
pub struct ContentSelector;

impl Selector for ContentSelector {
    fn select(
        &self,
        block: &Block,
        _ctx: &SelectorContext<'_>,
    ) -> Result<SelectorValue, SelectorFault> {
        match split_title(block) {
            Some((_, content)) if content.is_empty() => Ok(SelectorValue::Absent),
            Some((_, content)) => Ok(SelectorValue::Fragment(content)),
            None => Err(SelectorFault::new("block does not start with a heading run")),
        }
    }
}

pub fn content_selector_factory(params: &Params) -> Result<Box<dyn Selector>, String> {
    reject_params(params, "the content selector")?;
    Ok(Box::new(ContentSelector))
}

/// Pre hook: opens a [`CaseParagraph`] scope for a heading block.
pub struct StartCaseParagraph;

impl Action for StartCaseParagraph {
    fn pre(
        &self,
        _user: &mut dyn Any,
        block: &Block,
        _ctx: &mut ActionContext<'_>,
    ) -> Result<Option<Box<dyn Any>>, ActionError> {
        match split_title(block) {
            Some((title, content)) => Ok(Some(Box::new(CaseParagraph { title, content }))),
            None => Err(ActionError::new("block does not start with a heading run")),
        }
    }
}

pub fn start_case_paragraph_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    reject_params(params, "the paragraph-start hook")?;
    Ok(Box::new(StartCaseParagraph))
}

/// Post hook: files the finished [`CaseParagraph`] as a section of the
/// surrounding case model.
pub struct EndCaseParagraph;

impl Action for EndCaseParagraph {
    fn post(
        &self,
        user: &mut dyn Any,
        child: Option<Box<dyn Any>>,
        _block: &Block,
        _ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let model = case_model(user, "the paragraph-end hook")?;
        // No child scope means the pre hook failed; that is already a red
        // event, so there is nothing left to file.
        let Some(child) = child else { return Ok(()) };
        let paragraph = child
            .downcast::<CaseParagraph>()
            .map_err(|_| ActionError::new("scope object is not a case paragraph"))?;
        model.sections.push(Section { title: paragraph.title, content: paragraph.content });
        Ok(())
    }
}

pub fn end_case_paragraph_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    reject_params(params, "the paragraph-end hook")?;
    Ok(Box::new(EndCaseParagraph))
}

/// Stores the source text as the case title.
pub struct SetCaseTitleAction;

impl Action for SetCaseTitleAction {
    fn perform(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let rule_id = ctx.rule_id.to_string();
        let model = case_model(user, "set-case-title")?;
        let Some(text) = ctx.source.text() else {
            ctx.events.push(
                Event::yellow("set-case-title: source is absent, title unchanged")
                    .with_block(block.type_id(), block.ordinal())
                    .with_rule(rule_id),
            );
            return Ok(());
        };
        let title = normalize_text(&text);
        if let Some(old) = &model.title {
            if *old != title {
                ctx.events.push(
                    Event::yellow(format!("case title '{old}' replaced by '{title}'"))
                        .with_block(block.type_id(), block.ordinal())
                        .with_rule(rule_id),
                );
            }
        }
        model.title = Some(title);
        Ok(())
    }
}

pub fn set_case_title_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    reject_params(params, "set-case-title")?;
    Ok(Box::new(SetCaseTitleAction))
}

/// Collects the source fragment's lines and list items into a named
/// terminology of the case model.
pub struct TerminologyAction {
    key: String,
}

impl Action for TerminologyAction {
    fn perform(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let rule_id = ctx.rule_id.to_string();
        let model = case_model(user, "the terminology action")?;
        let note_empty = |events: &mut Vec<Event>| {
            events.push(
                Event::yellow(format!("terminology '{}': no entries found", self.key))
                    .with_block(block.type_id(), block.ordinal())
                    .with_rule(rule_id.clone()),
            );
        };
        let Some(fragment) = ctx.source.as_fragment() else {
            note_empty(ctx.events);
            return Ok(());
        };
        let entries = collect_entries(&fragment);
        if entries.is_empty() {
            note_empty(ctx.events);
            return Ok(());
        }
        let bucket = model.terminologies.entry(self.key.clone()).or_default();
        for entry in entries {
            merge_entry(bucket, entry);
        }
        Ok(())
    }
}

pub fn terminology_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    let key = params
        .get("terminology")
        .ok_or("the terminology action needs a 'terminology' parameter")?;
    if key.trim().is_empty() {
        return Err("the terminology action needs a non-empty 'terminology' parameter".into());
    }
    for name in params.keys() {
        if name != "terminology" {
            return Err(format!("the terminology action does not take a '{name}' parameter"));
        }
    }
    Ok(Box::new(TerminologyAction { key: key.trim().to_string() }))
}

/// Copies the images a block references out of the container, naming each
/// file by its content digest, and records the references.
pub struct ImageExtractionAction;

impl Action for ImageExtractionAction {
    fn perform(
        &self,
        user: &mut dyn Any,
        block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let rule_id = ctx.rule_id.to_string();
        let mut refs = Vec::new();
        for image in image_elements(block.fragment()) {
            let Some(href) = image_href(&image) else {
                ctx.events.push(
                    Event::red("image element without a reference target", rule_id.clone())
                        .with_block(block.type_id(), block.ordinal()),
                );
                continue;
            };
            let Some(bytes) = ctx.tree.resources().get(&href) else {
                ctx.events.push(
                    Event::red(
                        format!("image '{href}' not found in the container"),
                        rule_id.clone(),
                    )
                    .with_block(block.type_id(), block.ordinal()),
                );
                continue;
            };
            let digest = hex_digest(bytes);
            let ext = Path::new(&href)
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or("bin")
                .to_lowercase();
            let file = format!("media/{digest}.{ext}");
            match &ctx.config.media_dir {
                Some(dir) => {
                    let target = dir.join(format!("{digest}.{ext}"));
                    let written = std::fs::create_dir_all(dir)
                        .and_then(|_| std::fs::write(&target, bytes));
                    if let Err(e) = written {
                        ctx.events.push(
                            Event::red(
                                format!("image '{href}': cannot write {}: {e}", target.display()),
                                rule_id.clone(),
                            )
                            .with_block(block.type_id(), block.ordinal()),
                        );
                        continue;
                    }
                }
                None => {
                    ctx.events.push(
                        Event::yellow(format!(
                            "no media directory configured, image '{href}' recorded but not copied"
                        ))
                        .with_block(block.type_id(), block.ordinal())
                        .with_rule(rule_id.clone()),
                    );
                }
            }
            refs.push(ImageRef { file, alt: image_alt(&image) });
        }
        let model = case_model(user, "the image extraction action")?;
        model.images.extend(refs);
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn image_extraction_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    reject_params(params, "the image extraction action")?;
    Ok(Box::new(ImageExtractionAction))
}

/// Post hook for the root rule set: pairs equally colored runs. A color
/// marks content in an observation section and entries of the diagnoses
/// terminology; each such pair becomes a relation.
pub struct ColorRelationsAction;

impl Action for ColorRelationsAction {
    fn post(
        &self,
        user: &mut dyn Any,
        _child: Option<Box<dyn Any>>,
        _block: &Block,
        ctx: &mut ActionContext<'_>,
    ) -> Result<(), ActionError> {
        let rule_id = ctx.rule_id.to_string();
        let model = case_model(user, "the color-relations hook")?;

        // Observations: colored runs in sections that are not terminology
        // listings themselves.
        let mut observations: Vec<(String, String, String)> = Vec::new();
        for section in &model.sections {
            if model.terminologies.contains_key(&section.title) {
                continue;
            }
            for (color, run) in colored_runs(section.content.nodes()) {
                observations.push((color, section.title.clone(), normalize_text(&run.text())));
            }
        }

        let mut diagnoses: Vec<(String, String)> = Vec::new();
        if let Some(entries) = model.terminologies.get(DIAGNOSES_KEY) {
            collect_diagnosis_colors(entries, &mut diagnoses);
        }

        for (color, section, observation) in &observations {
            for (diagnosis_color, diagnosis) in &diagnoses {
                if color == diagnosis_color {
                    model.relations.push(Relation {
                        section: section.clone(),
                        observation: observation.clone(),
                        diagnosis: diagnosis.clone(),
                        color: color.clone(),
                    });
                }
            }
        }

        // A color on only one side marks nothing; that is worth a look.
        let observation_colors: std::collections::BTreeSet<&String> =
            observations.iter().map(|(color, _, _)| color).collect();
        let diagnosis_colors: std::collections::BTreeSet<&String> =
            diagnoses.iter().map(|(color, _)| color).collect();
        for color in observation_colors.difference(&diagnosis_colors) {
            ctx.events.push(
                Event::yellow(format!("color {color} marks content but no diagnosis"))
                    .with_rule(rule_id.clone()),
            );
        }
        for color in diagnosis_colors.difference(&observation_colors) {
            ctx.events.push(
                Event::yellow(format!("color {color} marks a diagnosis but no content"))
                    .with_rule(rule_id.clone()),
            );
        }
        Ok(())
    }
}

fn collect_diagnosis_colors(
    entries: &[crate::caseimport::TermEntry],
    out: &mut Vec<(String, String)>,
) {
    for entry in entries {
        for color in &entry.colors {
            out.push((color.clone(), entry.text.clone()));
        }
        collect_diagnosis_colors(&entry.children, out);
    }
}

pub fn color_relations_factory(params: &Params) -> Result<Box<dyn Action>, String> {
    reject_params(params, "the color-relations hook")?;
    Ok(Box::new(ColorRelationsAction))
}

/// Add the case-import selectors and actions to a registry, under both
/// their short names and the class names legacy rule files use.
pub fn register(registry: &mut Registry) -> Result<(), SetupError> {
    registry.register_selector("case-title", title_selector_factory)?;
    registry
        .register_selector("de.d3web.caseParser.selectors.TitleSelector", title_selector_factory)?;
    registry.register_selector("case-content", content_selector_factory)?;
    registry.register_selector(
        "de.d3web.caseParser.selectors.ContentSelector",
        content_selector_factory,
    )?;
    registry.register_action("set-case-title", set_case_title_factory)?;
    registry.register_action("case-paragraph-start", start_case_paragraph_factory)?;
    registry.register_action(
        "de.d3web.caseParser.actions.examinations.StartCaseParagraph",
        start_case_paragraph_factory,
    )?;
    registry.register_action("case-paragraph-end", end_case_paragraph_factory)?;
    registry.register_action(
        "de.d3web.caseParser.actions.examinations.EndCaseParagraph",
        end_case_paragraph_factory,
    )?;
    registry.register_action("case-terminology", terminology_factory)?;
    registry.register_action("extract-images", image_extraction_factory)?;
    registry.register_action(
        "de.d3web.caseParser.actions.ImageExtraction",
        image_extraction_factory,
    )?;
    registry.register_action("color-relations", color_relations_factory)?;
    Ok(())
}
