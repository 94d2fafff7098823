//! Training-case import: the shipped application of the engine.
//!
//! A case document is a word-processor file whose content is cut into
//! sections by bold heading paragraphs ending in a colon. Some sections
//! are read verbatim, some hold terminologies (lists of findings,
//! diagnoses, therapies), and background colors link observed content to
//! the diagnosis it supports. The rule file `rules/caseimport.rules.xml`
//! drives the whole pass; this module contributes the selectors and
//! actions it references plus the [`CaseModel`] they fill.

mod actions;
mod extract;

pub use actions::{
    color_relations_factory, content_selector_factory, end_case_paragraph_factory,
    image_extraction_factory, register, set_case_title_factory, start_case_paragraph_factory,
    terminology_factory, title_selector_factory, ColorRelationsAction, ContentSelector,
    EndCaseParagraph, ImageExtractionAction, SetCaseTitleAction, StartCaseParagraph,
    TerminologyAction, TitleSelector,
};

use std::collections::BTreeMap;

use crate::docmodel::{Fragment, NodeRef};
use crate::xmlout::{OutputCursor, OutputDocument, WritePath};

/// Everything extracted from one case document.
#[derive(Default)]
pub struct CaseModel {
    pub title: Option<String>,
    /// Heading-delimited sections, in document order.
    pub sections: Vec<Section>,
    /// Terminology entries by terminology name.
    pub terminologies: BTreeMap<String, Vec<TermEntry>>,
    /// Color-derived links between section content and diagnoses.
    pub relations: Vec<Relation>,
    /// Images copied out of the container.
    pub images: Vec<ImageRef>,
}

pub struct Section {
    pub title: String,
    /// The section's body: the heading block minus its heading paragraph.
    pub content: Fragment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermEntry {
    pub text: String,
    /// Background colors marking this entry, lowercased.
    pub colors: Vec<String>,
    /// Entries of a nested list.
    pub children: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub section: String,
    pub observation: String,
    pub diagnosis: String,
    pub color: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRef {
    /// Output-relative path of the copied file, named by content digest.
    pub file: String,
    pub alt: String,
}

/// Scope object for one section while its block is processed.
pub struct CaseParagraph {
    pub title: String,
    pub content: Fragment,
}

fn wpath(raw: &str) -> WritePath {
    WritePath::parse(raw).expect("fixed path")
}

fn text_value(text: &str) -> Fragment {
    Fragment::single(NodeRef::synthetic_text(text))
}

impl CaseModel {
    /// Serialize as a case XML document. The element shape is fixed so
    /// downstream tooling can rely on it; sections carry copies of their
    /// source content.
    pub fn to_xml(&self) -> String {
        let doc = OutputDocument::new();
        let root = doc.cursor().descend(&wpath("case"), true).expect("root");
        let metadata = root.descend(&wpath("metadata"), true).expect("metadata");
        if let Some(title) = &self.title {
            metadata.set_node(&wpath("title"), true, &text_value(title)).expect("title");
        }
        let sections = root.descend(&wpath("sections"), true).expect("sections");
        for section in &self.sections {
            let out = sections.descend(&wpath("section"), true).expect("section");
            out.set_node(&wpath("@title"), true, &text_value(&section.title)).expect("attr");
            out.append(&section.content).expect("content");
        }
        let terminologies = root.descend(&wpath("terminologies"), true).expect("terminologies");
        for (key, entries) in &self.terminologies {
            let out = terminologies.descend(&wpath("terminology"), true).expect("terminology");
            out.set_node(&wpath("@id"), true, &text_value(key)).expect("attr");
            write_entries(&out, entries);
        }
        let relations = root.descend(&wpath("relations"), true).expect("relations");
        for relation in &self.relations {
            let out = relations.descend(&wpath("relation"), true).expect("relation");
            out.set_node(&wpath("@section"), true, &text_value(&relation.section)).expect("attr");
            out.set_node(&wpath("@observation"), true, &text_value(&relation.observation))
                .expect("attr");
            out.set_node(&wpath("@diagnosis"), true, &text_value(&relation.diagnosis))
                .expect("attr");
            out.set_node(&wpath("@color"), true, &text_value(&relation.color)).expect("attr");
        }
        let images = root.descend(&wpath("images"), true).expect("images");
        for image in &self.images {
            let out = images.descend(&wpath("image"), true).expect("image");
            out.set_node(&wpath("@file"), true, &text_value(&image.file)).expect("attr");
            out.set_node(&wpath("@alt"), true, &text_value(&image.alt)).expect("attr");
        }
        doc.serialize()
    }
}

fn write_entries(cursor: &OutputCursor, entries: &[TermEntry]) {
    for entry in entries {
        let out = cursor.descend(&wpath("entry"), true).expect("entry");
        out.set_node(&wpath("@text"), true, &text_value(&entry.text)).expect("attr");
        if !entry.colors.is_empty() {
            out.set_node(&wpath("@color"), true, &text_value(&entry.colors.join(" ")))
                .expect("attr");
        }
        write_entries(&out, &entry.children);
    }
}
