//! Independent re-derivation of case facts, used to check the import
//! pipeline. Parses with sxd-document instead of the crate's loader and
//! walks the DOM directly, so no production code is shared.
#![allow(dead_code)]

use std::collections::BTreeMap;

use sxd_document::dom::{ChildOfElement, Element};
use sxd_document::Package;

const TERMINOLOGY_TITLES: &[&str] = &["Untersuchungen", "Diagnosen", "Therapie"];

/// Read one entry out of a zip container.
pub fn container_entry(container: &[u8], name: &str) -> Vec<u8> {
    let mut archive = zip::ZipArchive::new(std::io::Cursor::new(container)).expect("zip");
    let mut file = archive.by_name(name).expect("entry present");
    let mut out = Vec::new();
    std::io::copy(&mut file, &mut out).expect("read entry");
    out
}

struct StyleFacts {
    parent: Option<String>,
    bold: Option<bool>,
    background: Option<String>,
}

struct Styles {
    by_name: BTreeMap<String, StyleFacts>,
}

impl Styles {
    fn resolve_bold(&self, name: &str) -> bool {
        let mut current = Some(name.to_string());
        let mut hops = 0;
        while let (Some(style_name), true) = (current, hops < 32) {
            let Some(facts) = self.by_name.get(&style_name) else { return false };
            if let Some(bold) = facts.bold {
                return bold;
            }
            current = facts.parent.clone();
            hops += 1;
        }
        false
    }

    fn resolve_background(&self, name: &str) -> Option<String> {
        let mut current = Some(name.to_string());
        let mut hops = 0;
        while let (Some(style_name), true) = (current, hops < 32) {
            let facts = self.by_name.get(&style_name)?;
            if let Some(background) = &facts.background {
                return Some(background.clone());
            }
            current = facts.parent.clone();
            hops += 1;
        }
        None
    }
}

fn document_element(package: &Package) -> Element<'_> {
    package
        .as_document()
        .root()
        .children()
        .into_iter()
        .find_map(|c| match c {
            sxd_document::dom::ChildOfRoot::Element(e) => Some(e),
            _ => None,
        })
        .expect("document element")
}

fn attr_by_local(element: Element<'_>, local: &str) -> Option<String> {
    element
        .attributes()
        .into_iter()
        .find(|a| a.name().local_part() == local)
        .map(|a| a.value().to_string())
}

fn harvest_styles(root: Element<'_>, styles: &mut Styles) {
    let mut stack = vec![root];
    while let Some(element) = stack.pop() {
        if element.name().local_part() == "style" {
            if let Some(name) = attr_by_local(element, "name") {
                let mut facts = StyleFacts {
                    parent: attr_by_local(element, "parent-style-name"),
                    bold: None,
                    background: None,
                };
                for child in element.children() {
                    let ChildOfElement::Element(props) = child else { continue };
                    if !props.name().local_part().contains("properties") {
                        continue;
                    }
                    for attr in props.attributes() {
                        match attr.name().local_part() {
                            "font-weight" => facts.bold = Some(attr.value() == "bold"),
                            "background-color" => {
                                facts.background = Some(attr.value().to_lowercase())
                            }
                            _ => {}
                        }
                    }
                }
                styles.by_name.insert(name, facts);
            }
        }
        for child in element.children() {
            if let ChildOfElement::Element(e) = child {
                stack.push(e);
            }
        }
    }
}

fn element_text(element: Element<'_>) -> String {
    let mut out = String::new();
    collect_text(element, &mut out);
    out
}

fn collect_text(element: Element<'_>, out: &mut String) {
    for child in element.children() {
        match child {
            ChildOfElement::Text(t) => out.push_str(t.text()),
            ChildOfElement::Element(e) => collect_text(e, out),
            _ => {}
        }
    }
}

fn child_elements<'d>(element: Element<'d>) -> Vec<Element<'d>> {
    element
        .children()
        .into_iter()
        .filter_map(|c| match c {
            ChildOfElement::Element(e) => Some(e),
            _ => None,
        })
        .collect()
}

/// A heading in the fixtures: a paragraph whose single span is bold and
/// whose text ends with a colon.
fn heading_title(paragraph: Element<'_>, styles: &Styles) -> Option<String> {
    if paragraph.name().local_part() != "p" && paragraph.name().local_part() != "h" {
        return None;
    }
    let children = child_elements(paragraph);
    let &[span] = children.as_slice() else { return None };
    if span.name().local_part() != "span" {
        return None;
    }
    let style = attr_by_local(span, "style-name")?;
    if !styles.resolve_bold(&style) {
        return None;
    }
    let text = element_text(span);
    let trimmed = text.trim();
    let title = trimmed.strip_suffix(':')?.trim();
    if title.is_empty() {
        return None;
    }
    Some(title.to_string())
}

pub struct OracleCase {
    /// (title, content elements) in document order. Content lives in the
    /// Package the case was parsed from, so only derived data is public.
    sections: Vec<(String, Vec<String>)>,
    /// Colors of marked runs in non-terminology sections.
    observation_colors: Vec<String>,
    /// Colors on diagnosis entries, one per (entry, color) pair.
    diagnosis_colors: Vec<String>,
}

impl OracleCase {
    pub fn section_titles(&self) -> Vec<&str> {
        self.sections.iter().map(|(t, _)| t.as_str()).collect()
    }

    /// The pairing count the import must reproduce: for every color, runs
    /// in observation sections times diagnosis entries carrying it.
    pub fn relation_count(&self) -> usize {
        let mut per_color: BTreeMap<&str, usize> = BTreeMap::new();
        for color in &self.diagnosis_colors {
            *per_color.entry(color).or_default() += 1;
        }
        self.observation_colors
            .iter()
            .map(|c| per_color.get(c.as_str()).copied().unwrap_or(0))
            .sum()
    }

    /// Colors that appear on one side only.
    pub fn one_sided_colors(&self) -> Vec<String> {
        let mut out = Vec::new();
        for color in &self.observation_colors {
            if !self.diagnosis_colors.contains(color) && !out.contains(color) {
                out.push(color.clone());
            }
        }
        for color in &self.diagnosis_colors {
            if !self.observation_colors.contains(color) && !out.contains(color) {
                out.push(color.clone());
            }
        }
        out
    }
}

/// Re-derive sections and color pairings straight from the container.
pub fn analyze_case(container: &[u8]) -> OracleCase {
    let content = String::from_utf8(container_entry(container, "content.xml")).expect("utf8");
    let shared = String::from_utf8(container_entry(container, "styles.xml")).expect("utf8");
    let content_package: Package = sxd_document::parser::parse(&content).expect("content xml");
    let shared_package: Package = sxd_document::parser::parse(&shared).expect("styles xml");

    let mut styles = Styles { by_name: BTreeMap::new() };
    // Content styles first: same-name entries there shadow shared ones.
    harvest_styles(document_element(&content_package), &mut styles);
    let mut shared_styles = Styles { by_name: BTreeMap::new() };
    harvest_styles(document_element(&shared_package), &mut shared_styles);
    for (name, facts) in shared_styles.by_name {
        styles.by_name.entry(name).or_insert(facts);
    }

    let root = document_element(&content_package);
    let body = child_elements(root)
        .into_iter()
        .find(|e| e.name().local_part() == "body")
        .expect("office body");

    let mut sections: Vec<(String, Vec<Element<'_>>)> = Vec::new();
    for child in child_elements(body) {
        if let Some(title) = heading_title(child, &styles) {
            sections.push((title, Vec::new()));
        } else if let Some((_, content)) = sections.last_mut() {
            content.push(child);
        }
    }

    let mut observation_colors = Vec::new();
    let mut diagnosis_colors = Vec::new();
    for (title, content) in &sections {
        if !TERMINOLOGY_TITLES.contains(&title.as_str()) {
            for element in content {
                collect_run_colors(*element, &styles, &mut observation_colors);
            }
        }
        if title == "Diagnosen" {
            for element in content {
                collect_entry_colors(*element, &styles, &mut diagnosis_colors);
            }
        }
    }

    OracleCase {
        sections: sections
            .into_iter()
            .map(|(t, content)| {
                (t, content.iter().map(|e| e.name().local_part().to_string()).collect())
            })
            .collect(),
        observation_colors,
        diagnosis_colors,
    }
}

fn background_of(element: Element<'_>, styles: &Styles) -> Option<String> {
    let style = attr_by_local(element, "style-name")?;
    let color = styles.resolve_background(&style)?;
    if color.is_empty() || color == "transparent" || color == "none" {
        return None;
    }
    Some(color)
}

/// Outermost colored elements below `element`, one color per run.
fn collect_run_colors(element: Element<'_>, styles: &Styles, out: &mut Vec<String>) {
    if let Some(color) = background_of(element, styles) {
        out.push(color);
        return;
    }
    for child in child_elements(element) {
        collect_run_colors(child, styles, out);
    }
}

/// One (entry, color) pair per colored run inside a list item's own
/// paragraphs; nested lists are their own items.
fn collect_entry_colors(element: Element<'_>, styles: &Styles, out: &mut Vec<String>) {
    let local = element.name().local_part();
    if local == "list-item" {
        let mut colors: Vec<String> = Vec::new();
        for child in child_elements(element) {
            if child.name().local_part().ends_with("list") {
                collect_entry_colors(child, styles, out);
            } else {
                let mut found = Vec::new();
                collect_run_colors(child, styles, &mut found);
                for color in found {
                    if !colors.contains(&color) {
                        colors.push(color);
                    }
                }
            }
        }
        out.extend(colors);
    } else {
        for child in child_elements(element) {
            collect_entry_colors(child, styles, out);
        }
    }
}
