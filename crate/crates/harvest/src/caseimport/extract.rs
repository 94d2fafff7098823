//! Fragment dissection for case documents: heading split, terminology
//! entry collection, and background-color run detection.

use std::sync::OnceLock;

use regex::Regex;

use crate::caseimport::TermEntry;
use crate::docmodel::{normalize_text, Fragment, NodeRef};
use crate::engine::Block;
use crate::selectors::leading_styled_run;

/// The heading title pattern: everything up to the trailing colon.
pub(crate) fn heading_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\s*(.*)\s*:").expect("fixed pattern"))
}

/// The bold run a heading block starts with.
pub(crate) fn heading_run(block: &Block) -> Option<NodeRef> {
    leading_styled_run(block.fragment(), "bold", "true")
}

/// Split a heading block into (normalized title, content). The content is
/// the block without its heading paragraph; a heading paragraph carries
/// nothing but the heading run.
pub(crate) fn split_title(block: &Block) -> Option<(String, Fragment)> {
    let run = heading_run(block)?;
    let raw = run.text();
    let captures = heading_regex().captures(&raw)?;
    let title = normalize_text(captures.get(1).map(|m| m.as_str()).unwrap_or(""));
    if title.is_empty() {
        return None;
    }
    let content = Fragment::from_nodes(block.fragment().nodes()[1..].to_vec());
    Some((title, content))
}

pub(crate) fn normalize_color(raw: &str) -> String {
    raw.trim().to_lowercase()
}

fn is_marking(color: &str) -> bool {
    !color.is_empty() && color != "transparent" && color != "none"
}

/// Outermost elements with a resolved background color. Children of a
/// collected run belong to it and are not reported again.
pub(crate) fn colored_runs(nodes: &[NodeRef]) -> Vec<(String, NodeRef)> {
    let mut out = Vec::new();
    for node in nodes {
        collect_colored(node, &mut out);
    }
    out
}

fn collect_colored(node: &NodeRef, out: &mut Vec<(String, NodeRef)>) {
    if node.is_element() {
        if let Some(raw) = node.resolved_style("background-color") {
            let color = normalize_color(&raw);
            if is_marking(&color) {
                out.push((color, node.clone()));
                return;
            }
        }
    }
    for child in node.children() {
        collect_colored(&child, out);
    }
}

fn is_list(node: &NodeRef) -> bool {
    node.is_element()
        && matches!(node.local_name(), Some("list" | "unordered-list" | "ordered-list"))
}

fn is_list_item(node: &NodeRef) -> bool {
    node.is_element() && node.local_name() == Some("list-item")
}

/// Terminology entries from a section's content: one entry per list item
/// (nested lists become child entries) or per non-empty paragraph line,
/// deduplicated by normalized text.
pub(crate) fn collect_entries(content: &Fragment) -> Vec<TermEntry> {
    let mut out = Vec::new();
    for node in content.iter() {
        entry_lines(node, &mut out);
    }
    out
}

fn entry_lines(node: &NodeRef, out: &mut Vec<TermEntry>) {
    if is_list(node) {
        for item in node.children().filter(is_list_item) {
            if let Some(entry) = entry_from_item(&item) {
                merge_entry(out, entry);
            }
        }
    } else if node.is_element() {
        if node.children().any(|child| is_list(&child)) {
            for child in node.children() {
                entry_lines(&child, out);
            }
        } else {
            let text = normalize_text(&node.text());
            if !text.is_empty() {
                merge_entry(out, TermEntry { text, colors: colors_of(node), children: Vec::new() });
            }
        }
    }
}

fn entry_from_item(item: &NodeRef) -> Option<TermEntry> {
    let mut text = String::new();
    let mut colors = Vec::new();
    let mut children = Vec::new();
    for child in item.children() {
        if is_list(&child) {
            for sub in child.children().filter(is_list_item) {
                if let Some(entry) = entry_from_item(&sub) {
                    merge_entry(&mut children, entry);
                }
            }
        } else {
            text.push_str(&child.text());
            for color in colors_of(&child) {
                if !colors.contains(&color) {
                    colors.push(color);
                }
            }
        }
    }
    let text = normalize_text(&text);
    if text.is_empty() {
        return None;
    }
    Some(TermEntry { text, colors, children })
}

fn colors_of(node: &NodeRef) -> Vec<String> {
    let mut colors = Vec::new();
    for (color, _) in colored_runs(std::slice::from_ref(node)) {
        if !colors.contains(&color) {
            colors.push(color);
        }
    }
    colors
}

/// Insert an entry, merging into an existing same-text entry: colors
/// union, children merged recursively.
pub(crate) fn merge_entry(entries: &mut Vec<TermEntry>, entry: TermEntry) {
    match entries.iter_mut().find(|e| e.text == entry.text) {
        Some(existing) => {
            for color in entry.colors {
                if !existing.colors.contains(&color) {
                    existing.colors.push(color);
                }
            }
            for child in entry.children {
                merge_entry(&mut existing.children, child);
            }
        }
        None => entries.push(entry),
    }
}

/// Every image element in the fragment, document order.
pub(crate) fn image_elements(fragment: &Fragment) -> Vec<NodeRef> {
    fragment
        .iter()
        .flat_map(|n| n.descendants_or_self())
        .filter(|d| d.is_element() && d.local_name() == Some("image"))
        .collect()
}

/// The container entry an image element points at. Internal references
/// come as `#Pictures/x.png` or `./Pictures/x.png` depending on the
/// writing application; entry names carry neither prefix.
pub(crate) fn image_href(image: &NodeRef) -> Option<String> {
    let raw = image
        .attribute_nodes()
        .find(|a| a.local_name() == Some("href"))
        .and_then(|a| a.value().map(str::to_string))?;
    let entry = raw.trim_start_matches('#');
    let entry = entry.strip_prefix("./").unwrap_or(entry);
    Some(entry.to_string())
}

/// Display name for an image: its own name attribute, else the enclosing
/// frame's, else empty.
pub(crate) fn image_alt(image: &NodeRef) -> String {
    let own = image
        .attribute_nodes()
        .find(|a| a.local_name() == Some("name"))
        .and_then(|a| a.value().map(str::to_string));
    if let Some(name) = own {
        return name;
    }
    image
        .parent()
        .and_then(|p| {
            p.attribute_nodes()
                .find(|a| a.local_name() == Some("name"))
                .and_then(|a| a.value().map(str::to_string))
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::load_xml;

    const STYLED: &str = r##"<doc>
      <office:automatic-styles>
        <style:style style:name="B" style:family="text">
          <style:properties fo:font-weight="bold"/>
        </style:style>
        <style:style style:name="Y" style:family="text">
          <style:properties fo:background-color="#FFFF00"/>
        </style:style>
        <style:style style:name="G" style:family="text">
          <style:properties fo:background-color="#00ff00"/>
        </style:style>
      </office:automatic-styles>
      <office:body/>
    </doc>"##;

    fn styled_doc(body: &str) -> crate::docmodel::DocumentTree {
        load_xml(STYLED.replace("<office:body/>", body).as_bytes()).unwrap()
    }

    fn body_fragment(tree: &crate::docmodel::DocumentTree) -> Fragment {
        let body = tree
            .root()
            .children()
            .find(|c| c.local_name() == Some("body"))
            .unwrap();
        Fragment::from_nodes(body.children().filter(|c| c.is_element()).collect())
    }

    fn block_of(tree: &crate::docmodel::DocumentTree) -> Block {
        Block::new("t", 1, body_fragment(tree))
    }

    #[test]
    fn split_separates_heading_and_content() {
        let tree = styled_doc(
            r#"<office:body>
              <text:p><text:span text:style-name="B">Befund:</text:span></text:p>
              <text:p>Leukozyten hoch.</text:p>
            </office:body>"#,
        );
        let (title, content) = split_title(&block_of(&tree)).unwrap();
        assert_eq!(title, "Befund");
        assert_eq!(content.len(), 1);
        assert_eq!(normalize_text(&content.text()), "Leukozyten hoch.");
    }

    #[test]
    fn split_requires_a_bold_run_with_colon() {
        let no_bold = styled_doc(r#"<office:body><text:p>Befund:</text:p></office:body>"#);
        assert!(split_title(&block_of(&no_bold)).is_none());

        let no_colon = styled_doc(
            r#"<office:body><text:p><text:span text:style-name="B">Befund</text:span></text:p></office:body>"#,
        );
        assert!(split_title(&block_of(&no_colon)).is_none());
    }

    #[test]
    fn title_regex_takes_group_one() {
        let captures = heading_regex().captures("  Anamnese  :").unwrap();
        assert_eq!(normalize_text(captures.get(1).unwrap().as_str()), "Anamnese");
    }

    #[test]
    fn entries_from_paragraph_lines() {
        let tree = styled_doc(
            r#"<office:body>
              <text:p>Blutbild</text:p>
              <text:p>  </text:p>
              <text:p>Sonographie</text:p>
            </office:body>"#,
        );
        let entries = collect_entries(&body_fragment(&tree));
        let texts: Vec<&str> = entries.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(texts, ["Blutbild", "Sonographie"]);
    }

    #[test]
    fn entries_from_nested_lists_keep_hierarchy() {
        let tree = styled_doc(
            r#"<office:body><text:unordered-list>
              <text:list-item>
                <text:p>D1</text:p>
                <text:unordered-list>
                  <text:list-item><text:p>D1a</text:p></text:list-item>
                </text:unordered-list>
              </text:list-item>
              <text:list-item><text:p>D2</text:p></text:list-item>
            </text:unordered-list></office:body>"#,
        );
        let entries = collect_entries(&body_fragment(&tree));
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].text, "D1");
        assert_eq!(entries[0].children.len(), 1);
        assert_eq!(entries[0].children[0].text, "D1a");
        assert_eq!(entries[1].text, "D2");
    }

    #[test]
    fn duplicate_entries_merge() {
        let tree = styled_doc(
            r#"<office:body>
              <text:p>D1</text:p>
              <text:p><text:span text:style-name="Y">D1</text:span></text:p>
            </office:body>"#,
        );
        let entries = collect_entries(&body_fragment(&tree));
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].colors, ["#ffff00"]);
    }

    #[test]
    fn entry_colors_come_from_runs() {
        let tree = styled_doc(
            r#"<office:body><text:unordered-list>
              <text:list-item><text:p><text:span text:style-name="Y">CML</text:span></text:p></text:list-item>
            </text:unordered-list></office:body>"#,
        );
        let entries = collect_entries(&body_fragment(&tree));
        assert_eq!(entries[0].colors, ["#ffff00"]);
    }

    #[test]
    fn colored_runs_report_the_outermost_element_once() {
        let tree = styled_doc(
            r#"<office:body>
              <text:p>vor <text:span text:style-name="Y">aussen <text:span text:style-name="Y">innen</text:span></text:span> nach</text:p>
              <text:p><text:span text:style-name="G">zweite</text:span></text:p>
            </office:body>"#,
        );
        let runs = colored_runs(body_fragment(&tree).nodes());
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].0, "#ffff00");
        assert_eq!(normalize_text(&runs[0].1.text()), "aussen innen");
        assert_eq!(runs[1].0, "#00ff00");
    }

    #[test]
    fn image_lookup_reads_href_and_name() {
        let tree = styled_doc(
            r#"<office:body>
              <text:p><draw:image draw:name="Roentgen" xlink:href="Pictures/x.png"/></text:p>
              <text:p><draw:frame draw:name="Rahmen"><draw:image xlink:href="Pictures/y.png"/></draw:frame></text:p>
            </office:body>"#,
        );
        let images = image_elements(&body_fragment(&tree));
        assert_eq!(images.len(), 2);
        assert_eq!(image_href(&images[0]).as_deref(), Some("Pictures/x.png"));
        assert_eq!(image_alt(&images[0]), "Roentgen");
        assert_eq!(image_alt(&images[1]), "Rahmen");
    }

    #[test]
    fn internal_reference_prefixes_are_stripped() {
        let tree = styled_doc(
            r##"<office:body>
              <text:p><draw:image xlink:href="#Pictures/a.png"/><draw:image xlink:href="./Pictures/b.png"/></text:p>
            </office:body>"##,
        );
        let images = image_elements(&body_fragment(&tree));
        assert_eq!(image_href(&images[0]).as_deref(), Some("Pictures/a.png"));
        assert_eq!(image_href(&images[1]).as_deref(), Some("Pictures/b.png"));
    }
}
