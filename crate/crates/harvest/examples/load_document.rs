//! Load documents into the shared tree model: plain XML from bytes, then
//! the bundled office container, and walk what came out.
//!
//! ```text
//! cargo run --example load_document
//! ```

use std::path::Path;

use harvest::docmodel::{load_auto, load_xml, normalize_text, NodeRef};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Plain XML. Whitespace inside text nodes is preserved by the loader;
    // normalization is a separate, explicit step.
    let tree = load_xml(
        br#"<memo urgency="high">
  <to>Dr. Watson</to>
  <body>Meet me   at <b>Baker Street</b> at once.</body>
</memo>"#,
    )?;

    println!("outline:");
    print_outline(&tree.root(), 0);

    let body = tree
        .root()
        .children()
        .find(|n| n.name() == Some("body"))
        .expect("memo has a body");
    println!("raw text:        {:?}", body.text());
    println!("normalized text: {:?}", normalize_text(&body.text()));
    println!("urgency:         {:?}", tree.root().attribute("urgency"));

    // Zipped office container: content and styles are merged, pictures end
    // up in the resource table, style attributes resolve through the style
    // chain.
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let container = std::fs::read(manifest.join("fixtures/letter.sxw"))?;
    let tree = load_auto(&container)?;

    println!("\ncontainer root:  {:?}", tree.root().name());
    println!("resources:       {:?}", tree.resources().keys().collect::<Vec<_>>());
    println!("load warnings:   {:?}", tree.load_warnings());

    let styled = tree
        .root()
        .descendants_or_self()
        .into_iter()
        .find(|n| n.resolved_style("fo:color").is_some());
    if let Some(node) = styled {
        println!(
            "first colored paragraph: {:?} -> {:?}",
            normalize_text(&node.text()),
            node.resolved_style("fo:color")
        );
    }
    Ok(())
}

fn print_outline(node: &NodeRef, depth: usize) {
    let indent = "  ".repeat(depth);
    if node.is_element() {
        println!("{indent}{}", node.name().unwrap_or("?"));
        for child in node.children() {
            print_outline(&child, depth + 1);
        }
    } else if node.is_text() {
        println!("{indent}#text {:?}", node.value().unwrap_or(""));
    }
}
