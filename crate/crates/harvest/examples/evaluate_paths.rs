//! The path language by example: axes, predicates, unions, and the errors
//! the parser reports.
//!
//! ```text
//! cargo run --example evaluate_paths
//! ```

use harvest::docmodel::{load_xml, normalize_text};
use harvest::pathlang::PathExpr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = load_xml(
        br#"<library>
             <book id="b1"><title>Rust in Action</title><author>Tim</author></book>
             <book id="b2"><title>Learning XPath</title></book>
             <shelf><book id="b3"><title>Ende</title></book></shelf>
           </library>"#,
    )?;
    let scope = tree.document_scope();

    let expressions = [
        // The first step tests scope nodes themselves, so paths read as if
        // the scope were the document root.
        "book/title",
        "book/@id",
        "descendant-or-self::book",
        "shelf/book/title | book/author",
        "book[contains(text(),'Rust')]/title",
        "descendant-or-self::*[text()='Ende']",
        "@missing",
    ];
    for source in expressions {
        let expr = PathExpr::parse(source)?;
        let shown: Vec<String> = expr
            .eval(&scope)
            .iter()
            .map(|node| {
                if node.is_attribute() {
                    format!("@{}={:?}", node.name().unwrap_or("?"), node.value().unwrap_or(""))
                } else {
                    format!("<{}> {:?}", node.name().unwrap_or("?"), normalize_text(&node.text()))
                }
            })
            .collect();
        println!("{source}\n    => {shown:?}");
    }

    // Parse errors carry the byte offset of the offending token.
    for bad in ["//book", "book[position()=1]", "book/@id/title"] {
        let err = PathExpr::parse(bad).expect_err("rejected");
        println!("{bad}\n    !! {err}");
    }
    Ok(())
}
