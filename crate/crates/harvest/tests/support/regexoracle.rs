//! String-level oracle for the regexp selector.
//!
//! The selector works on the tree: it concatenates the block's text nodes,
//! matches, and maps the span back to nodes. The oracle ignores the tree
//! entirely: it runs the same pattern over the block's flat text and takes
//! group 1 when it participated, the whole match otherwise. The selector
//! result's text must equal the oracle string exactly, including empty
//! matches (`Some("")`) as distinct from no match (`None`).

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

pub const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "xx", "yy", "Ende", "42"];
pub const SEPARATORS: [&str; 4] = [" ", "  ", ": ", ", "];

/// Expected result at the string level.
pub fn expected(pattern: &str, haystack: &str) -> Option<String> {
    let re = Regex::new(pattern).expect("generated patterns are valid");
    let caps = re.captures(haystack)?;
    let m = caps.get(1).or_else(|| caps.get(0)).expect("group 0 always present");
    Some(m.as_str().to_string())
}

/// A block's worth of text: words and separators, split across 1..=4
/// elements with occasional nested spans so matches cross node boundaries.
pub fn random_xml(rng: &mut impl Rng) -> String {
    let mut text_pieces: Vec<String> = Vec::new();
    let word_count = rng.gen_range(1..=6);
    for index in 0..word_count {
        if index > 0 {
            text_pieces.push(SEPARATORS[rng.gen_range(0..SEPARATORS.len())].to_string());
        }
        text_pieces.push(WORDS[rng.gen_range(0..WORDS.len())].to_string());
    }
    let flat: String = text_pieces.concat();

    // Cut the flat text at random points into up to 4 paragraph elements,
    // and sometimes wrap a middle segment in a nested span.
    let mut cuts: Vec<usize> = (0..rng.gen_range(0..=3))
        .map(|_| rng.gen_range(0..=flat.len()))
        .filter(|cut| flat.is_char_boundary(*cut))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut segments = Vec::new();
    let mut last = 0;
    for cut in cuts {
        segments.push(&flat[last..cut]);
        last = cut;
    }
    segments.push(&flat[last..]);

    let mut xml = String::from("<doc>");
    for segment in segments {
        if rng.gen_bool(0.3) && segment.len() >= 2 {
            let mid = segment.len() / 2;
            let mid = (mid..segment.len()).find(|i| segment.is_char_boundary(*i)).unwrap();
            xml.push_str(&format!(
                "<p>{}<span>{}</span></p>",
                escape(&segment[..mid]),
                escape(&segment[mid..])
            ));
        } else {
            xml.push_str(&format!("<p>{}</p>", escape(segment)));
        }
    }
    xml.push_str("</doc>");
    xml
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Patterns built from safe templates: literals that may or may not occur,
/// capture groups, classes, alternation, optional and empty-capable parts.
pub fn random_pattern(rng: &mut impl Rng) -> String {
    let a = *WORDS.choose(rng).unwrap();
    let b = *WORDS.choose(rng).unwrap();
    match rng.gen_range(0..10) {
        0 => a.to_string(),
        1 => format!("({a})"),
        2 => format!("{a}\\s*{b}"),
        3 => "\\s*(.*)\\s*:".to_string(),
        4 => "([a-d]+)".to_string(),
        5 => format!("({a}|{b})"),
        6 => "(x+)y".to_string(),
        7 => format!("{a}?"),
        8 => "(\\w+), ".to_string(),
        _ => format!("e(n?)de|({a})"),
    }
}
