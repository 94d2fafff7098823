//! Rebuilds the case-import fixture containers under `fixtures/`.
//!
//! The fixtures are zip containers in the OpenOffice-1.x layout: a
//! `mimetype` marker, `content.xml`, `styles.xml`, and a `Pictures/`
//! entry. Entries are stored uncompressed with a fixed timestamp, so the
//! archives are byte-identical on every rebuild:
//!
//! ```text
//! cargo run --example build_fixture
//! ```

use std::io::Write;
use std::path::Path;

use zip::write::SimpleFileOptions;

/// Shared styles: the named Bold style the content styles inherit from.
const STYLES: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<office:document-styles xmlns:office="http://openoffice.org/2000/office" xmlns:style="http://openoffice.org/2000/style" xmlns:fo="http://www.w3.org/1999/XSL/Format">
<office:styles>
<style:style style:name="Standard" style:family="paragraph"/>
<style:style style:name="Bold" style:family="text"><style:properties fo:font-weight="bold"/></style:style>
</office:styles>
</office:document-styles>
"#;

const CONTENT_HEAD: &str = r##"<?xml version="1.0" encoding="UTF-8"?>
<office:document-content xmlns:office="http://openoffice.org/2000/office" xmlns:style="http://openoffice.org/2000/style" xmlns:text="http://openoffice.org/2000/text" xmlns:draw="http://openoffice.org/2000/drawing" xmlns:fo="http://www.w3.org/1999/XSL/Format" xmlns:xlink="http://www.w3.org/1999/xlink">
<office:automatic-styles>
<style:style style:name="T1" style:family="text" style:parent-style-name="Bold"/>
<style:style style:name="M1" style:family="text"><style:properties fo:background-color="#FFFF00"/></style:style>
<style:style style:name="M2" style:family="text"><style:properties fo:background-color="#00FF00"/></style:style>
<style:style style:name="M3" style:family="text"><style:properties fo:background-color="#00FFFF"/></style:style>
</office:automatic-styles>
<office:body>"##;

const CONTENT_FOOT: &str = "</office:body>\n</office:document-content>\n";

/// A dictation-style case letter: title, history, examinations, findings
/// with an image, diagnoses, therapy. The yellow and green marks each pair
/// one observation with one diagnosis.
const LETTER_BODY: &str = concat!(
    r#"<text:p text:style-name="Standard"><text:span text:style-name="T1">Titel:</text:span></text:p>"#,
    r#"<text:p>Unklare Splenomegalie</text:p>"#,
    r#"<text:p><text:span text:style-name="T1">Anamnese:</text:span></text:p>"#,
    "<text:p>Der 54-j\u{e4}hrige Patient berichtet \u{fc}ber seit Wochen zunehmendes Druckgef\u{fc}hl im linken Oberbauch. Bei der Aufnahme zeigt sich eine <text:span text:style-name=\"M1\">deutliche Splenomegalie</text:span>.</text:p>",
    "<text:p>Kein Fieber, kein Nachtschwei\u{df}, Gewicht stabil.</text:p>",
    r#"<text:p><text:span text:style-name="T1">Untersuchungen:</text:span></text:p>"#,
    r#"<text:unordered-list>"#,
    r#"<text:list-item><text:p>Blutbild mit Differentialblutbild</text:p></text:list-item>"#,
    r#"<text:list-item><text:p>Sonographie Abdomen</text:p></text:list-item>"#,
    r#"<text:list-item><text:p>Knochenmarkpunktion</text:p></text:list-item>"#,
    r#"</text:unordered-list>"#,
    r#"<text:p><text:span text:style-name="T1">Befund:</text:span></text:p>"#,
    r#"<text:p>Leukozyten 134/nl, im Ausstrich <text:span text:style-name="M2">Blasten im Differentialblutbild</text:span>.</text:p>"#,
    r#"<text:p><draw:image draw:name="Sonographie Milz" xlink:href="Pictures/milz.png"/></text:p>"#,
    r#"<text:p><text:span text:style-name="T1">Diagnosen:</text:span></text:p>"#,
    r#"<text:unordered-list>"#,
    "<text:list-item><text:p><text:span text:style-name=\"M1\">Chronische myeloische Leuk\u{e4}mie</text:span></text:p>",
    r#"<text:unordered-list><text:list-item><text:p><text:span text:style-name="M2">Blastenschub</text:span></text:p></text:list-item></text:unordered-list>"#,
    r#"</text:list-item>"#,
    r#"<text:list-item><text:p>Reaktive Splenomegalie</text:p></text:list-item>"#,
    r#"</text:unordered-list>"#,
    r#"<text:p><text:span text:style-name="T1">Therapie:</text:span></text:p>"#,
    r#"<text:unordered-list>"#,
    r#"<text:list-item><text:p>Tyrosinkinaseinhibitor einleiten</text:p></text:list-item>"#,
    r#"<text:list-item><text:p>Verlaufskontrolle Blutbild</text:p></text:list-item>"#,
    r#"</text:unordered-list>"#,
);

/// Relation-counting fixture: several runs share a color, one color marks
/// only a diagnosis. Yellow pairs 3 runs with 2 diagnoses, green 1 with 1,
/// cyan marks a diagnosis nothing points at.
const COLORS_BODY: &str = concat!(
    r#"<text:p><text:span text:style-name="T1">Befund:</text:span></text:p>"#,
    "<text:p>Links <text:span text:style-name=\"M1\">vergr\u{f6}\u{df}erte Milz</text:span>, daneben <text:span text:style-name=\"M1\">derbe Konsistenz</text:span>.</text:p>",
    "<text:p>Im Labor <text:span text:style-name=\"M2\">erh\u{f6}hte Leukozyten</text:span>.</text:p>",
    r#"<text:p><text:span text:style-name="T1">Verlauf:</text:span></text:p>"#,
    r#"<text:p>Weiterhin <text:span text:style-name="M1">tastbarer Milzrand</text:span>.</text:p>"#,
    r#"<text:p><text:span text:style-name="T1">Diagnosen:</text:span></text:p>"#,
    r#"<text:unordered-list>"#,
    r#"<text:list-item><text:p><text:span text:style-name="M1">Splenomegalie</text:span></text:p></text:list-item>"#,
    r#"<text:list-item><text:p><text:span text:style-name="M1">Lymphom</text:span></text:p></text:list-item>"#,
    r#"<text:list-item><text:p><text:span text:style-name="M2">Leukozytose</text:span></text:p></text:list-item>"#,
    r#"<text:list-item><text:p><text:span text:style-name="M3">Eisenmangel</text:span></text:p></text:list-item>"#,
    r#"</text:unordered-list>"#,
);

/// A 4x4 grayscale gradient; any small valid image does, the pipeline
/// only copies and digests the bytes.
pub const PNG: &[u8] = &[
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00, 0x8c,
    0x9a, 0xc1, 0xa2, 0x00, 0x00, 0x00, 0x1c, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x63, 0x60,
    0xb0, 0xa9, 0xd8, 0xc2, 0xc0, 0xef, 0xdd, 0x7e, 0x98, 0x41, 0x2e, 0x6a, 0xda, 0x25, 0x06,
    0xdd, 0xcc, 0xa5, 0x0f, 0x01, 0x3b, 0xd8, 0x07, 0x09, 0xe5, 0xc6, 0x6c, 0x97, 0x00, 0x00,
    0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
];

/// Write a zip with stored entries and a fixed timestamp so the bytes
/// never depend on the build machine.
pub fn deterministic_zip(entries: &[(&str, &[u8])]) -> Vec<u8> {
    let options = SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Stored)
        .last_modified_time(zip::DateTime::default());
    let mut writer = zip::ZipWriter::new(std::io::Cursor::new(Vec::new()));
    for (name, data) in entries {
        writer.start_file(name.to_string(), options).expect("zip entry");
        writer.write_all(data).expect("zip entry body");
    }
    writer.finish().expect("zip directory").into_inner()
}

pub fn letter_sxw() -> Vec<u8> {
    let content = format!("{CONTENT_HEAD}{LETTER_BODY}{CONTENT_FOOT}");
    deterministic_zip(&[
        ("mimetype", b"application/vnd.sun.xml.writer"),
        ("content.xml", content.as_bytes()),
        ("styles.xml", STYLES.as_bytes()),
        ("Pictures/milz.png", PNG),
    ])
}

pub fn colors_sxw() -> Vec<u8> {
    let content = format!("{CONTENT_HEAD}{COLORS_BODY}{CONTENT_FOOT}");
    deterministic_zip(&[
        ("mimetype", b"application/vnd.sun.xml.writer"),
        ("content.xml", content.as_bytes()),
        ("styles.xml", STYLES.as_bytes()),
    ])
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).expect("fixtures dir");
    for (name, bytes) in [("letter.sxw", letter_sxw()), ("colors.sxw", colors_sxw())] {
        let path = dir.join(name);
        std::fs::write(&path, &bytes).expect("write fixture");
        println!("wrote {} ({} bytes)", path.display(), bytes.len());
    }
}
