//! Input loading: plain XML and zipped office containers.
//!
//! Both loaders produce the same [`DocumentTree`]. Names keep their written
//! prefixes, whitespace-only text nodes survive, and load failures carry a
//! line and column. A container is a zip archive whose `content.xml` entry is
//! the document; an optional `styles.xml` contributes shared styles and every
//! other entry is kept as a binary resource.

use std::collections::BTreeMap;
use std::io::Read;
use std::sync::Arc;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::style::{canonical_property, StyleEntry, StyleTable};
use super::tree::{DocumentTree, NodeRef, TreeBuilder};

/// Why an input could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("in container entry {entry}: {source}")]
    ContainerEntry {
        entry: String,
        #[source]
        source: Box<LoadError>,
    },
    #[error("container error: {0}")]
    Container(String),
    #[error("container has no content.xml entry")]
    MissingContent,
    #[error("unrecognized input format: expected XML or a zip container")]
    UnknownFormat,
}

/// Input flavor, as sniffed from leading bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectedFormat {
    Xml,
    Container,
}

/// Sniff the input format: zip magic means container, a `<` after optional
/// BOM and whitespace means XML.
pub fn detect_format(bytes: &[u8]) -> Option<DetectedFormat> {
    if bytes.starts_with(b"PK") {
        return Some(DetectedFormat::Container);
    }
    let rest = strip_bom(bytes);
    let first = rest.iter().find(|b| !b.is_ascii_whitespace());
    match first {
        Some(b'<') => Some(DetectedFormat::Xml),
        _ => None,
    }
}

fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes)
}

/// Load by sniffing the format first.
pub fn load_auto(bytes: &[u8]) -> Result<DocumentTree, LoadError> {
    match detect_format(bytes) {
        Some(DetectedFormat::Xml) => load_xml(bytes),
        Some(DetectedFormat::Container) => load_container(bytes),
        None => Err(LoadError::UnknownFormat),
    }
}

/// Parse one XML document into a tree.
pub fn load_xml(bytes: &[u8]) -> Result<DocumentTree, LoadError> {
    let tree = parse_tree(bytes)?;
    let mut styles = StyleTable::default();
    harvest_styles(&tree.root(), &mut styles);
    finish_with_styles(tree, styles, BTreeMap::new(), BTreeMap::new())
}

/// Load a zipped container: `content.xml` required, `styles.xml` optional,
/// everything else kept as resources.
pub fn load_container(bytes: &[u8]) -> Result<DocumentTree, LoadError> {
    let cursor = std::io::Cursor::new(bytes);
    let mut archive =
        zip::ZipArchive::new(cursor).map_err(|e| LoadError::Container(e.to_string()))?;
    let mut content: Option<Vec<u8>> = None;
    let mut shared_styles: Option<Vec<u8>> = None;
    let mut resources = BTreeMap::new();
    for index in 0..archive.len() {
        let mut file = archive
            .by_index(index)
            .map_err(|e| LoadError::Container(e.to_string()))?;
        if file.is_dir() {
            continue;
        }
        let name = file.name().to_string();
        let mut buf = Vec::with_capacity(file.size() as usize);
        file.read_to_end(&mut buf)
            .map_err(|e| LoadError::Container(format!("entry {name}: {e}")))?;
        match name.as_str() {
            "content.xml" => content = Some(buf),
            "styles.xml" => shared_styles = Some(buf),
            _ => {
                resources.insert(name, buf);
            }
        }
    }
    let content = content.ok_or(LoadError::MissingContent)?;
    let tree = parse_tree(&content).map_err(|e| LoadError::ContainerEntry {
        entry: "content.xml".into(),
        source: Box::new(e),
    })?;

    // Styles defined next to the content shadow same-named shared styles.
    let mut styles = StyleTable::default();
    harvest_styles(&tree.root(), &mut styles);
    let mut extra_namespaces = BTreeMap::new();
    if let Some(shared) = shared_styles {
        let styles_tree = parse_tree(&shared).map_err(|e| LoadError::ContainerEntry {
            entry: "styles.xml".into(),
            source: Box::new(e),
        })?;
        harvest_styles(&styles_tree.root(), &mut styles);
        extra_namespaces = styles_tree.namespaces().clone();
    }
    finish_with_styles(tree, styles, resources, extra_namespaces)
}

/// Attach harvested styles and container data to a freshly parsed tree.
/// The tree has no other handles yet, so the core can be unwrapped.
fn finish_with_styles(
    tree: DocumentTree,
    styles: StyleTable,
    resources: BTreeMap<String, Vec<u8>>,
    extra_namespaces: BTreeMap<String, String>,
) -> Result<DocumentTree, LoadError> {
    let mut core = Arc::try_unwrap(tree.core).expect("tree is sole owner right after parse");
    core.styles = styles;
    core.styles.break_cycles(&mut core.warnings);
    core.resources = resources;
    for (prefix, uri) in extra_namespaces {
        core.namespaces.entry(prefix).or_insert(uri);
    }
    Ok(DocumentTree { core: Arc::new(core) })
}

fn parse_tree(bytes: &[u8]) -> Result<DocumentTree, LoadError> {
    let bytes = strip_bom(bytes);
    let mut reader = Reader::from_reader(bytes);
    let config = reader.config_mut();
    config.check_end_names = true;
    config.trim_text_start = false;
    config.trim_text_end = false;

    let mut builder = TreeBuilder::new();
    loop {
        let position = reader.buffer_position();
        match reader.read_event() {
            Ok(Event::Start(start)) => {
                open_element(&mut builder, bytes, position, &start, &reader)?;
            }
            Ok(Event::Empty(start)) => {
                open_element(&mut builder, bytes, position, &start, &reader)?;
                builder.close_element();
            }
            Ok(Event::End(_)) => builder.close_element(),
            Ok(Event::Text(text)) => {
                let unescaped = text
                    .unescape()
                    .map_err(|e| xml_error(bytes, reader.error_position(), e.to_string()))?;
                if builder.depth() == 0 {
                    if !unescaped.trim().is_empty() {
                        return Err(xml_error(bytes, position, "text outside root element".into()));
                    }
                } else {
                    builder.text(unescaped);
                }
            }
            Ok(Event::CData(cdata)) => {
                let raw = String::from_utf8(cdata.into_inner().into_owned())
                    .map_err(|e| xml_error(bytes, position, e.to_string()))?;
                if builder.depth() > 0 {
                    builder.text(raw);
                }
            }
            Ok(Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_)) => {}
            Ok(Event::Eof) => break,
            Err(e) => return Err(xml_error(bytes, reader.error_position(), e.to_string())),
        }
    }
    if builder.depth() > 0 {
        return Err(xml_error(
            bytes,
            reader.buffer_position(),
            format!("{} element(s) left open at end of input", builder.depth()),
        ));
    }
    if builder.root_count() == 0 {
        return Err(xml_error(bytes, reader.buffer_position(), "no root element".into()));
    }
    Ok(builder.finish())
}

fn open_element(
    builder: &mut TreeBuilder,
    bytes: &[u8],
    position: u64,
    start: &quick_xml::events::BytesStart<'_>,
    reader: &Reader<&[u8]>,
) -> Result<(), LoadError> {
    let name = std::str::from_utf8(start.name().as_ref())
        .map_err(|e| xml_error(bytes, position, e.to_string()))?
        .to_string();
    if builder.depth() == 0 && builder.root_count() > 0 {
        return Err(xml_error(bytes, position, "more than one root element".into()));
    }
    builder.open_element(name);
    for attr in start.attributes() {
        let attr = attr.map_err(|e| xml_error(bytes, position, e.to_string()))?;
        let key = std::str::from_utf8(attr.key.as_ref())
            .map_err(|e| xml_error(bytes, position, e.to_string()))?
            .to_string();
        let value = attr
            .decode_and_unescape_value(reader.decoder())
            .map_err(|e| xml_error(bytes, position, e.to_string()))?;
        builder.attribute(key, value.into_owned());
    }
    Ok(())
}

fn xml_error(bytes: &[u8], offset: u64, message: String) -> LoadError {
    let offset = (offset as usize).min(bytes.len());
    let mut line = 1u32;
    let mut line_start = 0usize;
    for (i, b) in bytes[..offset].iter().enumerate() {
        if *b == b'\n' {
            line += 1;
            line_start = i + 1;
        }
    }
    LoadError::Xml { line, column: (offset - line_start) as u32 + 1, message }
}

/// Collect `style:style` definitions from a parsed tree into `table`.
/// Existing entries are kept, so feeding the content tree before the shared
/// styles tree makes content-local definitions win.
fn harvest_styles(root: &NodeRef, table: &mut StyleTable) {
    for node in root.descendants_or_self() {
        if node.name() != Some("style:style") {
            continue;
        }
        let Some(name) = node.attribute("style:name") else { continue };
        let mut entry = StyleEntry {
            parent: node.attribute("style:parent-style-name").map(str::to_string),
            ..StyleEntry::default()
        };
        if let Some(level) = node.attribute("style:default-outline-level") {
            entry.properties.insert("heading-level".into(), level.to_string());
        }
        for child in node.children() {
            // "style:text-properties" etc. in current office files; plain
            // "style:properties" in the OpenOffice 1.x generation.
            let is_properties = child
                .local_name()
                .map(|n| n == "properties" || n.ends_with("-properties"))
                .unwrap_or(false);
            if !is_properties {
                continue;
            }
            for attr in child.attribute_nodes() {
                let (key, value) =
                    canonical_property(attr.name().unwrap_or(""), attr.value().unwrap_or(""));
                entry.properties.entry(key).or_insert(value);
            }
        }
        table.insert_if_absent(name, entry);
    }
}
