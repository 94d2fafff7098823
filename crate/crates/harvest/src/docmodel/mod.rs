//! Document model: immutable trees, loaders, styles.

mod load;
mod style;
mod tree;

pub use load::{detect_format, load_auto, load_container, load_xml, DetectedFormat, LoadError};
pub use style::{StyleEntry, StyleTable};
pub use tree::{normalize_text, DocumentTree, Fragment, Kind, NodeRef, TreeBuilder};
