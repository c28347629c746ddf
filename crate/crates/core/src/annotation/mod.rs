//! Inline XML annotation model shared by every stage.
//!
//! A document is a tree of [`Element`]s and text. Elements can only nest, so
//! overlapping markup cannot be represented, and the concatenated text of the
//! leaves is always the character content of the document.

mod pieces;
mod xml;

pub use pieces::{from_pieces, into_pieces, normalize_space, Piece};
pub use xml::{parse_xml, parse_xml_str, serialize_element, serialize_xml, XmlError, XML_DECLARATION};

use alloc::string::String;
use alloc::vec::Vec;

/// Conventional root element name for whole documents.
pub const ROOT: &str = "DOC";
/// Sentence element produced by structure detection.
pub const SENTENCE: &str = "S";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("invalid XML name `{0}`")]
    InvalidName(String),
    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),
    #[error("child range {from}..={to} out of range for {len} children")]
    IndexOutOfRange { from: usize, to: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

impl Node {
    pub fn as_element(&self) -> Option<&Element> {
        match self {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        }
    }

    pub fn as_element_mut(&mut self) -> Option<&mut Element> {
        match self {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Node::Text(t) => Some(t),
            Node::Element(_) => None,
        }
    }

    pub fn text_content(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        match self {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) => e.collect_text(out),
        }
    }
}

impl From<Element> for Node {
    fn from(e: Element) -> Node {
        Node::Element(e)
    }
}

/// Returns true if `name` matches the XML `Name` production restricted to
/// the characters this format uses.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == ':' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | ':'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
}

impl Element {
    /// Creates an element.
    ///
    /// # Panics
    ///
    /// Panics if `name` is not a valid XML name; use [`Element::try_new`]
    /// for names that come from data.
    pub fn new(name: impl Into<String>) -> Element {
        let name = name.into();
        assert!(is_valid_name(&name), "invalid element name `{}`", name);
        Element {
            name,
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn try_new(name: impl Into<String>) -> Result<Element, AnnotationError> {
        let name = name.into();
        if !is_valid_name(&name) {
            return Err(AnnotationError::InvalidName(name));
        }
        Ok(Element {
            name,
            attrs: Vec::new(),
            children: Vec::new(),
        })
    }

    /// Element containing a single text child.
    pub fn with_text(name: impl Into<String>, text: impl Into<String>) -> Element {
        let mut e = Element::new(name);
        e.push_text(text);
        e
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: impl Into<String>) -> Result<(), AnnotationError> {
        let name = name.into();
        if !is_valid_name(&name) {
            return Err(AnnotationError::InvalidName(name));
        }
        self.name = name;
        Ok(())
    }

    pub fn attrs(&self) -> &[(String, String)] {
        &self.attrs
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attr(name).is_some()
    }

    /// Sets an attribute, replacing an existing value in place or appending.
    pub fn try_set_attr(&mut self, name: impl Into<String>, value: impl Into<String>) -> Result<(), AnnotationError> {
        let name = name.into();
        if !is_valid_name(&name) {
            return Err(AnnotationError::InvalidName(name));
        }
        let value = value.into();
        match self.attrs.iter_mut().find(|(k, _)| *k == name) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((name, value)),
        }
        Ok(())
    }

    /// # Panics
    ///
    /// Panics on an invalid attribute name.
    pub fn set_attr(&mut self, name: impl Into<String>, value: impl Into<String>) {
        let name = name.into();
        if let Err(e) = self.try_set_attr(name, value) {
            panic!("{}", e);
        }
    }

    /// Builder form of [`Element::set_attr`].
    pub fn attr_with(mut self, name: impl Into<String>, value: impl Into<String>) -> Element {
        self.set_attr(name, value);
        self
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attrs.iter().position(|(k, _)| k == name)?;
        Some(self.attrs.remove(pos).1)
    }

    pub fn children(&self) -> &[Node] {
        &self.children
    }

    /// Raw access to the children. Callers that insert text should finish
    /// with [`Element::normalize`] to restore the canonical form.
    pub fn children_mut(&mut self) -> &mut Vec<Node> {
        &mut self.children
    }

    pub fn take_children(&mut self) -> Vec<Node> {
        core::mem::take(&mut self.children)
    }

    pub fn set_children(&mut self, children: Vec<Node>) {
        self.children = children;
        self.normalize_local();
    }

    pub fn push(&mut self, node: impl Into<Node>) {
        self.children.push(node.into());
    }

    /// Appends text, merging with a trailing text child. Empty text is
    /// ignored.
    pub fn push_text(&mut self, text: impl Into<String>) {
        let text = text.into();
        if text.is_empty() {
            return;
        }
        if let Some(Node::Text(last)) = self.children.last_mut() {
            last.push_str(&text);
        } else {
            self.children.push(Node::Text(text));
        }
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(Node::as_element)
    }

    pub fn child_elements_mut(&mut self) -> impl Iterator<Item = &mut Element> {
        self.children.iter_mut().filter_map(Node::as_element_mut)
    }

    pub fn has_element_children(&self) -> bool {
        self.children.iter().any(|c| matches!(c, Node::Element(_)))
    }

    pub fn text_content(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        for c in &self.children {
            c.collect_text(out);
        }
    }

    /// Merges adjacent text children and drops empty ones, recursively.
    pub fn normalize(&mut self) {
        self.normalize_local();
        for c in self.children.iter_mut() {
            if let Node::Element(e) = c {
                e.normalize();
            }
        }
    }

    fn normalize_local(&mut self) {
        let old = core::mem::take(&mut self.children);
        for c in old {
            match c {
                Node::Text(t) => self.push_text(t),
                e => self.children.push(e),
            }
        }
    }

    /// Moves children `from..=to` under a new element inserted at `from`.
    pub fn wrap_span(
        &mut self,
        from: usize,
        to: usize,
        name: &str,
        attrs: &[(&str, &str)],
    ) -> Result<(), AnnotationError> {
        let len = self.children.len();
        if from > to || to >= len {
            return Err(AnnotationError::IndexOutOfRange { from, to, len });
        }
        let mut wrapper = Element::try_new(name)?;
        for (k, v) in attrs {
            if wrapper.has_attr(k) {
                return Err(AnnotationError::DuplicateAttribute(String::from(*k)));
            }
            wrapper.try_set_attr(*k, *v)?;
        }
        let moved: Vec<Node> = self.children.drain(from..=to).collect();
        wrapper.children = moved;
        self.children.insert(from, Node::Element(wrapper));
        Ok(())
    }

    /// Depth-first pre-order visit of this element and its descendants.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Element)) {
        f(self);
        for c in self.child_elements() {
            c.walk(f);
        }
    }

    /// Visits every descendant element named `name` (outermost only).
    pub fn for_each_named_mut(&mut self, name: &str, f: &mut impl FnMut(&mut Element)) {
        for c in self.child_elements_mut() {
            if c.name == name {
                f(c);
            } else {
                c.for_each_named_mut(name, f);
            }
        }
    }

    pub fn find_all<'a>(&'a self, name: &str) -> Vec<&'a Element> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if e.name == name {
                out.push(e);
            }
        });
        out
    }
}

/// A whole annotated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub root: Element,
}

impl Document {
    pub fn new(root: Element) -> Document {
        Document { root }
    }

    /// Empty document with the conventional root.
    pub fn empty() -> Document {
        Document::new(Element::new(ROOT))
    }

    pub fn text_content(&self) -> String {
        self.root.text_content()
    }

    /// All sentence elements in document order (outermost only).
    pub fn sentences(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        collect_sentences(&self.root, &mut out);
        out
    }

    pub fn for_each_sentence_mut(&mut self, f: &mut impl FnMut(&mut Element)) {
        if self.root.name == SENTENCE {
            f(&mut self.root);
        } else {
            self.root.for_each_named_mut(SENTENCE, f);
        }
    }
}

fn collect_sentences<'a>(e: &'a Element, out: &mut Vec<&'a Element>) {
    if e.name == SENTENCE {
        out.push(e);
        return;
    }
    for c in e.child_elements() {
        collect_sentences(c, out);
    }
}

/// Elements appended to sentences by semantic analysis; they are not part of
/// the token stream.
pub fn is_annotation_block(e: &Element) -> bool {
    matches!(e.name(), "CONCEPTS" | "REL")
}

/// The leaf tokens of a subtree in document order: elements without element
/// children plus whitespace-separated words of bare text. Annotation blocks
/// are skipped.
pub fn leaf_tokens(e: &Element) -> Vec<LeafToken<'_>> {
    let mut out = Vec::new();
    collect_leaves(e, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafToken<'a> {
    Word(&'a str),
    Element(&'a Element),
}

impl<'a> LeafToken<'a> {
    pub fn text(&self) -> String {
        match self {
            LeafToken::Word(w) => String::from(*w),
            LeafToken::Element(e) => e.text_content(),
        }
    }

    pub fn element(&self) -> Option<&'a Element> {
        match self {
            LeafToken::Element(e) => Some(e),
            LeafToken::Word(_) => None,
        }
    }
}

fn collect_leaves<'a>(e: &'a Element, out: &mut Vec<LeafToken<'a>>) {
    for c in e.children() {
        match c {
            Node::Text(t) => out.extend(t.split_whitespace().map(LeafToken::Word)),
            Node::Element(el) if is_annotation_block(el) => {}
            Node::Element(el) if el.has_element_children() => collect_leaves(el, out),
            Node::Element(el) => out.push(LeafToken::Element(el)),
        }
    }
}
