//! Reader and writer for the XML subset used as annotation carrier:
//! elements, attributes, character data, the five predefined entities and
//! numeric character references. Comments, CDATA sections, processing
//! instructions (other than the leading declaration) and DTDs are rejected.

use alloc::string::String;
use alloc::vec::Vec;

use super::{is_valid_name, Document, Element, Node};

pub const XML_DECLARATION: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed XML at byte {position}: {reason}")]
pub struct XmlError {
    pub position: usize,
    pub reason: String,
}

impl XmlError {
    /// 1-based line and column of the error inside `input`.
    pub fn line_col(&self, input: &str) -> (usize, usize) {
        let upto = &input[..self.position.min(input.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

/// Parses UTF-8 bytes.
pub fn parse_xml(input: &[u8]) -> Result<Document, XmlError> {
    let text = core::str::from_utf8(input).map_err(|e| XmlError {
        position: e.valid_up_to(),
        reason: String::from("input is not valid UTF-8"),
    })?;
    parse_xml_str(text)
}

pub fn parse_xml_str(input: &str) -> Result<Document, XmlError> {
    Reader { src: input, pos: 0 }.document()
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, XmlError> {
        Err(XmlError {
            position: self.pos,
            reason: reason.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), XmlError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(alloc::format!("expected `{}`", s))
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn document(mut self) -> Result<Document, XmlError> {
        if self.src.starts_with('\u{feff}') {
            self.pos = '\u{feff}'.len_utf8();
        }
        self.skip_ws();
        if self.rest().starts_with("<?xml") {
            match self.rest().find("?>") {
                Some(end) => self.pos += end + 2,
                None => return self.err("unterminated XML declaration"),
            }
        }
        self.skip_ws();
        if self.peek() != Some('<') {
            return self.err("expected root element");
        }
        let root = self.element()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("content after root element");
        }
        Ok(Document::new(root))
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | ':') {
                self.bump();
            } else {
                break;
            }
        }
        let name = &self.src[start..self.pos];
        if !is_valid_name(name) {
            self.pos = start;
            return self.err("invalid name");
        }
        Ok(String::from(name))
    }

    /// Parses one element; the cursor is on `<`. Nesting is handled with an
    /// explicit stack so deep documents do not exhaust the call stack.
    fn element(&mut self) -> Result<Element, XmlError> {
        let mut stack: Vec<Element> = Vec::new();
        loop {
            // at '<' of a start tag
            self.expect("<")?;
            let (el, empty) = self.start_tag()?;
            if empty {
                if let Some(done) = self.attach(&mut stack, el) {
                    return Ok(done);
                }
            } else {
                stack.push(el);
            }
            // content until the next start tag
            loop {
                if stack.is_empty() {
                    unreachable!("attach returns when the stack empties");
                }
                let text = self.char_data()?;
                if !text.is_empty() {
                    stack.last_mut().unwrap().push_text(text);
                }
                if self.rest().starts_with("</") {
                    let at = self.pos;
                    self.pos += 2;
                    let name = self.name()?;
                    self.skip_ws();
                    self.expect(">")?;
                    let open = stack.pop().unwrap();
                    if open.name() != name {
                        self.pos = at;
                        return self.err(alloc::format!(
                            "closing tag `{}` does not match open element `{}`",
                            name,
                            open.name()
                        ));
                    }
                    if let Some(done) = self.attach(&mut stack, open) {
                        return Ok(done);
                    }
                } else if self.rest().starts_with("<!") {
                    return self.err("comments, CDATA and DTDs are not supported");
                } else if self.rest().starts_with("<?") {
                    return self.err("processing instructions are not supported");
                } else if self.rest().starts_with('<') {
                    break;
                } else {
                    return self.err(alloc::format!(
                        "unexpected end of input inside `{}`",
                        stack.last().unwrap().name()
                    ));
                }
            }
        }
    }

    fn attach(&self, stack: &mut [Element], el: Element) -> Option<Element> {
        match stack.last_mut() {
            Some(parent) => {
                parent.push(Node::Element(el));
                None
            }
            None => Some(el),
        }
    }

    fn start_tag(&mut self) -> Result<(Element, bool), XmlError> {
        let name = self.name()?;
        let mut el = Element::new(name);
        loop {
            let had_ws = matches!(self.peek(), Some(c) if c.is_ascii_whitespace());
            self.skip_ws();
            if self.eat("/>") {
                return Ok((el, true));
            }
            if self.eat(">") {
                return Ok((el, false));
            }
            if self.peek().is_none() {
                return self.err("unterminated start tag");
            }
            if !had_ws {
                return self.err("expected whitespace before attribute");
            }
            let at = self.pos;
            let key = self.name()?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            let quote = match self.bump() {
                Some(q @ ('"' | '\'')) => q,
                _ => return self.err("expected quoted attribute value"),
            };
            let value = self.attr_value(quote)?;
            if el.has_attr(&key) {
                self.pos = at;
                return self.err(alloc::format!("duplicate attribute `{}`", key));
            }
            el.set_attr(key, value);
        }
    }

    fn attr_value(&mut self, quote: char) -> Result<String, XmlError> {
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return self.err("unterminated attribute value"),
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(out);
                }
                Some('<') => return self.err("`<` in attribute value"),
                Some('&') => out.push(self.reference()?),
                Some(c) => {
                    self.bump();
                    out.push(c);
                }
            }
        }
    }

    fn char_data(&mut self) -> Result<String, XmlError> {
        let mut out = String::new();
        loop {
            match self.peek() {
                None | Some('<') => return Ok(out),
                Some('&') => out.push(self.reference()?),
                Some(c) => {
                    self.bump();
                    out.push(c);
                }
            }
        }
    }

    fn reference(&mut self) -> Result<char, XmlError> {
        let start = self.pos;
        let end = match self.rest().find(';') {
            Some(e) if e <= 12 => self.pos + e,
            _ => return self.err("unterminated entity reference"),
        };
        let body = &self.src[start + 1..end];
        let c = match body {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ if body.starts_with("#x") => u32::from_str_radix(&body[2..], 16).ok().and_then(char::from_u32),
            _ if body.starts_with('#') => body[1..].parse::<u32>().ok().and_then(char::from_u32),
            _ => None,
        };
        match c {
            Some(c) => {
                self.pos = end + 1;
                Ok(c)
            }
            None => self.err(alloc::format!("undefined entity `&{};`", body)),
        }
    }
}

/// Serializes with the XML declaration, a newline, the root element and a
/// final newline. No other whitespace is added.
pub fn serialize_xml(doc: &Document) -> String {
    let mut out = String::from(XML_DECLARATION);
    out.push('\n');
    write_element(&doc.root, &mut out);
    out.push('\n');
    out
}

/// Serializes a single element without declaration.
pub fn serialize_element(el: &Element) -> String {
    let mut out = String::new();
    write_element(el, &mut out);
    out
}

fn write_element(el: &Element, out: &mut String) {
    // explicit stack: (element, next child index)
    let mut stack: Vec<(&Element, usize)> = Vec::new();
    open_tag(el, out);
    if el.children().is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    stack.push((el, 0));
    while let Some((cur, idx)) = stack.pop() {
        if idx == cur.children().len() {
            out.push_str("</");
            out.push_str(cur.name());
            out.push('>');
            continue;
        }
        stack.push((cur, idx + 1));
        match &cur.children()[idx] {
            Node::Text(t) => escape_text(t, out),
            Node::Element(child) => {
                open_tag(child, out);
                if child.children().is_empty() {
                    out.push_str("/>");
                } else {
                    out.push('>');
                    stack.push((child, 0));
                }
            }
        }
    }
}

fn open_tag(el: &Element, out: &mut String) {
    out.push('<');
    out.push_str(el.name());
    for (k, v) in el.attrs() {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        escape_attr(v, out);
        out.push('"');
    }
}

fn escape_text(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn minimal_element() {
        let doc = parse_xml(b"<N>Leber</N>").unwrap();
        assert_eq!(doc.root.name(), "N");
        assert_eq!(doc.root.children(), &[Node::Text("Leber".into())]);
    }

    #[test]
    fn structure_detection_fragment() {
        let src = "<DOC>Anwesend<IP>:</IP>\n<ABBR>Univ.-Prof.</ABBR>\n<ABBR>Dr.</ABBR><ABBR>med.</ABBR>Dieter Krause<IP>,</IP>\nDirektor des Institutes fuer Rechtsmedizin</DOC>";
        let doc = parse_xml_str(src).unwrap();
        let names: Vec<&str> = doc.root.child_elements().map(|e| e.name()).collect();
        assert_eq!(names, vec!["IP", "ABBR", "ABBR", "ABBR", "IP"]);
        assert_eq!(doc.root.children()[0], Node::Text("Anwesend".into()));
        assert_eq!(serialize_element(&doc.root), src);
    }

    #[test]
    fn nesting_violation_is_rejected() {
        let err = parse_xml(b"<A><B></A></B>").unwrap_err();
        assert_eq!(err.position, 6);
        assert!(err.reason.contains("does not match"));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "<A>",
            "<A></A><B/>",
            "<1A/>",
            "<A x=1/>",
            "<A x=\"1\" x=\"2\"/>",
            "<A>&nbsp;</A>",
            "<A><!-- c --></A>",
            "text",
            "<A>a<b</A>",
        ] {
            assert!(parse_xml_str(bad).is_err(), "{}", bad);
        }
        assert!(parse_xml(&[0x3c, 0x41, 0x3e, 0xff, 0x3c, 0x2f, 0x41, 0x3e]).is_err());
    }

    #[test]
    fn entities_and_escaping() {
        let doc = parse_xml_str("<A v='a&quot;b'>x &amp; &lt;y&gt; &#228;&#xE4;</A>").unwrap();
        assert_eq!(doc.root.attr("v"), Some("a\"b"));
        assert_eq!(doc.root.text_content(), "x & <y> ää");
        let mut e = Element::new("T");
        e.push_text("a<b");
        assert_eq!(serialize_element(&e), "<T>a&lt;b</T>");
    }

    #[test]
    fn pp_with_case_attribute() {
        let mut pp = Element::new("PP").attr_with("CAS", "DAT");
        pp.push(Element::with_text("PRP", "an").attr_with("CAS", "DAT"));
        assert_eq!(serialize_element(&pp), r#"<PP CAS="DAT"><PRP CAS="DAT">an</PRP></PP>"#);
    }

    #[test]
    fn declaration_is_accepted_and_emitted() {
        let doc = parse_xml_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<DOC><S/></DOC>\n").unwrap();
        let out = serialize_xml(&doc);
        assert_eq!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<DOC><S/></DOC>\n");
        assert_eq!(parse_xml_str(&out).unwrap(), doc);
    }

    #[test]
    fn error_line_col() {
        let src = "<A>\n<B></A>";
        let err = parse_xml_str(src).unwrap_err();
        assert_eq!(err.line_col(src), (2, 4));
        assert!(err.to_string().contains("byte 7"));
    }

    proptest! {
        #[test]
        fn attribute_values_survive(v in "\\PC*") {
            let e = Element::new("A").attr_with("v", v.clone());
            let back = parse_xml_str(&serialize_element(&e)).unwrap();
            prop_assert_eq!(back.root.attr("v"), Some(v.as_str()));
        }
    }
}
