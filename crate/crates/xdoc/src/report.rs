//! Static HTML views of annotated documents.

use std::fmt::Write;

use xdoc_core::annotation::{is_annotation_block, leaf_tokens, serialize_xml, Document, Element, Node};
use xdoc_core::postag::coverage_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audience {
    /// Colored text, relation tables and filled frames.
    Expert,
    /// Element tree with every attribute, raw XML and tagging coverage.
    Developer,
}

/// Attributes that only matter to grammar and lexicon maintenance.
const INTERNAL_ATTRS: &[&str] = &["SRC", "AS", "RULE", "MORPH", "POS", "ALT"];

const STYLE: &str = "body{font-family:sans-serif;margin:2em}\
.tok{padding:0 2px;border-radius:3px}\
.cat-N,.cat-CONCEPT{background:#cde4ff}\
.cat-ADJ,.cat-PROPERTY{background:#d8f5d0}\
.cat-V,.cat-RELATION{background:#ffe2c4}\
.cat-PRP{background:#efe0ff}\
.cat-XXX{background:#ffd0d0}\
.phr{border-bottom:1px solid #999}\
table{border-collapse:collapse;margin:1em 0}td,th{border:1px solid #bbb;padding:2px 6px}\
pre{background:#f4f4f4;padding:1em}";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Text escaping that leaves quotes readable.
fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn class_name(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn render_report(doc: &Document, audience: Audience) -> String {
    let mut out = String::new();
    let title = match audience {
        Audience::Expert => "Annotated document",
        Audience::Developer => "Annotation details",
    };
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>{}</style>\n</head>\n<body>\n<h1>{}</h1>\n",
        title, STYLE, title
    );
    match audience {
        Audience::Expert => expert(doc, &mut out),
        Audience::Developer => developer(doc, &mut out),
    }
    out.push_str("</body>\n</html>\n");
    out
}

fn expert(doc: &Document, out: &mut String) {
    out.push_str("<section class=\"text\">\n");
    let sentences = doc.sentences();
    if sentences.is_empty() {
        out.push_str("<p class=\"sentence\">");
        inline(&doc.root, out);
        out.push_str("</p>\n");
    } else {
        for s in &sentences {
            out.push_str("<p class=\"sentence\">");
            inline(s, out);
            out.push_str("</p>\n");
        }
    }
    out.push_str("</section>\n");
    relation_tables(&sentences, out);
    frames(doc, out);
}

fn inline(e: &Element, out: &mut String) {
    for n in e.children() {
        match n {
            Node::Text(t) => out.push_str(&escape_text(t)),
            Node::Element(c) if is_annotation_block(c) => {}
            Node::Element(c) => {
                let title: Vec<String> = std::iter::once(c.name().to_string())
                    .chain(
                        c.attrs()
                            .iter()
                            .filter(|(k, _)| !INTERNAL_ATTRS.contains(&k.as_str()))
                            .map(|(k, v)| format!("{}={}", k, v)),
                    )
                    .collect();
                let kind = if c.has_element_children() { "phr" } else { "tok" };
                let _ = write!(out, "<span class=\"{} cat-{}\" title=\"{}\">", kind, class_name(c.name()), escape(&title.join(" ")));
                inline(c, out);
                out.push_str("</span>");
            }
        }
    }
}

/// Semantic type of the token spelled `word` in `sentence`.
fn type_of(sentence: &Element, word: &str) -> String {
    leaf_tokens(sentence)
        .iter()
        .filter_map(|t| t.element())
        .find(|e| e.text_content() == word && e.has_attr("TYPE"))
        .and_then(|e| e.attr("TYPE"))
        .unwrap_or("")
        .to_string()
}

fn relation_tables(sentences: &[&Element], out: &mut String) {
    let mut tables: Vec<(String, Vec<String>)> = Vec::new();
    for s in sentences {
        for r in s.child_elements().filter(|c| c.name() == "REL") {
            let name = r.attr("NAME").unwrap_or("").to_string();
            let mut row = String::from("<tr>");
            for i in 1.. {
                let Some(arg) = r.attr(&format!("ARG{}", i)) else { break };
                let _ = write!(row, "<td>{}</td><td>{}</td>", escape_text(arg), escape_text(&type_of(s, arg)));
            }
            row.push_str("</tr>");
            match tables.iter_mut().find(|t| t.0 == name) {
                Some(t) => t.1.push(row),
                None => tables.push((name, vec![row])),
            }
        }
    }
    if tables.is_empty() {
        return;
    }
    out.push_str("<section class=\"relations\">\n<h2>Findings</h2>\n");
    for (name, rows) in tables {
        let _ = writeln!(out, "<table>\n<caption>{}</caption>", escape_text(&name));
        out.push_str("<tr><th>Concept</th><th>Type</th><th>Value</th><th>Type</th></tr>\n");
        for r in rows {
            out.push_str(&r);
            out.push('\n');
        }
        out.push_str("</table>\n");
    }
    out.push_str("</section>\n");
}

fn frames(doc: &Document, out: &mut String) {
    let mut items = Vec::new();
    for block in doc.root.find_all("CONCEPTS") {
        for c in block.child_elements() {
            let word = c.find_all("WORD").first().map(|w| w.text_content()).unwrap_or_default();
            let mut slots = Vec::new();
            for r in c.find_all("RELATION") {
                match r.attr("TYPE") {
                    Some(t) => {
                        let content = r.find_all("CONTENT").first().map(|x| x.text_content()).unwrap_or_default();
                        slots.push((t.to_string(), content));
                    }
                    None => slots.extend(r.child_elements().map(|x| (x.name().to_string(), x.text_content()))),
                }
            }
            let mut item = format!("<li><b>{}</b> ({})", escape_text(&word), escape_text(c.attr("TYPE").unwrap_or("")));
            if !slots.is_empty() {
                item.push_str("<ul>");
                for (rel, content) in slots {
                    let _ = write!(item, "<li>{}: {}</li>", escape_text(&rel), escape_text(&content));
                }
                item.push_str("</ul>");
            }
            item.push_str("</li>");
            items.push(item);
        }
    }
    if items.is_empty() {
        return;
    }
    out.push_str("<section class=\"frames\">\n<h2>Concepts</h2>\n<ul>\n");
    for i in items {
        out.push_str(&i);
        out.push('\n');
    }
    out.push_str("</ul>\n</section>\n");
}

fn developer(doc: &Document, out: &mut String) {
    let c = coverage_report(doc);
    out.push_str("<section class=\"coverage\">\n<h2>Coverage</h2>\n<table>\n");
    for (label, n) in [
        ("tokens", c.total),
        ("lexicon", c.lexicon),
        ("heuristic", c.heuristic),
        ("unknown", c.unknown),
        ("pretagged", c.pretagged),
        ("untagged", c.untagged),
    ] {
        let _ = writeln!(out, "<tr><th>{}</th><td>{}</td></tr>", label, n);
    }
    let _ = writeln!(out, "<tr><th>unknown ratio</th><td>{:.3}</td></tr>", c.unknown_ratio());
    out.push_str("</table>\n</section>\n<section class=\"tree\">\n<h2>Elements</h2>\n<ul>\n");
    tree(&doc.root, out);
    out.push_str("</ul>\n</section>\n<section class=\"xml\">\n<h2>XML</h2>\n<pre>");
    out.push_str(&escape_text(&serialize_xml(doc)));
    out.push_str("</pre>\n</section>\n");
}

fn tree(e: &Element, out: &mut String) {
    out.push_str("<li><code>");
    out.push_str(&escape_text(e.name()));
    for (k, v) in e.attrs() {
        let _ = write!(out, " {}=\"{}\"", escape_text(k), escape_text(v));
    }
    out.push_str("</code>");
    if !e.has_element_children() {
        let _ = write!(out, " {}", escape_text(&e.text_content()));
        out.push_str("</li>\n");
        return;
    }
    out.push_str("\n<ul>\n");
    for n in e.children() {
        match n {
            Node::Text(t) if !t.trim().is_empty() => {
                let _ = writeln!(out, "<li>{}</li>", escape_text(t.trim()));
            }
            Node::Text(_) => {}
            Node::Element(c) => tree(c, out),
        }
    }
    out.push_str("</ul>\n</li>\n");
}
