use alloc::string::String;
use alloc::vec::Vec;

use super::semlex::{SemCategory, SemEntry, SemLexicon};
use crate::annotation::{from_pieces, into_pieces, is_annotation_block, Document, Element, Piece};
use crate::postag::UNKNOWN;

/// Attribute keeping a token's syntactic class after semantic tagging.
pub const POS_ATTR: &str = "POS";

fn is_sem_tagged(e: &Element) -> bool {
    SemCategory::parse(e.name()).is_some() || e.has_attr(POS_ATTR)
}

/// Syntactic classes of a token element: its name plus its alternatives.
fn classes(e: &Element) -> Vec<String> {
    let mut v = alloc::vec![String::from(e.name())];
    if let Some(alt) = e.attr("ALT") {
        v.extend(alt.split(',').filter(|s| !s.is_empty()).map(String::from));
    }
    v
}

fn readings<'a>(lex: &'a SemLexicon, text: &str, classes: Option<&[String]>) -> Vec<&'a SemEntry> {
    lex.lookup(text)
        .into_iter()
        .filter(|r| match classes {
            None => r.category.compatible_with(None),
            Some(cs) => cs.iter().any(|c| r.category.compatible_with(Some(c))),
        })
        .collect()
}

fn apply(mut e: Element, rs: &[&SemEntry], pos: Option<String>) -> Element {
    let name = rs.first().map_or(UNKNOWN, |r| r.category.as_str());
    e.rename(name).expect("valid name");
    e.remove_attr("ALT");
    if let Some(first) = rs.first() {
        e.set_attr("TYPE", first.sem_type.as_str());
    }
    if rs.len() > 1 {
        let alt: Vec<String> = rs[1..]
            .iter()
            .map(|r| alloc::format!("{}:{}", r.category.as_str(), r.sem_type))
            .collect();
        e.set_attr("ALT", alt.join(","));
    }
    if let Some(p) = pos {
        e.set_attr(POS_ATTR, p);
    }
    e
}

fn tag_leaf(e: Element, lex: &SemLexicon) -> Element {
    if is_sem_tagged(&e) {
        return e;
    }
    let cs = classes(&e);
    let rs = readings(lex, &e.text_content(), Some(&cs));
    if rs.is_empty() && e.name() == UNKNOWN {
        return e;
    }
    let pos = String::from(e.name());
    apply(e, &rs, Some(pos))
}

fn tag_word(w: &str, lex: &SemLexicon) -> Element {
    let rs = readings(lex, w, None);
    apply(Element::with_text(UNKNOWN, w), &rs, None)
}

fn tag_children(e: &mut Element, lex: &SemLexicon) {
    let pieces = into_pieces(e.take_children())
        .into_iter()
        .map(|p| match p {
            Piece::Word(w) => Piece::Element(tag_word(&w, lex)),
            Piece::Element(el) if is_annotation_block(&el) => Piece::Element(el),
            Piece::Element(mut el) if el.has_element_children() => {
                tag_children(&mut el, lex);
                Piece::Element(el)
            }
            Piece::Element(el) => Piece::Element(tag_leaf(el, lex)),
            space => space,
        })
        .collect();
    e.set_children(from_pieces(pieces));
}

/// Tags every token of every sentence (or of the whole document when it has
/// no sentences) with its concept, property or relation reading. Tokens
/// without a compatible reading become `XXX`. The syntactic class goes to
/// `POS`, further readings to `ALT`. Already tagged tokens are kept.
pub fn sem_tag(mut doc: Document, lex: &SemLexicon) -> Document {
    if doc.sentences().is_empty() {
        tag_children(&mut doc.root, lex);
    } else {
        doc.for_each_sentence_mut(&mut |s| tag_children(s, lex));
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{parse_xml_str, serialize_xml};

    fn lex() -> SemLexicon {
        SemLexicon::parse(
            "Leber\tCONCEPT\torgan\tOrgan\t-\n\
             dunkelrot\tPROPERTY\tcolor\tFarbe\t-\n\
             rot\tPROPERTY\tcolor\tFarbe\t-\n\
             rot\tCONCEPT\tcolor-name\tFarbname\t-\n",
        )
        .unwrap()
    }

    fn tagged(xml: &str) -> String {
        serialize_xml(&sem_tag(parse_xml_str(xml).unwrap(), &lex()))
    }

    #[test]
    fn tags_plain_words() {
        let out = tagged("<DOC><S>Leber dunkelrot<IP SENT=\"end\">.</IP></S></DOC>");
        assert!(out.contains(
            "<S><CONCEPT TYPE=\"organ\">Leber</CONCEPT> <PROPERTY TYPE=\"color\">dunkelrot</PROPERTY><XXX SENT=\"end\" POS=\"IP\">.</XXX></S>"
        ));
    }

    #[test]
    fn respects_pos() {
        let out = tagged("<DOC><S><ADJ>rot</ADJ> <N>rot</N> <V>Leber</V></S></DOC>");
        assert!(out.contains("<PROPERTY TYPE=\"color\" POS=\"ADJ\">rot</PROPERTY>"), "{}", out);
        assert!(out.contains("<CONCEPT TYPE=\"color-name\" POS=\"N\">rot</CONCEPT>"), "{}", out);
        assert!(out.contains("<XXX POS=\"V\">Leber</XXX>"), "{}", out);
    }

    #[test]
    fn keeps_remaining_readings() {
        let out = tagged("<DOC><S>rot</S></DOC>");
        assert!(out.contains("<PROPERTY TYPE=\"color\" ALT=\"CONCEPT:color-name\">rot</PROPERTY>"), "{}", out);
    }

    #[test]
    fn idempotent() {
        let once = tagged("<DOC><S><NP><N>Leber</N></NP> dunkelrot <XXX>foo</XXX></S></DOC>");
        let twice = serialize_xml(&sem_tag(parse_xml_str(&once).unwrap(), &lex()));
        assert_eq!(once, twice);
    }
}
