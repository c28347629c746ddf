use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::form::{FormConstraint, PhraseKind, Slot};
use super::semlex::{SemCategory, SemEntry, SemLexicon};
use super::tag::POS_ATTR;
use crate::annotation::{is_annotation_block, normalize_space, Document, Element, Node};
use crate::features::{Dim, FeatureSet};

/// Output shape of the filled frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameStyle {
    /// `<RELATION TYPE=".."><ASSIGN_TO/><FORM/><CONTENT/></RELATION>` per slot.
    #[default]
    Dtd,
    /// One `<RELATION>` holding an element per slot, named by the relation,
    /// with all slot forms in `FORM`.
    Compact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotFill {
    pub relation: String,
    /// The concept word holding the relation.
    pub holder: String,
    pub holder_index: usize,
    pub form: FormConstraint,
    /// All forms of the slot, space separated.
    pub slot_forms: String,
    pub content: String,
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptInstance {
    pub word: String,
    pub sem_type: String,
    pub desc: String,
    pub token: usize,
    pub fills: Vec<SlotFill>,
}

/// A sentence's leaves and phrases with token positions.
struct Indexed<'a> {
    leaves: Vec<Leaf<'a>>,
    /// Phrase elements with `[start, end)` and nesting depth below the
    /// sentence.
    phrases: Vec<(&'a Element, usize, usize, usize)>,
}

enum Leaf<'a> {
    Word(&'a str),
    Element(&'a Element),
}

impl Leaf<'_> {
    fn text(&self) -> String {
        match self {
            Leaf::Word(w) => w.to_string(),
            Leaf::Element(e) => e.text_content(),
        }
    }
}

fn index(s: &Element) -> Indexed<'_> {
    let mut ix = Indexed {
        leaves: Vec::new(),
        phrases: Vec::new(),
    };
    walk(s, 0, &mut ix);
    ix
}

fn walk<'a>(e: &'a Element, depth: usize, ix: &mut Indexed<'a>) {
    for c in e.children() {
        match c {
            Node::Text(t) => ix.leaves.extend(t.split_whitespace().map(Leaf::Word)),
            Node::Element(el) if is_annotation_block(el) => {}
            Node::Element(el) if el.has_element_children() => {
                let start = ix.leaves.len();
                walk(el, depth + 1, ix);
                ix.phrases.push((el, start, ix.leaves.len(), depth));
            }
            Node::Element(el) => ix.leaves.push(Leaf::Element(el)),
        }
    }
}

fn dims(e: &Element) -> FeatureSet {
    FeatureSet::from_dims(e.attr(Dim::Cas.as_str()), e.attr(Dim::Num.as_str()), e.attr(Dim::Gen.as_str()))
        .unwrap_or(FeatureSet::ALL)
}

fn case_set(f: &FormConstraint) -> FeatureSet {
    FeatureSet::from_dim_value(Dim::Cas, f.case.as_str()).expect("case name")
}

/// Semantic types of a tagged token: `TYPE` plus the types in `ALT`.
fn token_types(e: &Element) -> Vec<&str> {
    let mut v: Vec<&str> = e.attr("TYPE").into_iter().collect();
    if let Some(alt) = e.attr("ALT") {
        v.extend(alt.split(',').filter_map(|r| r.split_once(':').map(|(_, t)| t)));
    }
    v
}

fn is_noun(e: &Element) -> bool {
    e.name() == "N" || e.attr(POS_ATTR) == Some("N")
}

fn form_matches(form: &FormConstraint, phrase: &Element, ix: &Indexed, start: usize) -> bool {
    let feats = dims(phrase);
    match form.kind {
        PhraseKind::N => phrase.name() == "NP" && !feats.intersect(case_set(form)).is_empty(),
        PhraseKind::P => {
            phrase.name() == "PP"
                && form
                    .preposition
                    .as_deref()
                    .is_some_and(|p| ix.leaves[start].text().to_lowercase() == p.to_lowercase())
                && !feats.intersect(case_set(form)).is_empty()
        }
    }
}

fn type_matches(slot: &Slot, ix: &Indexed, start: usize, end: usize) -> bool {
    let Some(want) = &slot.sem_type else { return true };
    let head = ix.leaves[start..end].iter().find_map(|l| match l {
        Leaf::Element(e) if is_noun(e) => Some(*e),
        _ => None,
    });
    head.is_some_and(|h| token_types(h).contains(&want.as_str()))
}

/// Slot fills for one frame reading of the concept at token `c`; `None`
/// when an obligatory slot stays empty.
fn fill(entry: &SemEntry, c: usize, ix: &Indexed) -> Option<Vec<SlotFill>> {
    let frame = entry.frame.as_ref()?;
    let (wstart, wend) = ix
        .phrases
        .iter()
        .filter(|p| p.3 == 0 && p.1 <= c && c < p.2)
        .map(|p| (p.1, p.2))
        .next()
        .unwrap_or((0, ix.leaves.len()));
    let mut candidates: Vec<&(&Element, usize, usize, usize)> = ix
        .phrases
        .iter()
        .filter(|p| p.1 > c && p.1 >= wstart && p.2 <= wend && matches!(p.0.name(), "NP" | "PP"))
        .collect();
    candidates.sort_by_key(|p| (p.1, p.2 - p.1));
    let holder = ix.leaves[c].text();
    let mut used: Vec<(usize, usize)> = Vec::new();
    let mut fills = Vec::new();
    for slot in &frame.slots {
        let hit = candidates.iter().find_map(|&&(el, s, e, _)| {
            if used.iter().any(|&(us, ue)| s < ue && us < e) || !type_matches(slot, ix, s, e) {
                return None;
            }
            slot.forms.iter().find(|f| form_matches(f, el, ix, s)).map(|f| (el, s, e, f))
        });
        match hit {
            Some((el, s, e, f)) => {
                used.push((s, e));
                fills.push(SlotFill {
                    relation: slot.relation.clone(),
                    holder: holder.clone(),
                    holder_index: c,
                    form: f.clone(),
                    slot_forms: slot.forms_text(),
                    content: normalize_space(&el.text_content()),
                    span: (s, e),
                });
            }
            None if slot.is_obligatory() => return None,
            None => {}
        }
    }
    Some(fills)
}

/// `(category, type)` readings of a tagged token.
fn token_readings(e: &Element) -> Vec<(String, String)> {
    let mut v = Vec::new();
    if let Some(t) = e.attr("TYPE") {
        v.push((e.name().to_string(), t.to_string()));
    }
    if let Some(alt) = e.attr("ALT") {
        for r in alt.split(',') {
            if let Some((c, t)) = r.split_once(':') {
                v.push((c.to_string(), t.to_string()));
            }
        }
    }
    v
}

struct Resolution {
    token: usize,
    readings: Vec<(String, String)>,
}

fn analyse(s: &Element, lex: &SemLexicon) -> (Vec<ConceptInstance>, Vec<Resolution>) {
    let ix = index(s);
    let mut out = Vec::new();
    let mut resolutions = Vec::new();
    for (c, leaf) in ix.leaves.iter().enumerate() {
        let Leaf::Element(tok) = leaf else { continue };
        let readings = token_readings(tok);
        if !readings.iter().any(|(cat, _)| cat == SemCategory::Concept.as_str()) {
            continue;
        }
        let text = tok.text_content();
        let entries = lex.lookup(&text);
        let mut kept = Vec::new();
        let mut dropped = false;
        for (cat, ty) in &readings {
            let entry = entries
                .iter()
                .find(|e| e.category.as_str() == cat && &e.sem_type == ty && e.frame.is_some());
            match entry {
                Some(entry) => match fill(entry, c, &ix) {
                    Some(fills) => {
                        kept.push((cat.clone(), ty.clone()));
                        out.push(ConceptInstance {
                            word: text.clone(),
                            sem_type: entry.sem_type.clone(),
                            desc: entry.desc.clone(),
                            token: c,
                            fills,
                        });
                    }
                    None => dropped = true,
                },
                None => kept.push((cat.clone(), ty.clone())),
            }
        }
        if dropped && !kept.is_empty() {
            resolutions.push(Resolution { token: c, readings: kept });
        }
    }
    (out, resolutions)
}

/// Applies `f` to the leaf element at token position `target`.
fn with_leaf(e: &mut Element, target: usize, pos: &mut usize, f: &mut dyn FnMut(&mut Element)) -> bool {
    for c in e.children_mut() {
        match c {
            Node::Text(t) => *pos += t.split_whitespace().count(),
            Node::Element(el) if is_annotation_block(el) => {}
            Node::Element(el) if el.has_element_children() => {
                if with_leaf(el, target, pos, f) {
                    return true;
                }
            }
            Node::Element(el) => {
                if *pos == target {
                    f(el);
                    return true;
                }
                *pos += 1;
            }
        }
    }
    false
}

fn relabel(e: &mut Element, readings: &[(String, String)]) {
    let (cat, ty) = &readings[0];
    e.rename(cat.as_str()).expect("category names are valid");
    e.set_attr("TYPE", ty.as_str());
    if readings.len() > 1 {
        let alt: Vec<String> = readings[1..].iter().map(|(c, t)| alloc::format!("{}:{}", c, t)).collect();
        e.set_attr("ALT", alt.join(","));
    } else {
        e.remove_attr("ALT");
    }
}

fn text_el(name: &str, text: &str) -> Element {
    Element::with_text(name, text)
}

fn render(instances: &[ConceptInstance], style: FrameStyle) -> Element {
    let mut block = Element::new("CONCEPTS");
    for ci in instances {
        let mut c = Element::new("CONCEPT");
        c.set_attr("TYPE", ci.sem_type.as_str());
        c.push(text_el("WORD", &ci.word));
        c.push(text_el("DESC", &ci.desc));
        if !ci.fills.is_empty() {
            let mut slots = Element::new("SLOTS");
            match style {
                FrameStyle::Dtd => {
                    for f in &ci.fills {
                        let mut r = Element::new("RELATION");
                        r.set_attr("TYPE", f.relation.as_str());
                        r.push(text_el("ASSIGN_TO", &f.holder));
                        r.push(text_el("FORM", &f.form.to_string()));
                        r.push(text_el("CONTENT", &f.content));
                        slots.push(r);
                    }
                }
                FrameStyle::Compact => {
                    let mut r = Element::new("RELATION");
                    for f in &ci.fills {
                        let mut e = Element::with_text(f.relation.as_str(), f.content.as_str());
                        e.set_attr("FORM", f.slot_forms.as_str());
                        r.push(e);
                    }
                    slots.push(r);
                }
            }
            c.push(slots);
        }
        block.push(c);
    }
    block
}

/// Fills the case frames of the concept tokens of every sentence from the
/// noun and prepositional phrases following them and appends a
/// `<CONCEPTS>` block to the sentence. Frame readings whose obligatory
/// slots cannot be filled are removed from the token.
pub fn fill_frames(mut doc: Document, lex: &SemLexicon, style: FrameStyle) -> (Document, Vec<ConceptInstance>) {
    let mut all = Vec::new();
    doc.for_each_sentence_mut(&mut |s| {
        let kept: Vec<Node> = s
            .take_children()
            .into_iter()
            .filter(|n| !matches!(n, Node::Element(e) if e.name() == "CONCEPTS"))
            .collect();
        s.set_children(kept);
        let (instances, resolutions) = analyse(s, lex);
        for r in &resolutions {
            with_leaf(s, r.token, &mut 0, &mut |e| relabel(e, &r.readings));
        }
        if !instances.is_empty() {
            s.push(render(&instances, style));
        }
        all.extend(instances);
    });
    (doc, all)
}
