//! Part-of-speech tagging: lexicon lookup first, ordered string heuristics
//! for lexicon misses, `XXX` for everything else.
//!
//! A tagged token carries its first class as element name, the remaining
//! classes in `ALT`, and the features of every class in `MORPH`:
//!
//! ```text
//! <DETD ALT="RELPRON" MORPH="DETD:NOM.SG.MAS,...;RELPRON:NOM.SG.MAS,DAT.SG.FEM">der</DETD>
//! <N SRC="UNG" MORPH="N:_.PL.FEM">Blutanhaftungen</N>
//! <XXX>ungehoeriger</XXX>
//! ```
//!
//! Heuristic file, one heuristic per line:
//!
//! ```text
//! UNG <TAB> cap & suffix(ung|ungen) <TAB> N <TAB> ungen=_.PL.FEM;ung=_.SG.FEM
//! UC1 <TAB> cap & !initial          <TAB> N <TAB> _
//! ```
//!
//! Predicate atoms: `suffix(a|b)`, `prefix(a|b)`, `cap`, `lower`, `initial`,
//! `digits`, `minlen(n)`, `prev(TAG)`, `true`; joined by `&`, each optionally
//! negated with `!`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::annotation::{from_pieces, into_pieces, leaf_tokens, Document, Element, LeafToken, Piece};
use crate::features::FeatureSet;
use crate::morph::{Lexicon, MorphAnalysis, Pos};

pub const UNKNOWN: &str = "XXX";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Suffix(Vec<String>),
    Prefix(Vec<String>),
    Cap,
    Lower,
    Initial,
    Digits,
    MinLen(usize),
    Prev(String),
    True,
}

/// What a heuristic may look at.
#[derive(Debug, Clone, Copy)]
pub struct TokenContext<'a> {
    pub text: &'a str,
    /// Index of the token within its sentence.
    pub position: usize,
    /// Tag of the preceding token, if it is tagged.
    pub prev_tag: Option<&'a str>,
}

impl Atom {
    fn holds(&self, cx: &TokenContext) -> bool {
        let first = cx.text.chars().next();
        match self {
            Atom::Suffix(alts) => alts.iter().any(|s| cx.text.ends_with(s.as_str())),
            Atom::Prefix(alts) => alts.iter().any(|s| cx.text.starts_with(s.as_str())),
            Atom::Cap => first.is_some_and(char::is_uppercase),
            Atom::Lower => first.is_some_and(char::is_lowercase),
            Atom::Initial => cx.position == 0,
            Atom::Digits => !cx.text.is_empty() && cx.text.chars().all(|c| c.is_ascii_digit()),
            Atom::MinLen(n) => cx.text.chars().count() >= *n,
            Atom::Prev(tag) => cx.prev_tag == Some(tag.as_str()),
            Atom::True => true,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Suffix(a) => write!(f, "suffix({})", a.join("|")),
            Atom::Prefix(a) => write!(f, "prefix({})", a.join("|")),
            Atom::Cap => f.write_str("cap"),
            Atom::Lower => f.write_str("lower"),
            Atom::Initial => f.write_str("initial"),
            Atom::Digits => f.write_str("digits"),
            Atom::MinLen(n) => write!(f, "minlen({})", n),
            Atom::Prev(t) => write!(f, "prev({})", t),
            Atom::True => f.write_str("true"),
        }
    }
}

/// A conjunction of possibly negated atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub terms: Vec<(bool, Atom)>,
}

impl Predicate {
    pub fn holds(&self, cx: &TokenContext) -> bool {
        self.terms.iter().all(|(neg, a)| a.holds(cx) != *neg)
    }

    pub fn parse(text: &str) -> Result<Predicate, String> {
        let mut terms = Vec::new();
        for raw in text.split('&') {
            let mut t = raw.trim();
            let neg = t.starts_with('!');
            if neg {
                t = t[1..].trim_start();
            }
            let (head, arg) = match t.find('(') {
                Some(i) if t.ends_with(')') => (&t[..i], Some(&t[i + 1..t.len() - 1])),
                Some(_) => return Err(format!("unbalanced parentheses in `{}`", t)),
                None => (t, None),
            };
            let alts = |a: Option<&str>| -> Result<Vec<String>, String> {
                let a = a.ok_or_else(|| format!("`{}` needs an argument", head))?;
                let v: Vec<String> = a.split('|').map(|s| s.trim().to_string()).collect();
                if v.iter().any(String::is_empty) {
                    return Err(format!("empty alternative in `{}`", t));
                }
                Ok(v)
            };
            let atom = match (head, arg) {
                ("suffix", a) => Atom::Suffix(alts(a)?),
                ("prefix", a) => Atom::Prefix(alts(a)?),
                ("minlen", Some(n)) => Atom::MinLen(n.trim().parse().map_err(|_| format!("bad length `{}`", n))?),
                ("prev", Some(tag)) if !tag.trim().is_empty() => Atom::Prev(tag.trim().to_string()),
                ("cap", None) => Atom::Cap,
                ("lower", None) => Atom::Lower,
                ("initial", None) => Atom::Initial,
                ("digits", None) => Atom::Digits,
                ("true", None) => Atom::True,
                _ => return Err(format!("unknown predicate `{}`", t)),
            };
            terms.push((neg, atom));
        }
        Ok(Predicate { terms })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (neg, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            if *neg {
                f.write_str("!")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heuristic {
    pub name: String,
    pub predicate: Predicate,
    pub pos: Pos,
    /// Feature alternatives: the first whose suffix ends the token wins; an
    /// entry without suffix applies to any token.
    pub features: Vec<(Option<String>, FeatureSet)>,
}

impl Heuristic {
    pub fn applies(&self, cx: &TokenContext) -> bool {
        self.predicate.holds(cx)
    }

    pub fn features_for(&self, token: &str) -> FeatureSet {
        self.features
            .iter()
            .find(|(suffix, _)| suffix.as_ref().is_none_or(|s| token.ends_with(s.as_str())))
            .map(|(_, f)| *f)
            .unwrap_or(FeatureSet::ALL)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct HeuristicError {
    pub line: usize,
    pub reason: String,
}

pub fn parse_heuristics(text: &str) -> Result<Vec<Heuristic>, HeuristicError> {
    let mut out: Vec<Heuristic> = Vec::new();
    let mut names = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let err = |reason: String| HeuristicError { line: i + 1, reason };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(String::from("expected `NAME<TAB>predicate<TAB>POS<TAB>features`")));
        }
        let name = fields[0];
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '"') {
            return Err(err(format!("invalid heuristic name `{}`", name)));
        }
        if !names.insert(name) {
            return Err(err(format!("duplicate heuristic `{}`", name)));
        }
        let predicate = Predicate::parse(fields[1]).map_err(err)?;
        let pos = Pos::parse(fields[2]).ok_or_else(|| err(format!("unknown POS tag `{}`", fields[2])))?;
        let mut features = Vec::new();
        for alt in fields[3].split(';') {
            let (suffix, feats) = match alt.split_once('=') {
                Some((s, f)) => (Some(s.trim().to_string()), f),
                None => (None, alt),
            };
            let f = feats.trim().parse::<FeatureSet>().map_err(|e| err(e.to_string()))?;
            features.push((suffix, f));
        }
        out.push(Heuristic {
            name: String::from(name),
            predicate,
            pos,
            features,
        });
    }
    Ok(out)
}

/// Renders `(class, features)` readings as a `MORPH` attribute value.
pub fn format_morph(readings: &[(String, FeatureSet)]) -> String {
    let mut out = String::new();
    for (i, (pos, f)) in readings.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(pos);
        out.push(':');
        out.push_str(&f.to_string());
    }
    out
}

pub fn parse_morph(value: &str) -> Option<Vec<(String, FeatureSet)>> {
    value
        .split(';')
        .map(|r| {
            let (pos, f) = r.split_once(':')?;
            Some((pos.to_string(), f.parse().ok()?))
        })
        .collect()
}

/// The classes of a tagged token element with their features. Without a
/// `MORPH` attribute every class is fully underspecified.
pub fn token_readings(e: &Element) -> Vec<(String, FeatureSet)> {
    if let Some(r) = e.attr("MORPH").and_then(parse_morph) {
        return r;
    }
    let mut out = alloc::vec![(e.name().to_string(), FeatureSet::ALL)];
    if let Some(alt) = e.attr("ALT") {
        for a in alt.split(',').filter(|a| !a.is_empty()) {
            if !out.iter().any(|(p, _)| p == a) {
                out.push((a.to_string(), FeatureSet::ALL));
            }
        }
    }
    out
}

fn lexicon_element(word: &str, analyses: &[MorphAnalysis]) -> Element {
    let mut readings: Vec<(String, FeatureSet)> = Vec::new();
    for a in analyses {
        match readings.iter_mut().find(|(p, _)| p == a.pos.as_str()) {
            Some((_, f)) => *f = f.union(a.features),
            None => readings.push((a.pos.as_str().to_string(), a.features)),
        }
    }
    let mut e = Element::with_text(readings[0].0.as_str(), word);
    if readings.len() > 1 {
        let alt: Vec<&str> = readings[1..].iter().map(|(p, _)| p.as_str()).collect();
        e.set_attr("ALT", alt.join(","));
    }
    e.set_attr("MORPH", format_morph(&readings));
    e
}

/// Tags one plain word.
pub fn tag_word(word: &str, cx: &TokenContext, lex: &Lexicon, heuristics: &[Heuristic]) -> Element {
    let analyses = lex.analyze_at(word, cx.position == 0);
    if !analyses.is_empty() {
        return lexicon_element(word, &analyses);
    }
    for h in heuristics {
        if h.applies(cx) {
            let f = h.features_for(word);
            let mut e = Element::with_text(h.pos.as_str(), word);
            e.set_attr("SRC", h.name.as_str());
            e.set_attr("MORPH", format_morph(&[(h.pos.as_str().to_string(), f)]));
            return e;
        }
    }
    Element::with_text(UNKNOWN, word)
}

fn tag_container(container: &mut Element, lex: &Lexicon, heuristics: &[Heuristic]) {
    let pieces = into_pieces(container.take_children());
    let mut out = Vec::with_capacity(pieces.len());
    let mut position = 0;
    let mut prev: Option<String> = None;
    for p in pieces {
        match p {
            Piece::Word(w) => {
                let cx = TokenContext {
                    text: &w,
                    position,
                    prev_tag: prev.as_deref(),
                };
                let e = tag_word(&w, &cx, lex, heuristics);
                prev = Some(e.name().to_string());
                position += 1;
                out.push(Piece::Element(e));
            }
            Piece::Element(e) => {
                if !crate::annotation::is_annotation_block(&e) {
                    prev = Some(e.name().to_string());
                    position += 1;
                }
                out.push(Piece::Element(e));
            }
            space => out.push(space),
        }
    }
    container.set_children(from_pieces(out));
}

/// Tags every plain word of every sentence (of the whole root when the
/// document has no sentences). Elements already present are kept as tokens.
pub fn tag_document(mut doc: Document, lex: &Lexicon, heuristics: &[Heuristic]) -> Document {
    if doc.sentences().is_empty() {
        tag_container(&mut doc.root, lex, heuristics);
    } else {
        doc.for_each_sentence_mut(&mut |s| tag_container(s, lex, heuristics));
    }
    doc
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoverageStats {
    pub total: usize,
    pub lexicon: usize,
    pub heuristic: usize,
    pub unknown: usize,
    /// Tokens tagged before POS tagging (punctuation, abbreviations, pattern
    /// tokens).
    pub pretagged: usize,
    pub untagged: usize,
}

impl CoverageStats {
    /// Share of `XXX` tokens among all tokens.
    pub fn unknown_ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.unknown as f64 / self.total as f64
        }
    }
}

pub fn coverage_report(doc: &Document) -> CoverageStats {
    let mut stats = CoverageStats::default();
    for t in leaf_tokens(&doc.root) {
        stats.total += 1;
        match t {
            LeafToken::Word(_) => stats.untagged += 1,
            LeafToken::Element(e) if e.name() == UNKNOWN => stats.unknown += 1,
            LeafToken::Element(e) if e.has_attr("SRC") => stats.heuristic += 1,
            LeafToken::Element(e) if e.has_attr("MORPH") => stats.lexicon += 1,
            LeafToken::Element(_) => stats.pretagged += 1,
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::serialize_element;
    use crate::structure::{detect_structure, StructureConfig};

    const HEUR: &str = "UNG\tcap & suffix(ung|ungen)\tN\tungen=_.PL.FEM;ung=_.SG.FEM\nUC1\tcap & !initial\tN\t_\nNUM\tdigits\tNR\t_\n";
    const LEX: &str = "der\tDETD\t-\tNOM.SG.MAS,GEN+DAT.SG.FEM,GEN.PL._\nder\tRELPRON\t-\tNOM.SG.MAS,DAT.SG.FEM\nan\tPRP\t-\tDAT+AKK._._\nkein\tDETI\t-\tNOM.SG.MAS+NTR,AKK.SG.NTR\n";

    fn tag(text: &str) -> Document {
        let lex = Lexicon::parse(LEX).unwrap();
        let h = parse_heuristics(HEUR).unwrap();
        tag_document(detect_structure(text, &StructureConfig::default()), &lex, &h)
    }

    #[test]
    fn heuristic_sources() {
        let doc = tag("Blutanhaftungen an der Gekroesewurzel");
        let s = serialize_element(doc.sentences()[0]);
        assert!(s.contains(r#"<N SRC="UNG" MORPH="N:_.PL.FEM">Blutanhaftungen</N>"#), "{}", s);
        assert!(s.contains(r#"<N SRC="UC1" MORPH="N:_">Gekroesewurzel</N>"#), "{}", s);
        assert!(s.contains(r#"<DETD ALT="RELPRON" MORPH="#), "{}", s);
    }

    #[test]
    fn unknown_lowercase_is_xxx() {
        let doc = tag("kein ungehoeriger Inhalt");
        let s = serialize_element(doc.sentences()[0]);
        assert!(s.contains("<XXX>ungehoeriger</XXX>"), "{}", s);
        let stats = coverage_report(&doc);
        assert_eq!((stats.total, stats.unknown, stats.lexicon, stats.heuristic), (3, 1, 1, 1));
        assert!((stats.unknown_ratio() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn heuristic_order_decides() {
        let lex = Lexicon::new();
        let h = parse_heuristics(HEUR).unwrap();
        let cx = TokenContext {
            text: "Zeitung",
            position: 3,
            prev_tag: None,
        };
        assert_eq!(tag_word("Zeitung", &cx, &lex, &h).attr("SRC"), Some("UNG"));
        let reversed: Vec<Heuristic> = h.iter().rev().cloned().collect();
        assert_eq!(tag_word("Zeitung", &cx, &lex, &reversed).attr("SRC"), Some("UC1"));
    }

    #[test]
    fn suffix_specific_features() {
        let h = &parse_heuristics(HEUR).unwrap()[0];
        assert_eq!(h.features_for("Zeitung").to_string(), "_.SG.FEM");
        assert_eq!(h.features_for("Zeitungen").to_string(), "_.PL.FEM");
    }

    #[test]
    fn predicate_atoms() {
        let p = Predicate::parse("lower & minlen(4) & !prev(DETD) & prefix(un)").unwrap();
        let cx = |text, prev| TokenContext {
            text,
            position: 1,
            prev_tag: prev,
        };
        assert!(p.holds(&cx("ungut", None)));
        assert!(!p.holds(&cx("ungut", Some("DETD"))));
        assert!(!p.holds(&cx("unt", None)));
        assert_eq!(p.to_string(), "lower & minlen(4) & !prev(DETD) & prefix(un)");
        assert!(Predicate::parse("foo").is_err());
        assert!(Predicate::parse("suffix(a|)").is_err());
    }

    #[test]
    fn heuristic_file_errors() {
        assert!(parse_heuristics("A\ttrue\tN\t_\nA\ttrue\tN\t_").is_err());
        assert!(parse_heuristics("A\ttrue\tFOO\t_").is_err());
        assert!(parse_heuristics("A\ttrue\tN").is_err());
    }

    #[test]
    fn tagging_is_total_and_idempotent() {
        let doc = tag("Blutanhaftungen an der Gekroesewurzel. kein x 12 y.");
        let stats = coverage_report(&doc);
        assert_eq!(stats.untagged, 0);
        let lex = Lexicon::parse(LEX).unwrap();
        let h = parse_heuristics(HEUR).unwrap();
        assert_eq!(tag_document(doc.clone(), &lex, &h), doc);
    }

    #[test]
    fn readings_from_attributes() {
        let e = Element::with_text("V", "liebe").attr_with("ALT", "ADJ");
        assert_eq!(token_readings(&e).len(), 2);
        let e = Element::with_text("N", "x").attr_with("MORPH", "N:_.PL.FEM");
        assert_eq!(token_readings(&e)[0].1.to_string(), "_.PL.FEM");
    }
}
