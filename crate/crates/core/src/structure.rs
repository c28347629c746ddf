//! Structure detection: input normalization, tokenization with domain token
//! patterns and an abbreviation lexicon, and sentence segmentation.
//!
//! Tokens are recognized in priority order at every position:
//!
//! 1. token patterns (longest match, declaration order on ties),
//! 2. abbreviation-lexicon entries, tagged `ABBR`,
//! 3. numbers containing a period such as `3.14`, tagged `NUMBER`,
//! 4. maximal alphanumeric runs (hyphens allowed between alphanumerics),
//!    left as bare text,
//! 5. any other single character, tagged `IP`.
//!
//! Whitespace between tokens is collapsed to a single space; tokens that were
//! adjacent in the input stay adjacent.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotation::{from_pieces, into_pieces, Document, Element, Piece, ROOT, SENTENCE};
use crate::automaton::{Automaton, Match, PatternError};

pub const ABBR: &str = "ABBR";
pub const NUMBER: &str = "NUMBER";
pub const IP: &str = "IP";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("input is not valid UTF-8 (byte {0})")]
    InvalidEncoding(usize),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Pattern { line: usize, source: PatternError },
}

/// Character replacements applied during normalization
/// (e.g. `ü` → `ue`, typographic apostrophe → `'`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CharMap {
    map: BTreeMap<char, String>,
}

impl CharMap {
    pub fn new() -> CharMap {
        CharMap::default()
    }

    pub fn insert(&mut self, from: char, to: impl Into<String>) {
        self.map.insert(from, to.into());
    }

    /// Reads `char <TAB> replacement` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<CharMap, StructureError> {
        let mut map = CharMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, '\t');
            let from = parts.next().unwrap_or("");
            let to = parts.next();
            let mut chars = from.chars();
            match (chars.next(), chars.next(), to) {
                (Some(c), None, Some(to)) => map.insert(c, to),
                _ => {
                    return Err(StructureError::Format {
                        line: i + 1,
                        reason: String::from("expected `char<TAB>replacement`"),
                    })
                }
            }
        }
        Ok(map)
    }

    /// German umlauts and sharp s to their ASCII transliterations, plus
    /// typographic quotes to ASCII.
    pub fn transliteration() -> CharMap {
        let mut m = CharMap::new();
        for (from, to) in [
            ('ä', "ae"),
            ('ö', "oe"),
            ('ü', "ue"),
            ('Ä', "Ae"),
            ('Ö', "Oe"),
            ('Ü', "Ue"),
            ('ß', "ss"),
            ('\u{2019}', "'"),
            ('\u{2018}', "'"),
            ('\u{201c}', "\""),
            ('\u{201e}', "\""),
        ] {
            m.insert(from, to);
        }
        m
    }
}

/// Decodes UTF-8, turns CRLF into LF, drops control characters other than
/// LF and TAB, then applies the character map.
pub fn normalize_input(raw: &[u8], map: &CharMap) -> Result<String, StructureError> {
    let text = core::str::from_utf8(raw).map_err(|e| StructureError::InvalidEncoding(e.valid_up_to()))?;
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\r' && chars.peek() == Some(&'\n') {
            continue;
        }
        if c.is_control() && c != '\n' && c != '\t' {
            continue;
        }
        match map.map.get(&c) {
            Some(rep) => out.push_str(rep),
            None => out.push(c),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationLexicon {
    entries: BTreeSet<String>,
}

impl AbbreviationLexicon {
    pub fn new() -> AbbreviationLexicon {
        AbbreviationLexicon::default()
    }

    /// One entry per line; every entry must contain a period.
    pub fn parse(text: &str) -> Result<AbbreviationLexicon, StructureError> {
        let mut lex = AbbreviationLexicon::new();
        for (i, line) in text.lines().enumerate() {
            let entry = line.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            if !lex.insert(entry) {
                return Err(StructureError::Format {
                    line: i + 1,
                    reason: alloc::format!("abbreviation `{}` contains no period or whitespace", entry),
                });
            }
        }
        Ok(lex)
    }

    /// Adds an entry; returns false (and ignores it) unless it contains a
    /// period and no whitespace.
    pub fn insert(&mut self, entry: &str) -> bool {
        if !entry.contains('.') || entry.chars().any(char::is_whitespace) {
            return false;
        }
        self.entries.insert(String::from(entry));
        true
    }

    pub fn contains(&self, entry: &str) -> bool {
        self.entries.contains(entry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Length in chars of the longest entry that is a prefix of `input[at..]`
    /// and ends on a token boundary.
    fn longest_at(&self, input: &[char], at: usize) -> Option<usize> {
        let mut best = None;
        for e in &self.entries {
            let mut len = 0;
            let mut ok = true;
            for c in e.chars() {
                if input.get(at + len) != Some(&c) {
                    ok = false;
                    break;
                }
                len += 1;
            }
            if ok && ends_token(input, at + len) && best.is_none_or(|b| len > b) {
                best = Some(len);
            }
        }
        best
    }
}

/// Attribute extraction for pattern tokens: copy the text of a named capture,
/// optionally decoded through a lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrRule {
    pub attr: String,
    pub group: String,
    pub table: Option<(String, BTreeMap<String, String>)>,
}

#[derive(Debug, Clone)]
pub struct TokenPattern {
    pub name: String,
    pub automaton: Automaton,
    pub attributes: Vec<AttrRule>,
}

impl TokenPattern {
    pub fn new(name: &str, pattern: &str) -> Result<TokenPattern, PatternError> {
        if !crate::annotation::is_valid_name(name) {
            return Err(PatternError {
                offset: 0,
                reason: alloc::format!("pattern name `{}` is not a valid tag name", name),
            });
        }
        Ok(TokenPattern {
            name: String::from(name),
            automaton: Automaton::compile(pattern)?,
            attributes: Vec::new(),
        })
    }
}

/// Parses a pattern file.
///
/// ```text
/// %table <TAB> methods <TAB> GS=Sandguss <TAB> KK=Kokillenguss
/// MAT-ID <TAB> [A-Z]{2}[0-9]{3}[A-Z]
/// PRODUCT <TAB> ...(?<METHODE>[A-Z]{2})... <TAB> Method=METHODE@methods Material=MAT-ID
/// ```
///
/// Tables must be declared before the patterns that use them.
pub fn parse_patterns(text: &str) -> Result<Vec<TokenPattern>, StructureError> {
    let mut tables: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut patterns = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fmt_err = |reason: String| StructureError::Format { line: line_no, reason };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == "%table" {
            if fields.len() < 2 {
                return Err(fmt_err(String::from("table without name")));
            }
            let mut table = BTreeMap::new();
            for kv in &fields[2..] {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| fmt_err(alloc::format!("table entry `{}` is not key=value", kv)))?;
                table.insert(String::from(k), String::from(v));
            }
            tables.insert(String::from(fields[1]), table);
            continue;
        }
        if fields.len() < 2 {
            return Err(fmt_err(String::from("expected `NAME<TAB>pattern`")));
        }
        let mut pattern = TokenPattern::new(fields[0], fields[1]).map_err(|source| StructureError::Pattern { line: line_no, source })?;
        for spec in fields[2..].iter().flat_map(|f| f.split_whitespace()) {
            let (attr, src) = spec
                .split_once('=')
                .ok_or_else(|| fmt_err(alloc::format!("attribute rule `{}` is not Attr=GROUP[@table]", spec)))?;
            let (group, table) = match src.split_once('@') {
                Some((g, t)) => {
                    let tab = tables
                        .get(t)
                        .ok_or_else(|| fmt_err(alloc::format!("unknown table `{}`", t)))?;
                    (g, Some((String::from(t), tab.clone())))
                }
                None => (src, None),
            };
            if pattern.automaton.group_index(group).is_none() {
                return Err(fmt_err(alloc::format!("pattern has no group `{}`", group)));
            }
            if !crate::annotation::is_valid_name(attr) {
                return Err(fmt_err(alloc::format!("invalid attribute name `{}`", attr)));
            }
            pattern.attributes.push(AttrRule {
                attr: String::from(attr),
                group: String::from(group),
                table,
            });
        }
        patterns.push(pattern);
    }
    Ok(patterns)
}

#[derive(Debug, Clone)]
pub struct StructureConfig {
    pub sentence_terminals: BTreeSet<String>,
    pub patterns: Vec<TokenPattern>,
    pub abbreviations: AbbreviationLexicon,
}

impl Default for StructureConfig {
    fn default() -> StructureConfig {
        StructureConfig {
            sentence_terminals: [".", "!", "?", ":"].iter().map(|s| s.to_string()).collect(),
            patterns: Vec::new(),
            abbreviations: AbbreviationLexicon::new(),
        }
    }
}

impl StructureConfig {
    /// Whether a colon closes a sentence (default on).
    pub fn set_colon_terminal(&mut self, on: bool) {
        if on {
            self.sentence_terminals.insert(String::from(":"));
        } else {
            self.sentence_terminals.remove(":");
        }
    }
}

fn is_alnum(c: char) -> bool {
    c.is_alphanumeric()
}

/// A token may start at `at` if the previous character is not alphanumeric.
fn starts_token(input: &[char], at: usize) -> bool {
    at == 0 || !is_alnum(input[at - 1])
}

/// A token may end before `at` if it does not cut an alphanumeric run.
fn ends_token(input: &[char], at: usize) -> bool {
    at == input.len() || at == 0 || !is_alnum(input[at]) || !is_alnum(input[at - 1])
}

fn slice(input: &[char], from: usize, to: usize) -> String {
    input[from..to].iter().collect()
}

/// Splits normalized text into tokens under a `DOC` root.
pub fn tokenize(text: &str, config: &StructureConfig) -> Document {
    let input: Vec<char> = text.chars().collect();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut pos = 0;
    while pos < input.len() {
        if input[pos].is_whitespace() {
            while pos < input.len() && input[pos].is_whitespace() {
                pos += 1;
            }
            pieces.push(Piece::Space(String::from(" ")));
            continue;
        }
        let (end, piece) = next_token(&input, pos, config);
        pieces.push(piece);
        pos = end;
    }
    let mut root = Element::new(ROOT);
    root.set_children(from_pieces(pieces));
    Document::new(root)
}

fn next_token(input: &[char], pos: usize, config: &StructureConfig) -> (usize, Piece) {
    if starts_token(input, pos) {
        let mut best: Option<(&TokenPattern, Match)> = None;
        for p in &config.patterns {
            if let Some(m) = p.automaton.longest_match(input, pos, |e| ends_token(input, e)) {
                if best.as_ref().is_none_or(|(_, b)| m.end > b.end) {
                    best = Some((p, m));
                }
            }
        }
        if let Some((p, m)) = best {
            return (m.end, Piece::Element(pattern_element(input, p, &m)));
        }
        if let Some(len) = config.abbreviations.longest_at(input, pos) {
            return (pos + len, Piece::Element(Element::with_text(ABBR, slice(input, pos, pos + len))));
        }
        if let Some(end) = dotted_number(input, pos) {
            return (end, Piece::Element(Element::with_text(NUMBER, slice(input, pos, end))));
        }
    }
    if is_alnum(input[pos]) {
        let mut end = pos + 1;
        while end < input.len() {
            let c = input[end];
            if is_alnum(c) || (c == '-' && end + 1 < input.len() && is_alnum(input[end + 1])) {
                end += 1;
            } else {
                break;
            }
        }
        return (end, Piece::Word(slice(input, pos, end)));
    }
    (pos + 1, Piece::Element(Element::with_text(IP, slice(input, pos, pos + 1))))
}

/// `digits ('.' digits)+` ending on a token boundary.
fn dotted_number(input: &[char], pos: usize) -> Option<usize> {
    let digits = |mut i: usize| {
        let s = i;
        while i < input.len() && input[i].is_ascii_digit() {
            i += 1;
        }
        (i > s).then_some(i)
    };
    let mut end = digits(pos)?;
    let mut groups = 0;
    while end < input.len() && input[end] == '.' {
        match digits(end + 1) {
            Some(e) => {
                end = e;
                groups += 1;
            }
            None => break,
        }
    }
    (groups > 0 && ends_token(input, end)).then_some(end)
}

/// Builds the element for a pattern match: named captures become nested
/// child elements, text between them is kept with whitespace collapsed.
fn pattern_element(input: &[char], pattern: &TokenPattern, m: &Match) -> Element {
    let groups = pattern.automaton.groups();
    let mut root = Element::new(pattern.name.as_str());
    for rule in &pattern.attributes {
        let span = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.name == rule.group)
            .find_map(|(i, _)| m.captures[i]);
        if let Some((s, e)) = span {
            let text = slice(input, s, e);
            let value = match &rule.table {
                Some((_, table)) => table.get(&text).cloned(),
                None => Some(text),
            };
            if let Some(v) = value {
                root.set_attr(rule.attr.as_str(), v);
            }
        }
    }
    fill_captures(input, groups, m, None, m.start, m.end, &mut root);
    root
}

fn fill_captures(
    input: &[char],
    groups: &[crate::automaton::GroupInfo],
    m: &Match,
    parent: Option<usize>,
    from: usize,
    to: usize,
    out: &mut Element,
) {
    let mut kids: Vec<(usize, usize, usize)> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.parent == parent)
        .filter_map(|(i, _)| m.captures[i].map(|(s, e)| (s, e, i)))
        .filter(|&(s, e, _)| s < e && from <= s && e <= to)
        .collect();
    kids.sort();
    let mut cursor = from;
    for (s, e, i) in kids {
        if s < cursor {
            continue;
        }
        push_gap(input, cursor, s, out);
        let mut child = Element::new(groups[i].name.as_str());
        fill_captures(input, groups, m, Some(i), s, e, &mut child);
        out.push(child);
        cursor = e;
    }
    push_gap(input, cursor, to, out);
}

fn push_gap(input: &[char], from: usize, to: usize, out: &mut Element) {
    let mut text = String::new();
    let mut in_space = false;
    for &c in &input[from..to] {
        if c.is_whitespace() {
            if !in_space {
                text.push(' ');
            }
            in_space = true;
        } else {
            text.push(c);
            in_space = false;
        }
    }
    out.push_text(text);
}

/// Wraps token runs in `S` elements. A top-level `IP` whose text is a
/// sentence terminal closes the sentence and gets `SENT="end"`; a trailing
/// run without terminal becomes `<S COMPLETE="no">`. Existing `S` elements
/// are left alone, so segmenting twice changes nothing.
pub fn detect_sentences(doc: Document, config: &StructureConfig) -> Document {
    let mut root = doc.root;
    let pieces = into_pieces(root.take_children());
    let mut out: Vec<Piece> = Vec::new();
    let mut current: Vec<Piece> = Vec::new();

    fn flush(current: &mut Vec<Piece>, out: &mut Vec<Piece>, complete: bool) {
        let mut trailing = Vec::new();
        while matches!(current.last(), Some(Piece::Space(_))) {
            trailing.push(current.pop().unwrap());
        }
        if !current.is_empty() {
            let mut s = Element::new(SENTENCE);
            if !complete {
                s.set_attr("COMPLETE", "no");
            }
            s.set_children(from_pieces(core::mem::take(current)));
            out.push(Piece::Element(s));
        }
        out.extend(trailing.into_iter().rev());
    }

    for piece in pieces {
        match piece {
            Piece::Space(s) if current.is_empty() => out.push(Piece::Space(s)),
            Piece::Element(e) if e.name() == SENTENCE => {
                flush(&mut current, &mut out, false);
                out.push(Piece::Element(e));
            }
            Piece::Element(mut e)
                if e.name() == IP && config.sentence_terminals.contains(e.text_content().as_str()) =>
            {
                e.set_attr("SENT", "end");
                current.push(Piece::Element(e));
                flush(&mut current, &mut out, true);
            }
            p => current.push(p),
        }
    }
    flush(&mut current, &mut out, false);
    root.set_children(from_pieces(out));
    Document::new(root)
}

/// Tokenization followed by sentence detection.
pub fn detect_structure(text: &str, config: &StructureConfig) -> Document {
    detect_sentences(tokenize(text, config), config)
}
