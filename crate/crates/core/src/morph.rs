//! Lexicon-driven morphosyntactic analysis and generation.
//!
//! The lexicon holds closed-class forms and irregular forms as full surface
//! entries with fixed feature sets, and open-class roots (nouns, verbs,
//! adjectives) coded with an inflection paradigm. A paradigm maps suffixes to
//! the feature triples they realize; a form's features are the paradigm cell
//! intersected with the entry's fixed features (e.g. a noun's gender).
//!
//! File format, one entry per line, `#` starts a comment line:
//!
//! ```text
//! !paradigm <TAB> N-S-E <TAB> N <TAB> -:NOM+DAT+AKK.SG._ <TAB> s:GEN.SG._ ...
//! der       <TAB> DETD  <TAB> -     <TAB> NOM.SG.MAS,GEN+DAT.SG.FEM,GEN.PL._
//! Inhalt    <TAB> N     <TAB> N-S-E <TAB> _._.MAS
//! kam       <TAB> V     <TAB> -     <TAB> _ <TAB> lemma=kommen
//! ```
//!
//! A paradigm suffix `-` stands for the empty suffix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::features::{Dim, DimMask, FeatureSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    N,
    V,
    Adj,
    Adv,
    Detd,
    Deti,
    Prp,
    Relpron,
    Perspron,
    Posspron,
    Dempron,
    Konj,
    Ptk,
    Nr,
}

impl Pos {
    pub const ALL: [Pos; 14] = [
        Pos::N,
        Pos::V,
        Pos::Adj,
        Pos::Adv,
        Pos::Detd,
        Pos::Deti,
        Pos::Prp,
        Pos::Relpron,
        Pos::Perspron,
        Pos::Posspron,
        Pos::Dempron,
        Pos::Konj,
        Pos::Ptk,
        Pos::Nr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::N => "N",
            Pos::V => "V",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Detd => "DETD",
            Pos::Deti => "DETI",
            Pos::Prp => "PRP",
            Pos::Relpron => "RELPRON",
            Pos::Perspron => "PERSPRON",
            Pos::Posspron => "POSSPRON",
            Pos::Dempron => "DEMPRON",
            Pos::Konj => "KONJ",
            Pos::Ptk => "PTK",
            Pos::Nr => "NR",
        }
    }

    pub fn parse(s: &str) -> Option<Pos> {
        Pos::ALL.into_iter().find(|p| p.as_str() == s)
    }

    pub fn is_open_class(self) -> bool {
        matches!(self, Pos::N | Pos::V | Pos::Adj)
    }

    /// Dimensions a paradigm of this class has to cover completely.
    fn paradigm_dims(self) -> DimMask {
        match self {
            Pos::N => DimMask::single(Dim::Cas).with(Dim::Num),
            Pos::Adj => DimMask::ALL,
            _ => DimMask::NONE,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Lexicon,
    Heuristic(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub root: String,
    pub pos: Pos,
    pub paradigm: Option<String>,
    pub features: FeatureSet,
    pub extra: Vec<(String, String)>,
}

impl LexEntry {
    pub fn extra(&self, key: &str) -> Option<&str> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Lemma reported for the entry: the `lemma=` extra if present, else the
    /// root.
    pub fn lemma(&self) -> &str {
        self.extra("lemma").unwrap_or(&self.root)
    }

    pub fn to_line(&self) -> String {
        let mut line = format!(
            "{}\t{}\t{}\t{}",
            self.root,
            self.pos,
            self.paradigm.as_deref().unwrap_or("-"),
            self.features
        );
        for (k, v) in &self.extra {
            line.push('\t');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paradigm {
    pub id: String,
    pub pos: Pos,
    /// (suffix, features) cells; a suffix may occur in several cells.
    pub cells: Vec<(String, FeatureSet)>,
}

impl Paradigm {
    pub fn to_line(&self) -> String {
        let mut line = format!("!paradigm\t{}\t{}", self.id, self.pos);
        for (suffix, f) in &self.cells {
            let s = if suffix.is_empty() { "-" } else { suffix.as_str() };
            line.push_str(&format!("\t{}:{}", s, f));
        }
        line
    }

    /// Adjective paradigms must realize every triple. Noun paradigms must
    /// realize every case in each number they have at all (singularia and
    /// pluralia tantum exist); gender comes from the entry.
    fn covers(&self) -> bool {
        let dims = self.pos.paradigm_dims();
        let union = self.cells.iter().fold(FeatureSet::EMPTY, |acc, (_, f)| acc.union(f.lift(dims)));
        if self.pos != Pos::N {
            return union.is_full();
        }
        let nums = union.lift(DimMask::single(Dim::Num));
        !union.is_empty() && union == nums
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphAnalysis {
    pub pos: Pos,
    pub features: FeatureSet,
    pub lemma: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MorphError {
    #[error("unknown paradigm `{0}`")]
    UnknownParadigm(String),
    #[error("entry `{0}` has no paradigm")]
    NoParadigm(String),
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    paradigms: BTreeMap<String, Paradigm>,
    paradigm_order: Vec<String>,
    by_form: BTreeMap<String, Vec<usize>>,
    by_root: BTreeMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::new();
        lex.extend_from_text(text)?;
        Ok(lex)
    }

    /// Adds the entries and paradigms of another lexicon file.
    pub fn extend_from_text(&mut self, text: &str) -> Result<(), LexiconError> {
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0] == "!paradigm" {
                let p = parse_paradigm(&fields).map_err(|reason| LexiconError::Format { line: line_no, reason })?;
                self.add_paradigm(p).map_err(|reason| LexiconError::Format { line: line_no, reason })?;
            } else {
                let e = parse_entry(&fields).map_err(|reason| LexiconError::Format { line: line_no, reason })?;
                self.add_entry(e);
            }
        }
        Ok(())
    }

    pub fn add_paradigm(&mut self, p: Paradigm) -> Result<(), String> {
        if !p.pos.is_open_class() {
            return Err(format!("paradigm `{}` is for closed class {}", p.id, p.pos));
        }
        if self.paradigms.contains_key(&p.id) {
            return Err(format!("duplicate paradigm `{}`", p.id));
        }
        if !p.covers() {
            return Err(format!("paradigm `{}` does not cover all feature combinations of {}", p.id, p.pos));
        }
        self.paradigm_order.push(p.id.clone());
        self.paradigms.insert(p.id.clone(), p);
        Ok(())
    }

    pub fn add_entry(&mut self, e: LexEntry) {
        let idx = self.entries.len();
        let key = e.root.clone();
        if e.paradigm.is_some() {
            self.by_root.entry(key).or_default().push(idx);
        } else {
            self.by_form.entry(key).or_default().push(idx);
        }
        self.entries.push(e);
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn paradigm(&self, id: &str) -> Option<&Paradigm> {
        self.paradigms.get(id)
    }

    pub fn paradigms(&self) -> impl Iterator<Item = &Paradigm> {
        self.paradigm_order.iter().map(move |id| &self.paradigms[id])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.paradigms.is_empty()
    }

    /// Entries whose paradigm id is not defined.
    pub fn dangling_paradigms(&self) -> Vec<&LexEntry> {
        self.entries
            .iter()
            .filter(|e| e.paradigm.as_ref().is_some_and(|p| !self.paradigms.contains_key(p)))
            .collect()
    }

    /// Whether any entry (full form or inflected root) produces `token`.
    pub fn covers(&self, token: &str) -> bool {
        !self.analyze(token).is_empty()
    }

    /// All analyses of the exact token. Analyses with the same class, lemma
    /// and source are merged into one feature set; order follows the order of
    /// the contributing entries in the lexicon.
    pub fn analyze(&self, token: &str) -> Vec<MorphAnalysis> {
        let mut hits: Vec<(usize, FeatureSet)> = Vec::new();
        if let Some(idxs) = self.by_form.get(token) {
            for &i in idxs {
                hits.push((i, self.entries[i].features));
            }
        }
        for (split, _) in token.char_indices().chain(core::iter::once((token.len(), ' '))) {
            let (root, suffix) = token.split_at(split);
            let Some(idxs) = self.by_root.get(root) else { continue };
            for &i in idxs {
                let e = &self.entries[i];
                let Some(p) = e.paradigm.as_ref().and_then(|id| self.paradigms.get(id)) else { continue };
                let f = p
                    .cells
                    .iter()
                    .filter(|(s, _)| s == suffix)
                    .fold(FeatureSet::EMPTY, |acc, (_, f)| acc.union(*f))
                    .intersect(e.features);
                if !f.is_empty() {
                    hits.push((i, f));
                }
            }
        }
        hits.sort_by_key(|&(i, _)| i);
        let mut out: Vec<MorphAnalysis> = Vec::new();
        for (i, f) in hits {
            let e = &self.entries[i];
            match out.iter_mut().find(|a| a.pos == e.pos && a.lemma == e.lemma()) {
                Some(a) => a.features = a.features.union(f),
                None => out.push(MorphAnalysis {
                    pos: e.pos,
                    features: f,
                    lemma: e.lemma().to_string(),
                    source: Source::Lexicon,
                }),
            }
        }
        out
    }

    /// Lookup for a token at a given sentence position: the exact form first;
    /// sentence-initially, the lowercased form if the exact form is unknown.
    pub fn analyze_at(&self, token: &str, sentence_initial: bool) -> Vec<MorphAnalysis> {
        let exact = self.analyze(token);
        if exact.is_empty() && sentence_initial {
            let lower = token.to_lowercase();
            if lower != token {
                return self.analyze(&lower);
            }
        }
        exact
    }

    /// All surface forms of an open-class entry compatible with `features`.
    pub fn inflect(&self, entry: &LexEntry, features: FeatureSet) -> Result<Vec<String>, MorphError> {
        let id = entry.paradigm.as_ref().ok_or_else(|| MorphError::NoParadigm(entry.root.clone()))?;
        let p = self.paradigms.get(id).ok_or_else(|| MorphError::UnknownParadigm(id.clone()))?;
        let wanted = features.intersect(entry.features);
        let forms: BTreeSet<String> = p
            .cells
            .iter()
            .filter(|(_, f)| !f.intersect(wanted).is_empty())
            .map(|(s, _)| format!("{}{}", entry.root, s))
            .collect();
        Ok(forms.into_iter().collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in self.paradigms() {
            out.push_str(&p.to_line());
            out.push('\n');
        }
        for e in &self.entries {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}

fn parse_pos(s: &str) -> Result<Pos, String> {
    Pos::parse(s).ok_or_else(|| format!("unknown POS tag `{}`", s))
}

fn parse_features(s: &str) -> Result<FeatureSet, String> {
    s.parse::<FeatureSet>().map_err(|e| e.to_string())
}

fn parse_paradigm(fields: &[&str]) -> Result<Paradigm, String> {
    if fields.len() < 4 {
        return Err(String::from("expected `!paradigm<TAB>ID<TAB>POS<TAB>suffix:features...`"));
    }
    let pos = parse_pos(fields[2])?;
    let mut cells = Vec::new();
    for cell in &fields[3..] {
        let (suffix, feats) = cell
            .split_once(':')
            .ok_or_else(|| format!("paradigm cell `{}` is not suffix:features", cell))?;
        let suffix = if suffix == "-" { "" } else { suffix };
        if suffix.chars().any(char::is_whitespace) {
            return Err(format!("suffix `{}` contains whitespace", suffix));
        }
        cells.push((String::from(suffix), parse_features(feats)?));
    }
    Ok(Paradigm {
        id: String::from(fields[1]),
        pos,
        cells,
    })
}

fn parse_entry(fields: &[&str]) -> Result<LexEntry, String> {
    if fields.len() < 4 {
        return Err(String::from("expected `surface<TAB>POS<TAB>paradigm<TAB>features`"));
    }
    let root = fields[0];
    if root.is_empty() || root.chars().any(char::is_whitespace) {
        return Err(format!("invalid surface `{}`", root));
    }
    let pos = parse_pos(fields[1])?;
    let paradigm = match fields[2] {
        "-" => None,
        id => {
            if !pos.is_open_class() {
                return Err(format!("closed-class entry `{}` ({}) cannot have a paradigm", root, pos));
            }
            Some(String::from(id))
        }
    };
    let features = parse_features(fields[3])?;
    let mut extra = Vec::new();
    for kv in &fields[4..] {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("extra field `{}` is not key=value", kv))?;
        extra.push((String::from(k), String::from(v)));
    }
    Ok(LexEntry {
        root: String::from(root),
        pos,
        paradigm,
        features,
        extra,
    })
}
