//! Initial lexicon and ontology from telegraphic findings
//! (`Harnblase leer.`): noun, adjective, full stop.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotation::{leaf_tokens, Document, LeafToken};
use crate::morph::Pos;
use crate::postag::UNKNOWN;
use crate::sem::POS_ATTR;
use crate::structure::IP;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub noun: String,
    pub adjective: String,
    pub document: usize,
    /// Sentence index within its document.
    pub sentence: usize,
}

/// Syntactic classes of a leaf token; empty for bare words.
fn classes<'a>(t: &LeafToken<'a>) -> Vec<&'a str> {
    let Some(e) = t.element() else { return Vec::new() };
    let mut v = alloc::vec![e.attr(POS_ATTR).unwrap_or(e.name())];
    if let Some(alt) = e.attr("ALT") {
        v.extend(alt.split(',').filter(|a| !a.contains(':')));
    }
    v
}

fn unknown(cs: &[&str]) -> bool {
    cs.is_empty() || cs[0] == UNKNOWN
}

fn noun_slot(t: &LeafToken) -> bool {
    let cs = classes(t);
    cs.contains(&"N") || (unknown(&cs) && t.text().chars().next().is_some_and(char::is_uppercase))
}

fn adjective_slot(t: &LeafToken) -> bool {
    let cs = classes(t);
    cs.contains(&"ADJ") || (unknown(&cs) && t.text().chars().next().is_some_and(char::is_lowercase))
}

fn full_stop(t: &LeafToken) -> bool {
    classes(t).contains(&IP) && t.text() == "."
}

/// Sentences of exactly noun, adjective and full stop. Unknown tokens fill
/// the noun slot when capitalized and the adjective slot when lowercase.
pub fn detect_findings(corpus: &[Document]) -> Vec<Finding> {
    let mut out = Vec::new();
    for (d, doc) in corpus.iter().enumerate() {
        for (s, sentence) in doc.sentences().into_iter().enumerate() {
            let toks = leaf_tokens(sentence);
            if let [n, a, stop] = toks.as_slice() {
                if noun_slot(n) && adjective_slot(a) && full_stop(stop) {
                    out.push(Finding {
                        noun: n.text(),
                        adjective: a.text(),
                        document: d,
                        sentence: s,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedEntry {
    pub surface: String,
    pub pos: Pos,
    pub frequency: usize,
}

impl InducedEntry {
    /// A morph lexicon line with open features, flagged as candidate.
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t-\t_\tcandidate=yes\tfreq={}", self.surface, self.pos, self.frequency)
    }
}

/// One noun and one adjective candidate per distinct word, in order of
/// first appearance.
pub fn induce_lexicon(findings: &[Finding]) -> Vec<InducedEntry> {
    let mut out: Vec<InducedEntry> = Vec::new();
    for f in findings {
        for (surface, pos) in [(&f.noun, Pos::N), (&f.adjective, Pos::Adj)] {
            match out.iter_mut().find(|e| &e.surface == surface && e.pos == pos) {
                Some(e) => e.frequency += 1,
                None => out.push(InducedEntry {
                    surface: surface.clone(),
                    pos,
                    frequency: 1,
                }),
            }
        }
    }
    out
}

pub fn lexicon_text(entries: &[InducedEntry]) -> String {
    entries.iter().map(|e| e.to_line() + "\n").collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptCandidate {
    pub name: String,
    pub values: BTreeSet<String>,
    pub frequency: usize,
}

impl ConceptCandidate {
    pub fn new<I, S>(name: &str, values: I) -> ConceptCandidate
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ConceptCandidate {
            name: name.to_string(),
            values: values.into_iter().map(Into::into).collect(),
            frequency: 1,
        }
    }
}

/// Concept candidates (nouns) with the adjectives reported for them.
pub fn concept_candidates(findings: &[Finding]) -> Vec<ConceptCandidate> {
    let mut by_name: BTreeMap<&str, ConceptCandidate> = BTreeMap::new();
    for f in findings {
        let c = by_name.entry(&f.noun).or_insert_with(|| ConceptCandidate {
            name: f.noun.clone(),
            values: BTreeSet::new(),
            frequency: 0,
        });
        c.values.insert(f.adjective.clone());
        c.frequency += 1;
    }
    by_name.into_values().collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub id: usize,
    /// Sorted member names.
    pub members: Vec<String>,
    /// Values shared by all members.
    pub shared: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InducedOntology {
    pub clusters: Vec<Cluster>,
}

impl InducedOntology {
    /// Lines of `id <TAB> members <TAB> shared values`, lists comma separated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.clusters {
            let shared: Vec<&str> = c.shared.iter().map(String::as_str).collect();
            s.push_str(&format!("{}\t{}\t{}\n", c.id, c.members.join(","), shared.join(",")));
        }
        s
    }

    pub fn cluster_of(&self, name: &str) -> Option<usize> {
        self.clusters.iter().find(|c| c.members.iter().any(|m| m == name)).map(|c| c.id)
    }
}

struct Group {
    members: Vec<String>,
    values: BTreeSet<String>,
    shared: BTreeSet<String>,
}

/// Greedy agglomerative clustering by Jaccard similarity of the groups'
/// value sets. The most similar pair merges first, ties going to the
/// lexicographically smallest pair, until no pair reaches `threshold`
/// (clamped to `[0, 1]`).
pub fn cluster_concepts(candidates: &[ConceptCandidate], threshold: f64) -> InducedOntology {
    let threshold = if threshold.is_nan() { 1.0 } else { threshold.clamp(0.0, 1.0) };
    let mut merged: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for c in candidates {
        merged.entry(&c.name).or_default().extend(c.values.iter().cloned());
    }
    let mut groups: Vec<Group> = merged
        .into_iter()
        .map(|(n, v)| Group {
            members: alloc::vec![n.to_string()],
            shared: v.clone(),
            values: v,
        })
        .collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let sim = jaccard(&groups[i].values, &groups[j].values);
                if best.is_none_or(|(b, _, _)| sim > b) {
                    best = Some((sim, i, j));
                }
            }
        }
        match best {
            Some((sim, i, j)) if sim >= threshold => {
                let g = groups.remove(j);
                let into = &mut groups[i];
                into.members.extend(g.members);
                into.members.sort();
                into.values.extend(g.values);
                into.shared = into.shared.intersection(&g.shared).cloned().collect();
                groups.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
            }
            _ => break,
        }
    }
    InducedOntology {
        clusters: groups
            .into_iter()
            .enumerate()
            .map(|(k, g)| Cluster {
                id: k + 1,
                members: g.members,
                shared: g.shared,
            })
            .collect(),
    }
}
