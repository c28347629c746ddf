//! Importing reviewed lexicon candidates and checking lexicon files.

use anyhow::{anyhow, Result};
use xdoc_core::features::FeatureSet;
use xdoc_core::morph::{LexEntry, Lexicon};

/// Extras that only describe how a candidate was found.
const CANDIDATE_KEYS: &[&str] = &["candidate", "freq"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportSummary {
    pub added: usize,
    pub duplicates: usize,
}

fn same_entry(a: &LexEntry, b: &LexEntry) -> bool {
    a.root == b.root && a.pos == b.pos && a.paradigm == b.paradigm && a.features == b.features
}

/// Appends the candidate entries of `candidates` to `lexicon` (both file
/// contents), dropping candidate markers and entries already present.
pub fn import_candidates(lexicon: &str, candidates: &str) -> Result<(String, ImportSummary)> {
    let base = Lexicon::parse(lexicon).map_err(|e| anyhow!("lexicon: {}", e))?;
    let found = Lexicon::parse(candidates).map_err(|e| anyhow!("candidates: {}", e))?;
    let mut known: Vec<LexEntry> = base.entries().to_vec();
    let mut out = lexicon.to_string();
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    let mut summary = ImportSummary::default();
    for e in found.entries() {
        let mut e = e.clone();
        e.extra.retain(|(k, _)| !CANDIDATE_KEYS.contains(&k.as_str()));
        if known.iter().any(|k| same_entry(k, &e)) {
            summary.duplicates += 1;
            continue;
        }
        out.push_str(&e.to_line());
        out.push('\n');
        known.push(e);
        summary.added += 1;
    }
    let merged = Lexicon::parse(&out).map_err(|e| anyhow!("merged lexicon: {}", e))?;
    check(&merged)?;
    Ok((out, summary))
}

/// Fails when entries refer to undefined paradigms or claim features their
/// paradigm has no form for.
pub fn check(lex: &Lexicon) -> Result<()> {
    let mut problems: Vec<String> = lex
        .dangling_paradigms()
        .iter()
        .map(|e| format!("{}: undefined paradigm {}", e.root, e.paradigm.as_deref().unwrap_or("")))
        .collect();
    for e in lex.entries() {
        let Some(p) = e.paradigm.as_deref().and_then(|id| lex.paradigm(id)) else { continue };
        let realized = p.cells.iter().fold(FeatureSet::EMPTY, |acc, (_, f)| acc.union(*f));
        let missing = FeatureSet::from_bits(e.features.bits() & !realized.bits());
        if !missing.is_empty() {
            problems.push(format!("{}: no form for {}", e.root, missing));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("{}", problems.join("; ")))
    }
}
