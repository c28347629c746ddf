//! Lexicon candidates from successful parses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::chart::Token;
use super::ParseResult;
use crate::features::FeatureSet;
use crate::morph::Pos;
use crate::postag::UNKNOWN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconCandidate {
    pub surface: String,
    pub pos: Pos,
    pub features: FeatureSet,
}

impl LexiconCandidate {
    /// A lexicon line flagged as candidate; it is never loaded implicitly.
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t-\t{}\tcandidate=yes", self.surface, self.pos, self.features)
    }
}

/// Classes assumed for unknown tokens, and heuristic tokens whose features
/// became fully specified, over all complete parses.
pub fn derive_lexicon_updates(result: &ParseResult, tokens: &[Token]) -> Vec<LexiconCandidate> {
    let mut out: Vec<LexiconCandidate> = Vec::new();
    for tree in &result.complete {
        for leaf in tree.leaves() {
            let Some(t) = leaf.token.and_then(|i| tokens.get(i)) else { continue };
            let class = if leaf.cat == UNKNOWN {
                leaf.assumed.as_deref()
            } else if t.heuristic && leaf.features.is_singleton() {
                Some(leaf.cat.as_str())
            } else {
                None
            };
            let Some(pos) = class.and_then(Pos::parse) else { continue };
            let c = LexiconCandidate {
                surface: t.text.clone(),
                pos,
                features: leaf.features,
            };
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}
