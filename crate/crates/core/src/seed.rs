//! Built-in seed resources for German clinical and technical text.

use alloc::vec::Vec;

use crate::morph::Lexicon;
use crate::parser::{parse_module, Grammar, GrammarModule};
use crate::postag::{parse_heuristics, Heuristic};
use crate::sem::{parse_structural_rules, SemLexicon, StructuralRule};
use crate::structure::{parse_patterns, AbbreviationLexicon, StructureConfig, TokenPattern};

pub const LEXICON: &str = include_str!("../resources/seed.lex");
pub const HEURISTICS: &str = include_str!("../resources/seed.heur");
pub const ADJECTIVE_HEURISTICS: &str = include_str!("../resources/adjective.heur");
pub const ABBREVIATIONS: &str = include_str!("../resources/abbrev.txt");
pub const CASTING_PATTERNS: &str = include_str!("../resources/casting.pat");
pub const CORE_GRAMMAR: &str = include_str!("../resources/core.gr");
pub const NP_EXTRA_GRAMMAR: &str = include_str!("../resources/np-extra.gr");
pub const TELEGRAPHIC_GRAMMAR: &str = include_str!("../resources/telegraphic.gr");
pub const SEMANTIC_LEXICON: &str = include_str!("../resources/seed.sem");
pub const STRUCTURAL_RULES: &str = include_str!("../resources/seed.rules");

pub fn lexicon() -> Lexicon {
    Lexicon::parse(LEXICON).expect("seed lexicon is well-formed")
}

pub fn heuristics() -> Vec<Heuristic> {
    parse_heuristics(HEURISTICS).expect("seed heuristics are well-formed")
}

pub fn abbreviations() -> AbbreviationLexicon {
    AbbreviationLexicon::parse(ABBREVIATIONS).expect("seed abbreviations are well-formed")
}

pub fn casting_patterns() -> Vec<TokenPattern> {
    parse_patterns(CASTING_PATTERNS).expect("casting patterns are well-formed")
}

pub fn grammar_module(name: &str) -> Option<GrammarModule> {
    let text = match name {
        "core" => CORE_GRAMMAR,
        "np-extra" => NP_EXTRA_GRAMMAR,
        "telegraphic" => TELEGRAPHIC_GRAMMAR,
        _ => return None,
    };
    Some(parse_module(name, text).expect("seed grammar is well-formed"))
}

/// Union of the named seed grammar modules.
pub fn grammar(modules: &[&str]) -> Grammar {
    let mods: Vec<GrammarModule> = modules
        .iter()
        .map(|m| grammar_module(m).unwrap_or_else(|| panic!("no seed grammar module `{}`", m)))
        .collect();
    Grammar::from_modules(&mods).expect("seed grammar modules are compatible")
}

pub fn semantic_lexicon() -> SemLexicon {
    SemLexicon::parse(SEMANTIC_LEXICON).expect("seed semantic lexicon is well-formed")
}

pub fn structural_rules() -> Vec<StructuralRule> {
    parse_structural_rules(STRUCTURAL_RULES).expect("seed structural rules are well-formed")
}

/// Default terminals plus the seed abbreviation lexicon, no patterns.
pub fn structure_config() -> StructureConfig {
    StructureConfig {
        abbreviations: abbreviations(),
        ..StructureConfig::default()
    }
}
