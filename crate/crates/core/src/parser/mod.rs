//! Chart parsing of tagged sentences with feature agreement, assumptions
//! for unknown tokens and a minimal partial cover when no complete parse
//! exists.

mod chart;
mod cover;
mod grammar;
mod learn;
mod tree;

pub use chart::{solve, Chart, Edge, EdgeId, EdgeKind, Solution, Token, DEFAULT_MAX_EDGES};
pub use cover::{minimal_tilings, partial_cover, representatives, Span, DEFAULT_MAX_COVERS};
pub use grammar::{parse_module, parse_rule, Constituent, Grammar, GrammarError, GrammarModule, GrammarRule};
pub use learn::{derive_lexicon_updates, LexiconCandidate};
pub use tree::{build_tree, ParseNode};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotation::{from_pieces, into_pieces, is_annotation_block, Document, Element, Node, Piece};
use crate::postag::{token_readings, UNKNOWN};

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Categories accepted for complete parses; `None` accepts any phrase.
    pub roots: Option<Vec<String>>,
    pub max_edges: usize,
    pub max_covers: usize,
}

impl Default for ParseOptions {
    fn default() -> ParseOptions {
        ParseOptions {
            roots: None,
            max_edges: DEFAULT_MAX_EDGES,
            max_covers: DEFAULT_MAX_COVERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    /// Complete parses, flattest first (smallest sum of node spans), ties
    /// broken by tree shape.
    pub complete: Vec<ParseNode>,
    /// Minimal covers, only when there is no complete parse.
    pub partial_cover: Vec<Vec<ParseNode>>,
    pub truncated: bool,
}

pub fn parse(tokens: &[Token], grammar: &Grammar, opts: &ParseOptions) -> ParseResult {
    let chart = Chart::build(tokens, grammar, opts.max_edges);
    parse_chart(&chart, grammar, opts)
}

pub fn parse_chart(chart: &Chart, grammar: &Grammar, opts: &ParseOptions) -> ParseResult {
    let mut complete: Vec<(usize, String, ParseNode)> = chart
        .complete_edges(opts.roots.as_deref())
        .into_iter()
        .map(|e| {
            let t = build_tree(chart, grammar, e);
            (t.span_sum(), t.canonical(grammar), t)
        })
        .collect();
    complete.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let complete: Vec<ParseNode> = complete.into_iter().map(|(_, _, t)| t).collect();
    let partial = if complete.is_empty() && chart.n > 0 {
        partial_cover(chart, grammar, opts.max_covers)
            .into_iter()
            .map(|cover| cover.into_iter().map(|e| build_tree(chart, grammar, e)).collect())
            .collect()
    } else {
        Vec::new()
    };
    ParseResult {
        complete,
        partial_cover: partial,
        truncated: chart.truncated,
    }
}

/// A sentence split into parser tokens and the original material around
/// them.
struct SentenceLayout {
    tokens: Vec<Token>,
    /// Original token pieces (elements or bare words).
    originals: Vec<Piece>,
    /// `gaps[k]`: whitespace before token `k`; `gaps[n]`: after the last.
    gaps: Vec<String>,
    /// Annotation blocks, kept at the end of the sentence.
    blocks: Vec<Element>,
}

fn layout(sentence: &Element) -> SentenceLayout {
    let mut l = SentenceLayout {
        tokens: Vec::new(),
        originals: Vec::new(),
        gaps: alloc::vec![String::new()],
        blocks: Vec::new(),
    };
    for p in into_pieces(sentence.children().to_vec()) {
        match p {
            Piece::Space(s) => l.gaps.last_mut().unwrap().push_str(&s),
            Piece::Element(e) if is_annotation_block(&e) => l.blocks.push(e),
            p => {
                let token = match &p {
                    Piece::Element(e) if e.name() != UNKNOWN => {
                        let mut t = Token::new(e.text_content(), token_readings(e));
                        t.heuristic = e.has_attr("SRC");
                        t
                    }
                    other => Token::unknown(piece_text(other)),
                };
                l.tokens.push(token);
                l.originals.push(p);
                l.gaps.push(String::new());
            }
        }
    }
    l
}

fn piece_text(p: &Piece) -> String {
    match p {
        Piece::Space(s) | Piece::Word(s) => s.clone(),
        Piece::Element(e) => e.text_content(),
    }
}

fn leaf_element(l: &SentenceLayout, node: &ParseNode) -> Element {
    let i = node.token.expect("leaf node");
    let mut e = match &l.originals[i] {
        Piece::Element(e) => e.clone(),
        other => Element::with_text(UNKNOWN, piece_text(other)),
    };
    if e.name() == UNKNOWN {
        if let Some(a) = &node.assumed {
            e.set_attr("AS", a.as_str());
        }
    } else {
        e.rename(node.cat.as_str()).expect("categories are valid names");
    }
    e.remove_attr("ALT");
    e.remove_attr("MORPH");
    for d in &node.show {
        e.set_attr(d.as_str(), node.features.render_dim(*d));
    }
    e
}

fn render(l: &SentenceLayout, grammar: &Grammar, node: &ParseNode) -> Element {
    if node.is_leaf() {
        return leaf_element(l, node);
    }
    let rule = &grammar.rules[node.rule.expect("phrase node")];
    let mut e = Element::new(node.cat.as_str());
    for (k, v) in &rule.attrs {
        e.set_attr(k.as_str(), v.as_str());
    }
    if !rule.norule {
        e.set_attr("RULE", rule.id.as_str());
    }
    for d in &node.show {
        e.set_attr(d.as_str(), node.features.render_dim(*d));
    }
    for (k, c) in node.children.iter().enumerate() {
        if k > 0 {
            e.push_text(l.gaps[c.start].as_str());
        }
        e.push(render(l, grammar, c));
    }
    e
}

/// Parses one sentence element in place and returns its parse result.
/// Sentences that already carry a parse are left alone.
pub fn parse_sentence(sentence: &mut Element, grammar: &Grammar, opts: &ParseOptions) -> Option<(ParseResult, Vec<Token>)> {
    if sentence.has_attr("PARSES") || sentence.has_attr("COVER") {
        return None;
    }
    let l = layout(sentence);
    if l.tokens.is_empty() {
        return None;
    }
    let result = parse(&l.tokens, grammar, opts);
    let mut children: Vec<Piece> = Vec::new();
    children.push(Piece::Space(l.gaps[0].clone()));
    if let Some(tree) = result.complete.first() {
        children.push(Piece::Element(render(&l, grammar, tree)));
        sentence.set_attr("PARSES", result.complete.len().to_string());
    } else {
        let cover = &result.partial_cover[0];
        for (k, frag) in cover.iter().enumerate() {
            if k > 0 {
                children.push(Piece::Space(l.gaps[frag.start].clone()));
            }
            let el = if frag.is_leaf() {
                match &l.originals[frag.token.unwrap()] {
                    Piece::Element(e) => e.clone(),
                    other => Element::with_text(UNKNOWN, piece_text(other)),
                }
            } else {
                render(&l, grammar, frag)
            };
            children.push(Piece::Element(el));
        }
        sentence.set_attr("COVER", "partial");
        sentence.set_attr("FRAGMENTS", cover.len().to_string());
    }
    if result.truncated {
        sentence.set_attr("TRUNCATED", "yes");
    }
    children.push(Piece::Space(l.gaps[l.tokens.len()].clone()));
    let mut nodes = from_pieces(children);
    nodes.extend(l.blocks.iter().cloned().map(Node::Element));
    sentence.set_children(nodes);
    Some((result, l.tokens))
}

/// Parses every sentence; returns the document and the lexicon candidates
/// derived from complete parses.
pub fn parse_document(mut doc: Document, grammar: &Grammar, opts: &ParseOptions) -> (Document, Vec<LexiconCandidate>) {
    let mut candidates: Vec<LexiconCandidate> = Vec::new();
    doc.for_each_sentence_mut(&mut |s| {
        if let Some((result, tokens)) = parse_sentence(s, grammar, opts) {
            for c in derive_lexicon_updates(&result, &tokens) {
                if !candidates.contains(&c) {
                    candidates.push(c);
                }
            }
        }
    });
    (doc, candidates)
}
