use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::tag::POS_ATTR;
use crate::annotation::{is_annotation_block, is_valid_name, leaf_tokens, Document, Element, LeafToken, Node};

/// One pattern position: a category (element name or `POS`), optionally
/// restricted to a semantic type. `*` matches any token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternItem {
    pub category: Option<String>,
    pub sem_type: Option<String>,
}

impl PatternItem {
    fn matches(&self, tok: &LeafToken) -> bool {
        let Some(e) = tok.element() else {
            return self.category.is_none() && self.sem_type.is_none();
        };
        let cat_ok = self
            .category
            .as_deref()
            .is_none_or(|c| e.name() == c || e.attr(POS_ATTR) == Some(c));
        let type_ok = self.sem_type.as_deref().is_none_or(|t| {
            e.attr("TYPE") == Some(t)
                || e.attr("ALT")
                    .is_some_and(|alt| alt.split(',').any(|r| r.split_once(':').is_some_and(|(_, rt)| rt == t)))
        });
        cat_ok && type_ok
    }
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.category.as_deref().unwrap_or("*"))?;
        if let Some(t) = &self.sem_type {
            write!(f, "[{}]", t)?;
        }
        Ok(())
    }
}

/// `NAME: ITEM... -> relation(i, j, ...)`, argument references counting
/// pattern items from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralRule {
    pub name: String,
    pub pattern: Vec<PatternItem>,
    pub relation: String,
    pub args: Vec<usize>,
}

impl fmt::Display for StructuralRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name)?;
        for it in &self.pattern {
            write!(f, " {}", it)?;
        }
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, " -> {}({})", self.relation, args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct RuleSyntaxError {
    pub line: usize,
    pub reason: String,
}

fn parse_item(t: &str) -> Option<PatternItem> {
    let (cat, ty) = match t.split_once('[') {
        Some((c, rest)) => (c, Some(rest.strip_suffix(']')?)),
        None => (t, None),
    };
    let category = match cat {
        "*" => None,
        c if is_valid_name(c) => Some(c.to_string()),
        _ => return None,
    };
    let sem_type = match ty {
        Some("") => return None,
        Some(t) => Some(t.to_string()),
        None => None,
    };
    Some(PatternItem { category, sem_type })
}

pub fn parse_structural_rules(text: &str) -> Result<Vec<StructuralRule>, RuleSyntaxError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |reason: String| RuleSyntaxError { line: i + 1, reason };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, rest) = line.split_once(':').ok_or_else(|| err(String::from("missing `NAME:`")))?;
        let (lhs, rhs) = rest.split_once("->").ok_or_else(|| err(String::from("missing `->`")))?;
        let pattern: Vec<PatternItem> = lhs
            .split_whitespace()
            .map(|t| parse_item(t).ok_or_else(|| err(format!("invalid pattern item `{}`", t))))
            .collect::<Result<_, _>>()?;
        if pattern.is_empty() {
            return Err(err(String::from("empty pattern")));
        }
        let rhs = rhs.trim();
        let open = rhs.find('(').ok_or_else(|| err(String::from("relation lacks arguments")))?;
        let inner = rhs[open + 1..].strip_suffix(')').ok_or_else(|| err(String::from("missing `)`")))?;
        let relation = rhs[..open].trim();
        if relation.is_empty() || relation.contains(char::is_whitespace) {
            return Err(err(String::from("invalid relation name")));
        }
        let args: Vec<usize> = inner
            .split(',')
            .map(|a| match a.trim().parse::<usize>() {
                Ok(n) if n >= 1 && n <= pattern.len() => Ok(n),
                _ => Err(err(format!("argument `{}` is not a pattern position", a.trim()))),
            })
            .collect::<Result<_, _>>()?;
        out.push(StructuralRule {
            name: name.trim().to_string(),
            pattern,
            relation: relation.to_string(),
            args,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub relation: String,
    pub args: Vec<String>,
    /// Token positions of the arguments within the sentence.
    pub positions: Vec<usize>,
    pub sentence: usize,
}

fn match_sentence(s: &Element, rules: &[StructuralRule], sentence: usize) -> Vec<RelationInstance> {
    let toks = leaf_tokens(s);
    let mut out = Vec::new();
    for rule in rules {
        let k = rule.pattern.len();
        for start in 0..toks.len().saturating_sub(k - 1) {
            if rule.pattern.iter().zip(&toks[start..start + k]).all(|(p, t)| p.matches(t)) {
                let positions: Vec<usize> = rule.args.iter().map(|a| start + a - 1).collect();
                out.push(RelationInstance {
                    relation: rule.relation.clone(),
                    args: positions.iter().map(|&p| toks[p].text()).collect(),
                    positions,
                    sentence,
                });
            }
        }
    }
    out
}

/// Applies the rules to every sentence, appends a `<REL>` element per match
/// to the sentence and returns the matches.
pub fn interpret_structure(mut doc: Document, rules: &[StructuralRule]) -> (Document, Vec<RelationInstance>) {
    let mut all = Vec::new();
    let mut sentence = 0;
    doc.for_each_sentence_mut(&mut |s| {
        let kept: Vec<Node> = s
            .take_children()
            .into_iter()
            .filter(|n| !matches!(n, Node::Element(e) if is_annotation_block(e) && e.name() == "REL"))
            .collect();
        s.set_children(kept);
        let found = match_sentence(s, rules, sentence);
        for r in &found {
            let mut e = Element::new("REL");
            e.set_attr("NAME", r.relation.as_str());
            for (i, a) in r.args.iter().enumerate() {
                e.set_attr(format!("ARG{}", i + 1), a.as_str());
            }
            s.push(e);
        }
        all.extend(found);
        sentence += 1;
    });
    (doc, all)
}
