//! Bottom-up agenda-driven chart parser.
//!
//! Every derivation gets its own edge; nothing is packed, so the complete
//! edges over the whole input are exactly the parse trees. An edge or dotted
//! item is registered in the chart when it leaves the agenda, which makes
//! each (dotted item, edge) pair meet exactly once.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::grammar::{Constituent, Grammar, GrammarRule};
use crate::features::{DimMask, FeatureSet};
use crate::postag::UNKNOWN;

pub type EdgeId = usize;

/// One input position with its readings. Unknown tokens have no readings
/// and yield a single `XXX` leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub readings: Vec<(String, FeatureSet)>,
    /// Tagged by a heuristic rather than the lexicon.
    pub heuristic: bool,
}

impl Token {
    pub fn unknown(text: impl Into<String>) -> Token {
        Token {
            text: text.into(),
            readings: Vec::new(),
            heuristic: false,
        }
    }

    pub fn new(text: impl Into<String>, readings: Vec<(String, FeatureSet)>) -> Token {
        Token {
            text: text.into(),
            readings,
            heuristic: false,
        }
    }

    pub fn is_unknown(&self) -> bool {
        self.readings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeKind {
    Leaf { token: usize },
    Rule { rule: usize, daughters: Vec<EdgeId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub start: usize,
    pub end: usize,
    pub cat: String,
    pub features: FeatureSet,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, EdgeKind::Leaf { .. })
    }

    pub fn rule(&self) -> Option<usize> {
        match self.kind {
            EdgeKind::Rule { rule, .. } => Some(rule),
            EdgeKind::Leaf { .. } => None,
        }
    }

    pub fn daughters(&self) -> &[EdgeId] {
        match &self.kind {
            EdgeKind::Rule { daughters, .. } => daughters,
            EdgeKind::Leaf { .. } => &[],
        }
    }
}

/// Feature values after agreement: the left-hand side and each daughter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub lhs: FeatureSet,
    pub daughters: Vec<FeatureSet>,
}

/// Solves a rule's feature equations. `lhs_ctx` is the value the mother is
/// already known to have (`FeatureSet::ALL` bottom-up). Each member starts as
/// its value intersected with its constants; every group value is the
/// intersection of its members projected onto the group's dimensions, and
/// members are narrowed by their groups until nothing changes.
pub fn solve(rule: &GrammarRule, lhs_ctx: FeatureSet, daughters: &[FeatureSet]) -> Option<Solution> {
    debug_assert_eq!(daughters.len(), rule.rhs.len());
    let mut lhs = lhs_ctx.intersect(rule.lhs_constants);
    let mut ds: Vec<FeatureSet> = daughters
        .iter()
        .zip(&rule.rhs)
        .map(|(d, c)| d.intersect(c.constants))
        .collect();
    if lhs.is_empty() || ds.iter().any(|d| d.is_empty()) {
        return None;
    }
    let names = rule.group_names();
    loop {
        let mut changed = false;
        for g in &names {
            let mut value = FeatureSet::ALL;
            for (n, dims) in &rule.lhs_groups {
                if n == g {
                    value = value.intersect(lhs.lift(*dims));
                }
            }
            for (d, c) in ds.iter().zip(&rule.rhs) {
                for (n, dims) in &c.groups {
                    if n == g {
                        value = value.intersect(d.lift(*dims));
                    }
                }
            }
            if value.is_empty() {
                return None;
            }
            let narrow = |x: &mut FeatureSet, dims: DimMask, changed: &mut bool| {
                let y = x.intersect(value.lift(dims));
                if y != *x {
                    *x = y;
                    *changed = true;
                }
            };
            for (n, dims) in &rule.lhs_groups {
                if n == g {
                    narrow(&mut lhs, *dims, &mut changed);
                }
            }
            for (d, c) in ds.iter_mut().zip(&rule.rhs) {
                for (n, dims) in &c.groups {
                    if n == g {
                        narrow(d, *dims, &mut changed);
                    }
                }
            }
        }
        if lhs.is_empty() || ds.iter().any(|d| d.is_empty()) {
            return None;
        }
        if !changed {
            return Some(Solution { lhs, daughters: ds });
        }
    }
}

#[derive(Debug, Clone)]
struct Active {
    rule: usize,
    start: usize,
    end: usize,
    daughters: Vec<EdgeId>,
}

enum Item {
    Passive(EdgeId),
    Active(usize),
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub n: usize,
    pub edges: Vec<Edge>,
    /// The edge limit was hit; the chart is incomplete.
    pub truncated: bool,
}

pub const DEFAULT_MAX_EDGES: usize = 200_000;

fn constituent_accepts(c: &Constituent, e: &Edge) -> bool {
    c.accepts(&e.cat) && !c.constants.intersect(e.features).is_empty()
}

impl Chart {
    pub fn build(tokens: &[Token], grammar: &Grammar, max_edges: usize) -> Chart {
        let mut chart = Chart {
            n: tokens.len(),
            edges: Vec::new(),
            truncated: false,
        };
        let mut actives: Vec<Active> = Vec::new();
        let mut agenda: VecDeque<Item> = VecDeque::new();
        let mut passive_at: Vec<Vec<EdgeId>> = vec![Vec::new(); tokens.len() + 1];
        let mut active_at: Vec<Vec<usize>> = vec![Vec::new(); tokens.len() + 1];

        for (i, t) in tokens.iter().enumerate() {
            if t.is_unknown() {
                chart.edges.push(Edge {
                    start: i,
                    end: i + 1,
                    cat: String::from(UNKNOWN),
                    features: FeatureSet::ALL,
                    kind: EdgeKind::Leaf { token: i },
                });
                agenda.push_back(Item::Passive(chart.edges.len() - 1));
            }
            for (cat, f) in &t.readings {
                if f.is_empty() {
                    continue;
                }
                chart.edges.push(Edge {
                    start: i,
                    end: i + 1,
                    cat: cat.clone(),
                    features: *f,
                    kind: EdgeKind::Leaf { token: i },
                });
                agenda.push_back(Item::Passive(chart.edges.len() - 1));
            }
        }

        while let Some(item) = agenda.pop_front() {
            let mut pairs: Vec<(Active, EdgeId)> = Vec::new();
            match item {
                Item::Passive(e) => {
                    let edge = &chart.edges[e];
                    passive_at[edge.start].push(e);
                    for &a in &active_at[edge.start] {
                        let act = &actives[a];
                        let c = &grammar.rules[act.rule].rhs[act.daughters.len()];
                        if constituent_accepts(c, edge) {
                            pairs.push((act.clone(), e));
                        }
                    }
                    for (r, rule) in grammar.rules.iter().enumerate() {
                        if constituent_accepts(&rule.rhs[0], edge) {
                            let seed = Active {
                                rule: r,
                                start: edge.start,
                                end: edge.start,
                                daughters: Vec::new(),
                            };
                            pairs.push((seed, e));
                        }
                    }
                }
                Item::Active(a) => {
                    let act = &actives[a];
                    active_at[act.end].push(a);
                    let c = &grammar.rules[act.rule].rhs[act.daughters.len()];
                    for &e in &passive_at[act.end] {
                        if constituent_accepts(c, &chart.edges[e]) {
                            pairs.push((act.clone(), e));
                        }
                    }
                }
            }
            for (act, e) in pairs {
                if chart.edges.len() + actives.len() >= max_edges {
                    chart.truncated = true;
                    return chart;
                }
                let mut daughters = act.daughters;
                daughters.push(e);
                let rule = &grammar.rules[act.rule];
                let feats: Vec<FeatureSet> = daughters.iter().map(|&d| chart.edges[d].features).collect();
                if daughters.len() < rule.rhs.len() {
                    if !partial_consistent(rule, &feats) {
                        continue;
                    }
                    actives.push(Active {
                        rule: act.rule,
                        start: act.start,
                        end: chart.edges[e].end,
                        daughters,
                    });
                    agenda.push_back(Item::Active(actives.len() - 1));
                    continue;
                }
                let Some(sol) = solve(rule, FeatureSet::ALL, &feats) else { continue };
                if daughters.len() == 1 && unary_cycle(&chart.edges, &rule.lhs, daughters[0]) {
                    continue;
                }
                chart.edges.push(Edge {
                    start: act.start,
                    end: chart.edges[e].end,
                    cat: rule.lhs.clone(),
                    features: sol.lhs,
                    kind: EdgeKind::Rule { rule: act.rule, daughters },
                });
                agenda.push_back(Item::Passive(chart.edges.len() - 1));
            }
        }
        chart
    }

    /// Edges of the given categories (any category for `None`) spanning the
    /// whole input, leaves excluded.
    pub fn complete_edges(&self, roots: Option<&[String]>) -> Vec<EdgeId> {
        (0..self.edges.len())
            .filter(|&i| {
                let e = &self.edges[i];
                !e.is_leaf() && e.start == 0 && e.end == self.n && roots.is_none_or(|r| r.contains(&e.cat))
            })
            .collect()
    }

    /// Sum of the span lengths of all rule nodes of the edge's tree.
    pub fn span_sum(&self, e: EdgeId) -> usize {
        let edge = &self.edges[e];
        match &edge.kind {
            EdgeKind::Leaf { .. } => 0,
            EdgeKind::Rule { daughters, .. } => (edge.end - edge.start) + daughters.iter().map(|&d| self.span_sum(d)).sum::<usize>(),
        }
    }
}

/// Necessary condition on a prefix of daughters: every group restricted to
/// the daughters seen so far is still non-empty.
fn partial_consistent(rule: &GrammarRule, prefix: &[FeatureSet]) -> bool {
    for g in rule.group_names() {
        let mut value = FeatureSet::ALL;
        for (d, c) in prefix.iter().zip(&rule.rhs) {
            let d = d.intersect(c.constants);
            for (n, dims) in &c.groups {
                if n == g {
                    value = value.intersect(d.lift(*dims));
                }
            }
        }
        if value.is_empty() {
            return false;
        }
    }
    true
}

/// Whether `cat` already occurs on the chain of single-daughter edges below
/// `daughter` (all of which cover the same span).
fn unary_cycle(edges: &[Edge], cat: &str, daughter: EdgeId) -> bool {
    let mut d = daughter;
    loop {
        let e = &edges[d];
        if e.cat == cat {
            return true;
        }
        match &e.kind {
            EdgeKind::Rule { daughters, .. } if daughters.len() == 1 => d = daughters[0],
            _ => return false,
        }
    }
}
