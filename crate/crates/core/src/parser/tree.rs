//! Parse trees with features refined top-down.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::chart::{solve, Chart, EdgeId, EdgeKind};
use super::grammar::Grammar;
use crate::features::{Dim, FeatureSet};
use crate::postag::UNKNOWN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub cat: String,
    pub start: usize,
    pub end: usize,
    /// Feature values after propagating the mother's constraints down.
    pub features: FeatureSet,
    pub rule: Option<usize>,
    pub children: Vec<ParseNode>,
    /// For leaves: the token index.
    pub token: Option<usize>,
    /// For unknown-token leaves: the class assumed by the rule.
    pub assumed: Option<String>,
    /// Feature dimensions printed for this node.
    pub show: Vec<Dim>,
}

impl ParseNode {
    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    /// Leaves in order.
    pub fn leaves(&self) -> Vec<&ParseNode> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(n) = stack.pop() {
            if n.is_leaf() {
                out.push(n);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    pub fn span_sum(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            (self.end - self.start) + self.children.iter().map(ParseNode::span_sum).sum::<usize>()
        }
    }

    /// Structural form independent of features, e.g.
    /// `(NP3 DETI@0 XXX@1=ADJ N@2)`.
    pub fn canonical(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        self.write_canonical(grammar, &mut out);
        out
    }

    fn write_canonical(&self, grammar: &Grammar, out: &mut String) {
        match (self.token, self.rule) {
            (Some(t), _) => {
                out.push_str(&format!("{}@{}", self.cat, t));
                if let Some(a) = &self.assumed {
                    out.push('=');
                    out.push_str(a);
                }
            }
            (None, Some(r)) => {
                out.push('(');
                out.push_str(&grammar.rules[r].id);
                for c in &self.children {
                    out.push(' ');
                    c.write_canonical(grammar, out);
                }
                out.push(')');
            }
            (None, None) => out.push('?'),
        }
    }
}

/// Builds the tree of an edge, refining features from the top: the root
/// keeps its edge features, each daughter gets the value its mother's
/// equations allow under the mother's refined value.
pub fn build_tree(chart: &Chart, grammar: &Grammar, edge: EdgeId) -> ParseNode {
    let e = &chart.edges[edge];
    let show = e.rule().map(|r| grammar.rules[r].show.clone()).unwrap_or_default();
    build(chart, grammar, edge, e.features, None, show)
}

fn build(chart: &Chart, grammar: &Grammar, edge: EdgeId, ctx: FeatureSet, assumed: Option<String>, show: Vec<Dim>) -> ParseNode {
    let e = &chart.edges[edge];
    match &e.kind {
        EdgeKind::Leaf { token } => ParseNode {
            cat: e.cat.clone(),
            start: e.start,
            end: e.end,
            features: ctx,
            rule: None,
            children: Vec::new(),
            token: Some(*token),
            assumed: if e.cat == UNKNOWN { assumed } else { None },
            show,
        },
        EdgeKind::Rule { rule, daughters } => {
            let r = &grammar.rules[*rule];
            let feats: Vec<FeatureSet> = daughters.iter().map(|&d| chart.edges[d].features).collect();
            let sol = solve(r, ctx, &feats)
                .or_else(|| solve(r, FeatureSet::ALL, &feats))
                .expect("edge features satisfy their rule");
            let children = daughters
                .iter()
                .zip(&r.rhs)
                .zip(&sol.daughters)
                .map(|((&d, c), &f)| {
                    let de = &chart.edges[d];
                    let (assumed, show) = if de.is_leaf() {
                        (Some(String::from(c.assumed_class())), c.show.clone())
                    } else {
                        (None, grammar.rules[de.rule().unwrap()].show.clone())
                    };
                    build(chart, grammar, d, f, assumed, show)
                })
                .collect();
            ParseNode {
                cat: e.cat.clone(),
                start: e.start,
                end: e.end,
                features: sol.lhs,
                rule: Some(*rule),
                children,
                token: None,
                assumed: None,
                show,
            }
        }
    }
}
