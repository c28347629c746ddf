//! Minimal covers of an unparseable input by chart fragments.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::chart::{Chart, EdgeId};
use super::grammar::Grammar;
use super::tree::build_tree;

pub type Span = (usize, usize);

pub const DEFAULT_MAX_COVERS: usize = 64;

/// All tilings of `[0, n)` by the given spans (plus every single position)
/// that use the fewest fragments, leftmost-longest fragment first, at most
/// `cap` of them.
pub fn minimal_tilings(n: usize, spans: &BTreeSet<Span>, cap: usize) -> Vec<Vec<Span>> {
    let mut starting: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, e) in spans {
        if s < e && e <= n {
            starting[s].push(e);
        }
    }
    for (i, ends) in starting.iter_mut().enumerate() {
        ends.push(i + 1);
        ends.sort_unstable_by(|a, b| b.cmp(a));
        ends.dedup();
    }
    let mut best = vec![usize::MAX; n + 1];
    best[n] = 0;
    for i in (0..n).rev() {
        best[i] = starting[i].iter().map(|&e| best[e].saturating_add(1)).min().unwrap_or(usize::MAX);
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    enumerate(0, n, &starting, &best, cap, &mut current, &mut out);
    out
}

fn enumerate(
    at: usize,
    n: usize,
    starting: &[Vec<usize>],
    best: &[usize],
    cap: usize,
    current: &mut Vec<Span>,
    out: &mut Vec<Vec<Span>>,
) {
    if out.len() >= cap {
        return;
    }
    if at == n {
        out.push(current.clone());
        return;
    }
    for &e in &starting[at] {
        if best[e].saturating_add(1) == best[at] {
            current.push((at, e));
            enumerate(e, n, starting, best, cap, current, out);
            current.pop();
        }
    }
}

/// The edge standing for a span in a cover: rule edges before leaves, then
/// the flattest tree (smallest sum of node spans), then rule id, then tree
/// shape.
pub fn representatives(chart: &Chart, grammar: &Grammar) -> BTreeMap<Span, EdgeId> {
    let mut by_span: BTreeMap<Span, Vec<EdgeId>> = BTreeMap::new();
    for (i, e) in chart.edges.iter().enumerate() {
        by_span.entry((e.start, e.end)).or_default().push(i);
    }
    by_span
        .into_iter()
        .map(|(span, edges)| {
            let best = edges
                .into_iter()
                .min_by(|&a, &b| {
                    let ea = &chart.edges[a];
                    let eb = &chart.edges[b];
                    let id = |r: Option<usize>| r.map(|r| grammar.rules[r].id.as_str());
                    ea.is_leaf()
                        .cmp(&eb.is_leaf())
                        .then(chart.span_sum(a).cmp(&chart.span_sum(b)))
                        .then(id(ea.rule()).cmp(&id(eb.rule())))
                        .then_with(|| {
                            build_tree(chart, grammar, a)
                                .canonical(grammar)
                                .cmp(&build_tree(chart, grammar, b).canonical(grammar))
                        })
                        .then(a.cmp(&b))
                })
                .unwrap();
            (span, best)
        })
        .collect()
}

/// Minimal fragment covers of the chart's input as edge sequences.
pub fn partial_cover(chart: &Chart, grammar: &Grammar, cap: usize) -> Vec<Vec<EdgeId>> {
    let reps = representatives(chart, grammar);
    let spans: BTreeSet<Span> = reps.keys().copied().collect();
    minimal_tilings(chart.n, &spans, cap)
        .into_iter()
        .map(|t| t.into_iter().map(|s| reps[&s]).collect())
        .collect()
}
