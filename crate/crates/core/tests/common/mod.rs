//! Independent oracles shared by the integration tests. None of these go
//! through the library's own degree bookkeeping or float comparisons.
#![allow(dead_code)]

use consensus_core::dynamics::{OpinionState, ThresholdAssignment};
use consensus_core::DirectedMultigraph;
use proptest::prelude::*;

/// Textbook Pearson correlation on explicit samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx.sqrt() * syy.sqrt()))
    }
}

/// Out-degrees recounted from raw `(source, target, weight)` triples.
pub fn out_degrees(n: usize, edges: &[(usize, usize, u32)]) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for &(s, _, w) in edges {
        d[s] += w as f64;
    }
    d
}

/// Expands each edge into `weight` samples of (out(source), out(target)).
pub fn brute_assortativity(n: usize, edges: &[(usize, usize, u32)]) -> Option<f64> {
    let d = out_degrees(n, edges);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(s, t, w) in edges {
        for _ in 0..w {
            xs.push(d[s]);
            ys.push(d[t]);
        }
    }
    if xs.is_empty() {
        return None;
    }
    pearson(&xs, &ys)
}

pub fn triples(g: &DirectedMultigraph) -> Vec<(usize, usize, u32)> {
    g.edges().iter().map(|e| (e.source, e.target, e.weight)).collect()
}

/// Would `node` flip? Decided with exact integer arithmetic from the edge
/// list: threshold level j of L is (L-1+j) / (2(L-1)).
pub fn would_flip_exact(
    n_th: usize,
    edges: &[(usize, usize, u32)],
    opinions: &[u8],
    levels: &[usize],
    node: usize,
) -> bool {
    let mut ones = 0u64;
    let mut deg = 0u64;
    for &(s, t, w) in edges {
        if t == node {
            deg += w as u64;
            ones += w as u64 * opinions[s] as u64;
        }
    }
    if deg == 0 {
        return false;
    }
    let span = (n_th - 1) as u64;
    let j = levels[node] as u64;
    if opinions[node] == 0 {
        2 * span * ones > deg * (span + j)
    } else {
        2 * span * ones < deg * (span - j)
    }
}

pub fn absorbed_exact(
    n_th: usize,
    edges: &[(usize, usize, u32)],
    opinions: &[u8],
    levels: &[usize],
) -> bool {
    (0..opinions.len()).all(|i| !would_flip_exact(n_th, edges, opinions, levels, i))
}

/// Random loop-free multigraph on `2..=max_n` nodes.
pub fn arb_multigraph(max_n: usize, max_edges: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, u32)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let edge = (0..n, 0..n, 1u32..4).prop_filter("no self-loops", |(s, t, _)| s != t);
        (Just(n), prop::collection::vec(edge, 0..=max_edges))
    })
}

/// Graph plus matching opinions and threshold levels.
pub fn arb_instance(
    max_n: usize,
    max_edges: usize,
) -> impl Strategy<Value = (usize, Vec<(usize, usize, u32)>, usize, Vec<u8>, Vec<usize>)> {
    (arb_multigraph(max_n, max_edges), 2usize..8).prop_flat_map(|((n, edges), n_th)| {
        (
            Just(n),
            Just(edges),
            Just(n_th),
            prop::collection::vec(0u8..=1, n),
            prop::collection::vec(0..n_th, n),
        )
    })
}

pub fn build_instance(
    n: usize,
    edges: &[(usize, usize, u32)],
    n_th: usize,
    opinions: &[u8],
    levels: &[usize],
) -> (DirectedMultigraph, OpinionState, ThresholdAssignment) {
    (
        DirectedMultigraph::from_weighted_edges(n, edges.iter().copied()).unwrap(),
        OpinionState::new(opinions.to_vec()).unwrap(),
        ThresholdAssignment::from_levels(n_th, levels.to_vec()).unwrap(),
    )
}
