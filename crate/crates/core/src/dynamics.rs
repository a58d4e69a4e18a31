//! Heterogeneous linear-threshold opinion dynamics.
//!
//! Each agent holds a binary opinion and a threshold in `[0.5, 1]`. One pick
//! selects a uniformly random node, compares the multiplicity-weighted mean
//! opinion of its in-neighbors against the threshold and updates the node in
//! place. A sweep is `N` picks; absorption is checked at sweep boundaries.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedMultigraph;

pub const DEFAULT_MAX_SWEEPS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpinionState {
    opinions: Vec<u8>,
}

impl OpinionState {
    pub fn new(opinions: Vec<u8>) -> Result<Self> {
        if let Some(bad) = opinions.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidConfig(format!("opinion must be 0 or 1, got {bad}")));
        }
        Ok(Self { opinions })
    }

    pub fn uniform(n: usize, value: bool) -> Self {
        Self { opinions: vec![u8::from(value); n] }
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn get(&self, node: usize) -> u8 {
        self.opinions[node]
    }

    pub fn set(&mut self, node: usize, value: u8) {
        debug_assert!(value <= 1);
        self.opinions[node] = value;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.opinions
    }

    pub fn ones(&self) -> usize {
        self.opinions.iter().filter(|&&s| s == 1).count()
    }
}

/// Per-node thresholds, each one of the `n_th` evenly spaced levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdAssignment {
    n_th: usize,
    levels: Vec<usize>,
    thresholds: Vec<f64>,
}

impl ThresholdAssignment {
    /// Builds an assignment from level indices `0..n_th`.
    pub fn from_levels(n_th: usize, levels: Vec<usize>) -> Result<Self> {
        let set = threshold_set(n_th)?;
        if let Some(&bad) = levels.iter().find(|&&l| l >= n_th) {
            return Err(Error::InvalidConfig(format!("level {bad} out of range for n_th={n_th}")));
        }
        let thresholds = levels.iter().map(|&l| set[l]).collect();
        Ok(Self { n_th, levels, thresholds })
    }

    pub fn n_th(&self) -> usize {
        self.n_th
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn get(&self, node: usize) -> f64 {
        self.thresholds[node]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationRecord {
    pub t_f_sweeps: u64,
    pub t_f_picks: u64,
    pub s_bar: f64,
    pub absorbed: bool,
}

/// `{0.5 + 0.5·j/(n_th−1) : j = 0..n_th}`.
pub fn threshold_set(n_th: usize) -> Result<Vec<f64>> {
    if n_th < 2 {
        return Err(Error::InvalidLevels(n_th));
    }
    let span = (n_th - 1) as f64;
    Ok((0..n_th).map(|j| 0.5 + 0.5 * j as f64 / span).collect())
}

pub fn assign_thresholds<R: Rng + ?Sized>(
    n: usize,
    n_th: usize,
    rng: &mut R,
) -> Result<ThresholdAssignment> {
    if n_th < 2 {
        return Err(Error::InvalidLevels(n_th));
    }
    let levels = (0..n).map(|_| rng.random_range(0..n_th)).collect();
    ThresholdAssignment::from_levels(n_th, levels)
}

pub fn init_opinions<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<OpinionState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let opinions = (0..n).map(|_| u8::from(rng.random_bool(p))).collect();
    Ok(OpinionState { opinions })
}

pub fn neighbor_mean(graph: &DirectedMultigraph, state: &OpinionState, node: usize) -> Result<f64> {
    let in_degree = graph.in_degree(node);
    if in_degree == 0 {
        return Err(Error::NoInNeighbors(node));
    }
    let ones: u64 = graph
        .in_neighbors(node)
        .iter()
        .map(|&(j, w)| u64::from(w) * u64::from(state.get(j)))
        .sum();
    Ok(ones as f64 / in_degree as f64)
}

/// A 0 becomes 1 when `ō − s > φ`; a 1 becomes 0 when `ō − s < −φ`.
/// Both comparisons are strict.
pub fn flip_decision(s: u8, o_bar: f64, phi: f64) -> u8 {
    let diff = o_bar - f64::from(s);
    match s {
        0 if diff > phi => 1,
        1 if diff < -phi => 0,
        _ => s,
    }
}

/// [`flip_decision`] evaluated in integers. `ō = ones / in_degree` and the
/// threshold of level `j` out of `n_th` is `(n_th−1+j) / (2(n_th−1))`, so ties
/// at a level boundary are exact instead of depending on float rounding.
pub fn flip_decision_exact(s: u8, ones: u64, in_degree: u64, level: usize, n_th: usize) -> u8 {
    let span = (n_th - 1) as u128;
    let j = level as u128;
    let lhs = 2 * span * u128::from(ones);
    match s {
        // ones/deg > (span + j) / (2 span)
        0 if lhs > u128::from(in_degree) * (span + j) => 1,
        // ones/deg − 1 < −(span + j) / (2 span)
        1 if lhs < u128::from(in_degree) * (span - j) => 0,
        _ => s,
    }
}

/// The opinion `node` would take if picked now. Nodes without in-neighbors
/// keep their opinion.
pub fn next_opinion(
    graph: &DirectedMultigraph,
    state: &OpinionState,
    thresholds: &ThresholdAssignment,
    node: usize,
) -> u8 {
    let in_degree = graph.in_degree(node);
    if in_degree == 0 {
        return state.get(node);
    }
    let ones: u64 = graph
        .in_neighbors(node)
        .iter()
        .map(|&(j, w)| u64::from(w) * u64::from(state.get(j)))
        .sum();
    flip_decision_exact(
        state.get(node),
        ones,
        in_degree,
        thresholds.levels[node],
        thresholds.n_th,
    )
}

pub fn is_absorbed(
    graph: &DirectedMultigraph,
    state: &OpinionState,
    thresholds: &ThresholdAssignment,
) -> bool {
    (0..graph.node_count()).all(|i| next_opinion(graph, state, thresholds, i) == state.get(i))
}

pub fn mean_opinion(state: &OpinionState) -> Result<f64> {
    if state.is_empty() {
        return Err(Error::EmptyState);
    }
    Ok(state.ones() as f64 / state.len() as f64)
}

fn check_sizes(
    graph: &DirectedMultigraph,
    state: &OpinionState,
    thresholds: &ThresholdAssignment,
) -> Result<()> {
    let n = graph.node_count();
    if state.len() != n || thresholds.len() != n {
        return Err(Error::InvalidConfig(format!(
            "graph has {n} nodes but state has {} and thresholds {}",
            state.len(),
            thresholds.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyState);
    }
    Ok(())
}

/// Runs asynchronous updates in place until the state is absorbing or
/// `max_sweeps` sweeps have elapsed. Non-absorption is reported through
/// [`FixationRecord::absorbed`], not as an error.
pub fn run_to_fixation<R: Rng + ?Sized>(
    graph: &DirectedMultigraph,
    state: &mut OpinionState,
    thresholds: &ThresholdAssignment,
    max_sweeps: u64,
    rng: &mut R,
) -> Result<FixationRecord> {
    check_sizes(graph, state, thresholds)?;
    if max_sweeps == 0 {
        return Err(Error::InvalidConfig("max_sweeps must be >= 1".into()));
    }
    let n = graph.node_count();
    let mut sweeps = 0u64;
    let mut absorbed = is_absorbed(graph, state, thresholds);
    while !absorbed && sweeps < max_sweeps {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let next = next_opinion(graph, state, thresholds, i);
            state.set(i, next);
        }
        sweeps += 1;
        absorbed = is_absorbed(graph, state, thresholds);
    }
    Ok(FixationRecord {
        t_f_sweeps: sweeps,
        t_f_picks: sweeps * n as u64,
        s_bar: mean_opinion(state)?,
        absorbed,
    })
}
