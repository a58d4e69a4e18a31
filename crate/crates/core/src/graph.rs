//! Weighted directed multigraph and degree-correlation bookkeeping.
//!
//! Parallel edges are stored once with an integer multiplicity. Every degree
//! and every correlation in the crate is multiplicity-weighted, so an edge of
//! weight `w` behaves exactly like `w` separate edge instances.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(format!("unknown direction {other:?} (expected `in` or `out`)")),
        }
    }
}

/// Multiplicity-weighted in- and out-degrees of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeView {
    pub out_degree: Vec<u64>,
    pub in_degree: Vec<u64>,
}

impl DegreeView {
    pub fn total_multiplicity(&self) -> u64 {
        self.out_degree.iter().sum()
    }
}

/// Directed multigraph on nodes `0..node_count`.
///
/// Edges are kept sorted by `(source, target)` with one entry per ordered
/// pair. Self-loops are rejected. The graph is immutable once built; the
/// rewiring code works on an edge-instance list and builds a new graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedMultigraph {
    node_count: usize,
    edges: Vec<Edge>,
    degrees: DegreeView,
    // CSR over in-neighbors: in_offsets[i]..in_offsets[i + 1] indexes in_adj
    in_offsets: Vec<usize>,
    in_adj: Vec<(usize, u32)>,
}

impl DirectedMultigraph {
    pub fn empty(node_count: usize) -> Self {
        Self::from_sorted(node_count, Vec::new())
    }

    /// Builds a graph from `(source, target, weight)` triples. Repeated pairs
    /// are merged by summing their weights.
    pub fn from_weighted_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut merged: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (source, target, weight) in edges {
            if source >= node_count || target >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {source}->{target} out of range for {node_count} nodes"
                )));
            }
            if source == target {
                return Err(Error::InvalidGraph(format!("self-loop at node {source}")));
            }
            if weight == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {source}->{target} has zero weight"
                )));
            }
            let slot = merged.entry((source, target)).or_insert(0);
            *slot = slot.checked_add(weight).ok_or_else(|| {
                Error::InvalidGraph(format!("weight overflow on {source}->{target}"))
            })?;
        }
        let edges = merged
            .into_iter()
            .map(|((source, target), weight)| Edge { source, target, weight })
            .collect();
        Ok(Self::from_sorted(node_count, edges))
    }

    /// Builds a graph from individual edge instances; each instance adds one
    /// unit of weight to its pair.
    pub fn from_instances<I>(node_count: usize, instances: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_weighted_edges(node_count, instances.into_iter().map(|(s, t)| (s, t, 1)))
    }

    fn from_sorted(node_count: usize, edges: Vec<Edge>) -> Self {
        let mut out_degree = vec![0u64; node_count];
        let mut in_degree = vec![0u64; node_count];
        let mut in_count = vec![0usize; node_count];
        for e in &edges {
            out_degree[e.source] += u64::from(e.weight);
            in_degree[e.target] += u64::from(e.weight);
            in_count[e.target] += 1;
        }
        let mut in_offsets = Vec::with_capacity(node_count + 1);
        in_offsets.push(0);
        for c in &in_count {
            in_offsets.push(in_offsets.last().unwrap() + c);
        }
        let mut cursor = in_offsets[..node_count].to_vec();
        let mut in_adj = vec![(0usize, 0u32); edges.len()];
        for e in &edges {
            in_adj[cursor[e.target]] = (e.source, e.weight);
            cursor[e.target] += 1;
        }
        Self {
            node_count,
            edges,
            degrees: DegreeView { out_degree, in_degree },
            in_offsets,
            in_adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Distinct `(source, target)` pairs, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sum of all edge weights (number of edge instances).
    pub fn total_weight(&self) -> u64 {
        self.degrees.total_multiplicity()
    }

    pub fn degrees(&self) -> &DegreeView {
        &self.degrees
    }

    pub fn degree_sequence(&self, direction: Direction) -> Vec<u64> {
        match direction {
            Direction::Out => self.degrees.out_degree.clone(),
            Direction::In => self.degrees.in_degree.clone(),
        }
    }

    pub fn out_degree(&self, node: usize) -> u64 {
        self.degrees.out_degree[node]
    }

    pub fn in_degree(&self, node: usize) -> u64 {
        self.degrees.in_degree[node]
    }

    /// In-neighbors of `node` with their edge multiplicities.
    pub fn in_neighbors(&self, node: usize) -> &[(usize, u32)] {
        &self.in_adj[self.in_offsets[node]..self.in_offsets[node + 1]]
    }

    /// Expands every edge into `weight` copies of `(source, target)`.
    pub fn edge_instances(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.total_weight() as usize);
        for e in &self.edges {
            for _ in 0..e.weight {
                out.push((e.source, e.target));
            }
        }
        out
    }

    pub fn assortativity(&self) -> Result<f64> {
        AssortativitySums::from_graph(self).coefficient()
    }

    pub fn write_edge_list<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        w.write_record(["source", "target", "weight"])?;
        for e in &self.edges {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_edge_list(std::io::BufWriter::new(file))
    }

    /// Reads a `source,target,weight` CSV. Without an explicit `node_count`
    /// the graph spans `0..=max id`.
    pub fn read_edge_list<R: Read>(reader: R, node_count: Option<usize>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["source", "target", "weight"] {
            return Err(Error::InvalidGraph(format!(
                "expected header source,target,weight, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut triples = Vec::new();
        for row in rdr.deserialize() {
            let e: Edge = row?;
            triples.push((e.source, e.target, e.weight));
        }
        let inferred = triples
            .iter()
            .map(|&(s, t, _)| s.max(t) + 1)
            .max()
            .unwrap_or(0);
        let n = match node_count {
            Some(n) => n,
            None => inferred,
        };
        Self::from_weighted_edges(n, triples)
    }

    pub fn load_edge_list(path: impl AsRef<Path>, node_count: Option<usize>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(file), node_count)
    }
}

/// Exact integer moment sums over the edge multiset, pairing
/// `x = out_degree(source)` with `y = out_degree(target)`.
///
/// Degree-preserving swaps leave every sum except `sum_xy` unchanged, which
/// is what lets the rewiring loop track `r` incrementally without drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssortativitySums {
    pub m: i128,
    pub sum_x: i128,
    pub sum_y: i128,
    pub sum_xx: i128,
    pub sum_yy: i128,
    pub sum_xy: i128,
}

impl AssortativitySums {
    pub fn from_graph(graph: &DirectedMultigraph) -> Self {
        let out = &graph.degrees.out_degree;
        let mut s = Self { m: 0, sum_x: 0, sum_y: 0, sum_xx: 0, sum_yy: 0, sum_xy: 0 };
        for e in &graph.edges {
            let w = i128::from(e.weight);
            let x = out[e.source] as i128;
            let y = out[e.target] as i128;
            s.m += w;
            s.sum_x += w * x;
            s.sum_y += w * y;
            s.sum_xx += w * x * x;
            s.sum_yy += w * y * y;
            s.sum_xy += w * x * y;
        }
        s
    }

    /// `M·Σx² − (Σx)²` and its `y` counterpart; zero means no variance.
    pub fn variance_numerators(&self) -> (i128, i128) {
        (
            self.m * self.sum_xx - self.sum_x * self.sum_x,
            self.m * self.sum_yy - self.sum_y * self.sum_y,
        )
    }

    pub fn coefficient(&self) -> Result<f64> {
        if self.m == 0 {
            return Err(Error::DegenerateDegrees);
        }
        let (vx, vy) = self.variance_numerators();
        if vx <= 0 || vy <= 0 {
            return Err(Error::DegenerateDegrees);
        }
        let cov = self.m * self.sum_xy - self.sum_x * self.sum_y;
        let r = cov as f64 / ((vx as f64).sqrt() * (vy as f64).sqrt());
        Ok(r.clamp(-1.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_out_degrees() {
        let g = DirectedMultigraph::from_weighted_edges(2, [(0, 1, 3)]).unwrap();
        assert_eq!(g.degree_sequence(Direction::Out), vec![3, 0]);
        assert_eq!(g.degree_sequence(Direction::In), vec![0, 3]);
    }

    #[test]
    fn empty_graph_degrees() {
        let g = DirectedMultigraph::empty(3);
        assert_eq!(g.degree_sequence(Direction::Out), vec![0, 0, 0]);
        assert_eq!(g.degree_sequence(Direction::In), vec![0, 0, 0]);
        assert!(matches!(g.assortativity(), Err(Error::DegenerateDegrees)));
    }

    #[test]
    fn three_node_example_is_one_half() {
        // A->B, A->C, B->C: pairs (2,1), (2,0), (1,0)
        let g = DirectedMultigraph::from_instances(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let r = g.assortativity().unwrap();
        assert!((r - 0.5).abs() < 1e-15, "{r}");
    }

    #[test]
    fn regular_out_degree_is_degenerate() {
        let g = DirectedMultigraph::from_instances(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(g.assortativity(), Err(Error::DegenerateDegrees)));
    }

    #[test]
    fn doubling_weights_keeps_r() {
        let edges = [(0, 1, 1), (0, 2, 2), (1, 2, 1), (3, 0, 1), (3, 1, 1), (3, 2, 1)];
        let g1 = DirectedMultigraph::from_weighted_edges(4, edges).unwrap();
        let g2 = DirectedMultigraph::from_weighted_edges(4, edges.map(|(s, t, w)| (s, t, 2 * w)))
            .unwrap();
        assert_eq!(g1.assortativity().unwrap(), g2.assortativity().unwrap());
    }

    #[test]
    fn parallel_entries_merge() {
        let g = DirectedMultigraph::from_weighted_edges(3, [(0, 1, 1), (0, 1, 2), (1, 2, 1)])
            .unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.edges()[0], Edge { source: 0, target: 1, weight: 3 });
        assert_eq!(g.in_neighbors(1), &[(0, 3)]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(DirectedMultigraph::from_weighted_edges(2, [(0, 0, 1)]).is_err());
        assert!(DirectedMultigraph::from_weighted_edges(2, [(0, 2, 1)]).is_err());
        assert!(DirectedMultigraph::from_weighted_edges(2, [(0, 1, 0)]).is_err());
    }

    #[test]
    fn edge_list_csv_is_sorted() {
        let g = DirectedMultigraph::from_weighted_edges(3, [(2, 0, 1), (0, 2, 4), (0, 1, 1)])
            .unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "source,target,weight\n0,1,1\n0,2,4\n2,0,1\n");
        let back = DirectedMultigraph::read_edge_list(text.as_bytes(), None).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_rejects_wrong_header() {
        let text = "from,to,w\n0,1,1\n";
        assert!(DirectedMultigraph::read_edge_list(text.as_bytes(), None).is_err());
    }
}
