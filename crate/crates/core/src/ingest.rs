//! Conversation dumps to influence networks.
//!
//! A dump is a set of posts and comments linked by `parent_id`. Every
//! commenter is taken to follow each distinct author on the chain of
//! contents above its own comment, so influence edges point from those
//! ancestors to the commenter. Siblings never influence each other.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedMultigraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentRecord {
    pub id: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    pub author: String,
    pub created_utc: i64,
    #[serde(default)]
    pub polarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeNode {
    pub record: ContentRecord,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// One cascade stored as an arena in pre-order; index 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTree {
    pub nodes: Vec<CascadeNode>,
    /// The root names a parent that is not in the dump.
    pub orphaned: bool,
}

impl CascadeTree {
    pub fn root(&self) -> &ContentRecord {
        &self.nodes[0].record
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of levels; a lone root has depth 1.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            depth[i] = node.parent.map_or(1, |p| depth[p] + 1);
            max = max.max(depth[i]);
        }
        max
    }

    /// Records in pre-order.
    pub fn records(&self) -> impl Iterator<Item = &ContentRecord> {
        self.nodes.iter().map(|n| &n.record)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CascadeForest {
    pub trees: Vec<CascadeTree>,
}

impl CascadeForest {
    pub fn record_count(&self) -> usize {
        self.trees.iter().map(CascadeTree::len).sum()
    }

    /// The `k` largest cascades by record count; ties keep forest order.
    pub fn largest(&self, k: usize) -> Vec<&CascadeTree> {
        let mut order: Vec<&CascadeTree> = self.trees.iter().collect();
        order.sort_by_key(|t| std::cmp::Reverse(t.len()));
        order.truncate(k);
        order
    }
}

fn time_key(r: &ContentRecord) -> (i64, &str) {
    (r.created_utc, r.id.as_str())
}

/// Reads one JSON record per non-blank line.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<ContentRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ContentRecord = serde_json::from_str(&line).map_err(|e| {
            Error::MalformedRecord { line: idx + 1, reason: e.to_string() }
        })?;
        if let Some(p) = rec.polarity {
            if !(-1.0..=1.0).contains(&p) {
                return Err(Error::MalformedRecord {
                    line: idx + 1,
                    reason: format!("polarity {p} outside [-1, 1]"),
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Assembles records into trees by parent links.
///
/// Records whose parent is missing start their own tree, flagged as
/// orphaned. Roots and siblings are ordered by `(created_utc, id)`. Line
/// numbers in errors are 1-based positions in `records`.
pub fn parse_cascades(records: Vec<ContentRecord>) -> Result<CascadeForest> {
    let mut index: HashMap<String, usize> = HashMap::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if index.insert(r.id.clone(), i).is_some() {
            return Err(Error::DuplicateId { id: r.id.clone(), line: i + 1 });
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); records.len()];
    let mut roots: Vec<(usize, bool)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match r.parent_id.as_deref() {
            None => roots.push((i, false)),
            Some(p) if p == r.id => {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    reason: "record is its own parent".into(),
                })
            }
            Some(p) => match index.get(p) {
                Some(&parent) => children[parent].push(i),
                None => roots.push((i, true)),
            },
        }
    }
    for list in &mut children {
        list.sort_by(|&a, &b| time_key(&records[a]).cmp(&time_key(&records[b])));
    }
    roots.sort_by(|&(a, _), &(b, _)| time_key(&records[a]).cmp(&time_key(&records[b])));

    let mut placed = vec![false; records.len()];
    let mut slots: Vec<Option<ContentRecord>> = records.into_iter().map(Some).collect();
    let mut trees = Vec::with_capacity(roots.len());
    for (root, orphaned) in roots {
        let mut nodes: Vec<CascadeNode> = Vec::new();
        // (record index, arena parent)
        let mut stack = vec![(root, None::<usize>)];
        while let Some((rec, parent)) = stack.pop() {
            placed[rec] = true;
            let here = nodes.len();
            nodes.push(CascadeNode {
                record: slots[rec].take().expect("record placed twice"),
                parent,
                children: Vec::new(),
            });
            if let Some(p) = parent {
                nodes[p].children.push(here);
            }
            for &c in children[rec].iter().rev() {
                stack.push((c, Some(here)));
            }
        }
        trees.push(CascadeTree { nodes, orphaned });
    }
    if let Some(stray) = placed.iter().position(|&p| !p) {
        return Err(Error::MalformedRecord {
            line: stray + 1,
            reason: "parent links form a cycle".into(),
        });
    }
    Ok(CascadeForest { trees })
}

pub fn read_cascades<R: BufRead>(reader: R) -> Result<CascadeForest> {
    parse_cascades(read_records(reader)?)
}

/// Influence pairs `(influencer, follower)` for one cascade, in pre-order of
/// the follower's comment. Each comment yields one pair per distinct author
/// above it, skipping the commenter's own name.
pub fn cascade_to_edges(tree: &CascadeTree) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for node in tree.nodes.iter().skip(1) {
        let follower = node.record.author.as_str();
        seen.clear();
        let mut cursor = node.parent;
        while let Some(a) = cursor {
            let author = tree.nodes[a].record.author.as_str();
            if author != follower && !seen.contains(&author) {
                seen.push(author);
                pairs.push((author.to_owned(), follower.to_owned()));
            }
            cursor = tree.nodes[a].parent;
        }
    }
    pairs
}

/// Dense author ids in order of first appearance across the forest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuthorMap {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl AuthorMap {
    pub fn id_or_insert(&mut self, author: &str) -> usize {
        if let Some(&id) = self.ids.get(author) {
            return id;
        }
        let id = self.names.len();
        self.names.push(author.to_owned());
        self.ids.insert(author.to_owned(), id);
        id
    }

    pub fn id(&self, author: &str) -> Option<usize> {
        self.ids.get(author).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// CSV with header `node,author`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "author"])?;
        for (i, name) in self.names.iter().enumerate() {
            w.write_record([i.to_string().as_str(), name])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Accumulates influence pairs from every cascade into one weighted graph.
/// All authors get a node, including those with no edges.
pub fn build_network(forest: &CascadeForest) -> Result<(DirectedMultigraph, AuthorMap)> {
    let mut authors = AuthorMap::default();
    for tree in &forest.trees {
        for rec in tree.records() {
            authors.id_or_insert(&rec.author);
        }
    }
    let mut weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for tree in &forest.trees {
        for (from, to) in cascade_to_edges(tree) {
            let key = (authors.id(&from).unwrap(), authors.id(&to).unwrap());
            *weights.entry(key).or_insert(0) += 1;
        }
    }
    let graph = DirectedMultigraph::from_weighted_edges(
        authors.len(),
        weights.into_iter().map(|((s, t), w)| (s, t, w)),
    )?;
    Ok((graph, authors))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub gamma_hat: f64,
    pub r_squared: f64,
    /// Number of distinct positive degrees that entered the regression.
    pub points: usize,
}

/// Least-squares line through `(ln k, ln count(k))` over the positive
/// degrees present. `gamma_hat` is the magnitude of the slope.
pub fn powerlaw_fit(degrees: &[u64]) -> Result<PowerLawFit> {
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for &d in degrees.iter().filter(|&&d| d > 0) {
        *hist.entry(d).or_insert(0) += 1;
    }
    powerlaw_fit_histogram(hist)
}

/// As [`powerlaw_fit`] but from `(degree, frequency)` pairs; zero degrees
/// and zero-count bins are ignored.
pub fn powerlaw_fit_histogram<I>(hist: I) -> Result<PowerLawFit>
where
    I: IntoIterator<Item = (u64, u64)>,
{
    let points: Vec<(f64, f64)> = hist
        .into_iter()
        .filter(|&(k, c)| k > 0 && c > 0)
        .map(|(k, c)| ((k as f64).ln(), (c as f64).ln()))
        .collect();
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientSupport(distinct.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = points
            .iter()
            .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit { gamma_hat: slope.abs(), r_squared, points: points.len() })
}

/// Splits `values` (already in time order) into `n_bins` contiguous groups
/// whose sizes differ by at most one, earlier groups taking the remainder,
/// and returns each group's mean.
pub fn bin_means(values: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if n_bins == 0 || values.len() < n_bins {
        return Err(Error::TooFewRecords { needed: n_bins.max(1), got: values.len() });
    }
    let base = values.len() / n_bins;
    let extra = values.len() % n_bins;
    let mut out = Vec::with_capacity(n_bins);
    let mut start = 0;
    for b in 0..n_bins {
        let size = base + usize::from(b < extra);
        let chunk = &values[start..start + size];
        out.push(chunk.iter().sum::<f64>() / size as f64);
        start += size;
    }
    Ok(out)
}

/// Sizes produced by [`bin_means`] for `len` values.
pub fn bin_sizes(len: usize, n_bins: usize) -> Vec<usize> {
    if n_bins == 0 {
        return Vec::new();
    }
    (0..n_bins).map(|b| len / n_bins + usize::from(b < len % n_bins)).collect()
}

/// Time-ordered polarity means. Records without a polarity are skipped;
/// ties in `created_utc` are broken by id.
pub fn bin_polarity<'a, I>(records: I, n_bins: usize) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a ContentRecord>,
{
    let mut scored: Vec<&ContentRecord> =
        records.into_iter().filter(|r| r.polarity.is_some()).collect();
    scored.sort_by(|a, b| time_key(a).cmp(&time_key(b)));
    let values: Vec<f64> = scored.iter().map(|r| r.polarity.unwrap()).collect();
    bin_means(&values, n_bins)
}
