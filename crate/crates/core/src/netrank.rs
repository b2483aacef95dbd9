//! Co-authorship network baseline: affiliations as nodes, papers shared
//! across affiliations as weighted edges, PageRank as the ranking signal.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use thiserror::Error;

use crate::ingest::{AuthorAffiliationRecord, PaperRecord};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NetRankError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("{0}")]
    InvalidParameter(String),
}

/// Undirected affiliation graph. Edge weights count the papers on which
/// the two affiliations co-appeared; self-pairs are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffiliationGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeMap<(String, String), u64>,
}

impl AffiliationGraph {
    pub fn add_node(&mut self, affiliation: &str) {
        if !self.nodes.iter().any(|n| n == affiliation) {
            self.nodes.push(affiliation.to_string());
            self.nodes.sort();
        }
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: u64) {
        assert_ne!(a, b, "self-loops are not representable");
        self.add_node(a);
        self.add_node(b);
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        *self.edges.entry(key).or_insert(0) += weight;
    }

    pub fn weight(&self, a: &str, b: &str) -> u64 {
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.edges.get(&key).copied().unwrap_or(0)
    }
}

/// Build the co-authorship graph for one conference.
///
/// Each paper contributes weight 1 to every unordered pair of distinct
/// affiliations appearing on it, however many authors share them.
/// Affiliations that never co-author still become (isolated) nodes.
pub fn build_graph(
    papers: &[PaperRecord],
    affiliations: &[AuthorAffiliationRecord],
    conference_id: &str,
) -> AffiliationGraph {
    let conference_papers: BTreeSet<&str> = papers
        .iter()
        .filter(|p| p.conference_id == conference_id)
        .map(|p| p.paper_id.as_str())
        .collect();
    let mut per_paper: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for row in affiliations {
        if conference_papers.contains(row.paper_id.as_str()) {
            per_paper
                .entry(row.paper_id.as_str())
                .or_default()
                .insert(row.affiliation_id.as_str());
        }
    }
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
    for members in per_paper.values() {
        let members: Vec<&str> = members.iter().copied().collect();
        for affiliation in &members {
            nodes.insert((*affiliation).to_string());
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                *edges
                    .entry((members[i].to_string(), members[j].to_string()))
                    .or_insert(0) += 1;
            }
        }
    }
    AffiliationGraph {
        nodes: nodes.into_iter().collect(),
        edges,
    }
}

/// Power iteration with uniform teleport. Nodes without incident weight
/// spread their mass uniformly over all nodes. Iterates until the largest
/// per-node change falls below `tolerance`; scores sum to 1.
pub fn pagerank(
    graph: &AffiliationGraph,
    damping: f64,
    tolerance: f64,
) -> Result<BTreeMap<String, f64>, NetRankError> {
    if graph.nodes.is_empty() {
        return Err(NetRankError::EmptyGraph);
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(NetRankError::InvalidParameter(format!(
            "damping must be in (0, 1), got {damping}"
        )));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(NetRankError::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let n = graph.nodes.len();
    let index: BTreeMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| (node.as_str(), i))
        .collect();
    // adjacency as (neighbor, weight) lists plus per-node weight sums
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut degree = vec![0.0f64; n];
    for ((a, b), &w) in &graph.edges {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        let w = w as f64;
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
        degree[i] += w;
        degree[j] += w;
    }

    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0f64; n];
    let max_iterations = 100_000;
    for _ in 0..max_iterations {
        let dangling_mass: f64 = (0..n)
            .filter(|&i| degree[i] == 0.0)
            .map(|i| rank[i])
            .sum();
        let base = (1.0 - damping) * uniform + damping * dangling_mass * uniform;
        next.iter_mut().for_each(|x| *x = base);
        for i in 0..n {
            if degree[i] == 0.0 {
                continue;
            }
            let share = damping * rank[i] / degree[i];
            for &(j, w) in &neighbors[i] {
                next[j] += share * w;
            }
        }
        let delta = rank
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut rank, &mut next);
        if delta < tolerance {
            break;
        }
    }
    Ok(graph
        .nodes
        .iter()
        .cloned()
        .zip(rank.iter().copied())
        .collect())
}

/// Scores sorted descending (affiliation id breaks ties), ten decimals.
pub fn write_pagerank_tsv<W: Write>(
    scores: &BTreeMap<String, f64>,
    mut out: W,
) -> std::io::Result<()> {
    let mut rows: Vec<(&str, f64)> = scores.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    rows.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(b.0))
    });
    for (affiliation, score) in rows {
        writeln!(out, "{affiliation}\t{score:.10}")?;
    }
    Ok(())
}
