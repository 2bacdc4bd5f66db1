//! Projection of a snapshot onto the weighted co-commenter graph.
//!
//! Every post contributes one clique over its unique commenters; the graph
//! is the superposition of all cliques, with edge weight equal to the number
//! of posts the two endpoints commented on together.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::ingest::Snapshot;
use crate::{Error, Result};

/// One undirected edge; `src < dst` holds for canonical edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub weight: u32,
}

/// Weighted undirected co-commenter graph of one window.
///
/// Vertices are stored sorted, so vertex indices order the same way as the
/// commenter ids; edges are canonical (`src < dst`) and sorted, which makes
/// exports and parallel scans deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoCommentGraph {
    window_index: u32,
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl CoCommentGraph {
    pub fn window_index(&self) -> u32 {
        self.window_index
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_name(&self, idx: u32) -> &str {
        &self.vertices[idx as usize]
    }

    pub fn vertex_id(&self, name: &str) -> Option<u32> {
        self.vertices
            .binary_search_by(|v| v.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn weight_between(&self, a: &str, b: &str) -> Option<u32> {
        let (mut x, mut y) = (self.vertex_id(a)?, self.vertex_id(b)?);
        if x == y {
            return None;
        }
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        self.edges
            .binary_search_by(|e| (e.src, e.dst).cmp(&(x, y)))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    pub fn contains_vertex(&self, name: &str) -> bool {
        self.vertex_id(name).is_some()
    }

    /// Total edge weight (the modularity normalizer M).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| f64::from(e.weight)).sum()
    }

    /// Build a graph from raw parts, canonicalizing edge direction and order.
    /// Duplicate pairs and self-loops are invalid.
    pub fn from_parts(
        window_index: u32,
        mut vertices: Vec<String>,
        raw_edges: Vec<(u32, u32, u32)>,
    ) -> Result<CoCommentGraph> {
        vertices.sort();
        vertices.dedup();
        let mut edges = Vec::with_capacity(raw_edges.len());
        for (a, b, w) in raw_edges {
            if a == b {
                return Err(Error::invalid("self-loop in edge list"));
            }
            let (src, dst) = if a < b { (a, b) } else { (b, a) };
            if src as usize >= vertices.len() || dst as usize >= vertices.len() {
                return Err(Error::invalid("edge endpoint outside vertex set"));
            }
            edges.push(Edge { src, dst, weight: w });
        }
        edges.sort_unstable_by_key(|e| (e.src, e.dst));
        if edges.windows(2).any(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst)) {
            return Err(Error::invalid("duplicate edge in edge list"));
        }
        Ok(CoCommentGraph {
            window_index,
            vertices,
            edges,
        })
    }

    /// TSV export: sorted `src<TAB>dst<TAB>weight` lines under a versioned
    /// header comment.
    pub fn to_tsv(&self) -> String {
        self.write_tsv(&format!("#cocomment-graph v1 window={}", self.window_index))
    }

    pub(crate) fn write_tsv(&self, header: &str) -> String {
        let mut out = String::with_capacity(self.edges.len() * 24 + header.len() + 1);
        out.push_str(header);
        out.push('\n');
        for e in &self.edges {
            out.push_str(self.vertex_name(e.src));
            out.push('\t');
            out.push_str(self.vertex_name(e.dst));
            out.push('\t');
            out.push_str(&e.weight.to_string());
            out.push('\n');
        }
        out
    }

    /// Parse a TSV edge list produced by [`CoCommentGraph::to_tsv`] or the
    /// backbone export. Returns the graph plus the parsed header attributes.
    pub fn from_tsv(data: &str) -> Result<(CoCommentGraph, TsvHeader)> {
        let mut lines = data.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::invalid("empty edge-list file"))?;
        let header = TsvHeader::parse(header_line)?;

        let mut named_edges = Vec::new();
        let mut vertices = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (src, dst, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(d), Some(w), None) => (s, d, w),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 2,
                        message: "expected src<TAB>dst<TAB>weight".into(),
                    })
                }
            };
            let weight: u32 = w.parse().map_err(|e| Error::Parse {
                line: idx + 2,
                message: format!("bad weight {w:?}: {e}"),
            })?;
            vertices.push(src.to_string());
            vertices.push(dst.to_string());
            named_edges.push((src.to_string(), dst.to_string(), weight));
        }
        vertices.sort();
        vertices.dedup();
        let lookup: FxHashMap<&str, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i as u32))
            .collect();
        let raw = named_edges
            .into_iter()
            .map(|(s, d, w)| (lookup[s.as_str()], lookup[d.as_str()], w))
            .collect();
        let graph = CoCommentGraph::from_parts(header.window, vertices, raw)?;
        Ok((graph, header))
    }
}

/// Parsed edge-list header: `#<kind> v1 key=value ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvHeader {
    pub kind: String,
    pub window: u32,
    pub attrs: BTreeMap<String, String>,
}

impl TsvHeader {
    fn parse(line: &str) -> Result<TsvHeader> {
        let invalid = || Error::invalid(format!("bad edge-list header {line:?}"));
        let rest = line.strip_prefix('#').ok_or_else(invalid)?;
        let mut parts = rest.split_whitespace();
        let kind = parts.next().ok_or_else(invalid)?.to_string();
        if parts.next() != Some("v1") {
            return Err(invalid());
        }
        let mut attrs = BTreeMap::new();
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(invalid)?;
            attrs.insert(key.to_string(), value.to_string());
        }
        let window = attrs
            .get("window")
            .ok_or_else(invalid)?
            .parse()
            .map_err(|_| invalid())?;
        Ok(TsvHeader { kind, window, attrs })
    }
}

/// Options for [`build_graph_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Refuse posts whose commenter set exceeds this size instead of
    /// materializing the clique. `None` disables the guard.
    pub max_clique: Option<usize>,
}

/// Build the co-commenter graph of a filtered snapshot with default options.
pub fn build_graph(snapshot: &Snapshot) -> Result<CoCommentGraph> {
    build_graph_with(snapshot, &BuildOptions::default())
}

/// Build the co-commenter graph of a filtered snapshot.
///
/// Each post adds +1 to the weight of every unordered pair of its unique
/// commenters. Pair generation runs in parallel per post and merges by
/// reduction, which is order-insensitive and therefore deterministic.
pub fn build_graph_with(snapshot: &Snapshot, opts: &BuildOptions) -> Result<CoCommentGraph> {
    if let Some(cap) = opts.max_clique {
        for (post, commenters) in &snapshot.commenters_per_post {
            if commenters.len() > cap {
                return Err(Error::Resource(format!(
                    "post {post:?} has {} unique commenters, above the clique cap {cap}",
                    commenters.len()
                )));
            }
        }
    }

    let vertices = snapshot.commenter_index();
    let lookup: FxHashMap<&str, u32> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i as u32))
        .collect();

    let posts: Vec<Vec<u32>> = snapshot
        .commenters_per_post
        .values()
        .map(|commenters| commenters.iter().map(|c| lookup[c.as_str()]).collect())
        .collect();

    let merged: FxHashMap<(u32, u32), u32> = posts
        .par_iter()
        .fold(FxHashMap::default, |mut acc, members| {
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    // Sets iterate in ascending order, so a < b already.
                    *acc.entry((a, b)).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(FxHashMap::default, |left, right| {
            if left.len() < right.len() {
                return reduce_into(right, left);
            }
            reduce_into(left, right)
        });

    let mut edges: Vec<Edge> = merged
        .into_iter()
        .map(|((src, dst), weight)| Edge { src, dst, weight })
        .collect();
    edges.sort_unstable_by_key(|e| (e.src, e.dst));

    Ok(CoCommentGraph {
        window_index: snapshot.window_index,
        vertices,
        edges,
    })
}

fn reduce_into(
    mut big: FxHashMap<(u32, u32), u32>,
    small: FxHashMap<(u32, u32), u32>,
) -> FxHashMap<(u32, u32), u32> {
    for (key, count) in small {
        *big.entry(key).or_insert(0) += count;
    }
    big
}

/// Vertex/edge counts and the exact integer weight histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    /// weight -> number of edges with that weight.
    pub weight_histogram: BTreeMap<u32, u64>,
    /// weight -> fraction of all edges; sums to 1 on non-empty graphs.
    pub weight_fractions: BTreeMap<u32, f64>,
}

pub fn graph_stats(graph: &CoCommentGraph) -> GraphStats {
    let mut weight_histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for e in graph.edges() {
        *weight_histogram.entry(e.weight).or_insert(0) += 1;
    }
    let total = graph.edge_count() as f64;
    let weight_fractions = weight_histogram
        .iter()
        .map(|(&w, &n)| (w, n as f64 / total))
        .collect::<BTreeMap<_, _>>();
    GraphStats {
        vertex_count: graph.vertex_count(),
        edge_count: graph.edge_count(),
        weight_histogram,
        weight_fractions: if total > 0.0 {
            weight_fractions
        } else {
            BTreeMap::new()
        },
    }
}
