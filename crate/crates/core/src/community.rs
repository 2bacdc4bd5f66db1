//! Weighted modularity and Louvain community detection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::projection::CoCommentGraph;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A vertex -> community labeling with its modularity.
///
/// Labels are contiguous integers `0..community_count`, ordered by
/// descending community size with ties broken by the smallest member id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    pub labels: BTreeMap<String, u32>,
    pub modularity: f64,
    pub seed: u64,
    pub community_count: u32,
}

/// Modularity of a labeling over a weighted graph:
/// Q = (1/2M) sum_{c,d} [w(cd) - k(c)k(d)/2M] delta(l(c), l(d)).
pub fn modularity(graph: &CoCommentGraph, labels: &BTreeMap<String, u32>) -> Result<f64> {
    let indexed = indexed_labels(graph, labels)?;
    Ok(modularity_indexed(graph, &indexed))
}

fn indexed_labels(graph: &CoCommentGraph, labels: &BTreeMap<String, u32>) -> Result<Vec<u32>> {
    graph
        .vertices()
        .iter()
        .map(|v| {
            labels
                .get(v)
                .copied()
                .ok_or_else(|| Error::invalid(format!("vertex {v:?} has no community label")))
        })
        .collect()
}

fn modularity_indexed(graph: &CoCommentGraph, labels: &[u32]) -> f64 {
    let m = graph.total_weight();
    debug_assert!(m > 0.0);
    let n_comm = labels.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut intra = vec![0.0; n_comm];
    let mut degree_sum = vec![0.0; n_comm];
    let mut degrees = vec![0.0; graph.vertex_count()];
    for e in graph.edges() {
        let w = f64::from(e.weight);
        degrees[e.src as usize] += w;
        degrees[e.dst as usize] += w;
        if labels[e.src as usize] == labels[e.dst as usize] {
            intra[labels[e.src as usize] as usize] += w;
        }
    }
    for (v, &k) in degrees.iter().enumerate() {
        degree_sum[labels[v] as usize] += k;
    }
    let mut q = 0.0;
    for c in 0..n_comm {
        q += intra[c] / m - (degree_sum[c] / (2.0 * m)).powi(2);
    }
    q
}

/// Compact adjacency used by the local-move phases.
struct WorkGraph {
    /// Per vertex: (neighbor, weight); no self entries.
    adjacency: Vec<Vec<(u32, f64)>>,
    /// Per vertex: self-loop weight (intra weight folded by aggregation).
    self_loops: Vec<f64>,
    /// Weighted degree, self-loops counted twice.
    degrees: Vec<f64>,
    /// Total edge weight, self-loops counted once.
    total: f64,
}

impl WorkGraph {
    fn from_graph(graph: &CoCommentGraph) -> WorkGraph {
        let n = graph.vertex_count();
        let mut adjacency = vec![Vec::new(); n];
        let mut degrees = vec![0.0; n];
        let mut total = 0.0;
        for e in graph.edges() {
            let w = f64::from(e.weight);
            adjacency[e.src as usize].push((e.dst, w));
            adjacency[e.dst as usize].push((e.src, w));
            degrees[e.src as usize] += w;
            degrees[e.dst as usize] += w;
            total += w;
        }
        WorkGraph {
            adjacency,
            self_loops: vec![0.0; n],
            degrees,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }
}

/// Louvain community detection, deterministic for a fixed seed.
///
/// Local moves visit vertices in seeded-shuffled order and accept the move
/// with the highest modularity gain (ties: lowest community id), provided it
/// strictly beats staying put. Exhausted levels are aggregated into
/// meta-vertices and the process repeats until no move improves modularity.
pub fn louvain(graph: &CoCommentGraph, seed: u64) -> Result<CommunityAssignment> {
    if graph.vertex_count() == 0 {
        return Err(Error::undefined("community detection on an empty graph"));
    }
    if graph.total_weight() <= 0.0 {
        return Err(Error::undefined(
            "modularity is undefined on a graph with zero total weight",
        ));
    }

    let mut rng = SplitMix64::stream(seed, "louvain");
    let mut work = WorkGraph::from_graph(graph);
    // labels[v] = community of the original vertex v, tracked across levels.
    let mut labels: Vec<u32> = (0..graph.vertex_count() as u32).collect();

    loop {
        let (node_to_comm, moved) = local_moves(&work, &mut rng);
        if !moved {
            break;
        }
        let compact = compact_communities(&node_to_comm);
        for label in &mut labels {
            *label = compact[node_to_comm[*label as usize] as usize];
        }
        work = aggregate(&work, &node_to_comm, &compact);
        if work.len() <= 1 {
            break;
        }
    }

    let canonical = canonicalize(graph, &labels);
    let q = modularity_indexed(graph, &canonical);
    let community_count = canonical.iter().copied().max().map_or(0, |c| c + 1);
    let labels = graph
        .vertices()
        .iter()
        .cloned()
        .zip(canonical.iter().copied())
        .collect();
    Ok(CommunityAssignment {
        labels,
        modularity: q,
        seed,
        community_count,
    })
}

/// One level of greedy local moves. Returns the node -> community map and
/// whether any vertex moved.
fn local_moves(work: &WorkGraph, rng: &mut SplitMix64) -> (Vec<u32>, bool) {
    let n = work.len();
    let two_m = 2.0 * work.total;
    let mut community: Vec<u32> = (0..n as u32).collect();
    let mut comm_degree: Vec<f64> = work.degrees.clone();

    let mut order: Vec<u32> = (0..n as u32).collect();
    rng.shuffle(&mut order);

    let mut neighbor_weight: Vec<f64> = vec![0.0; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut any_move = false;

    loop {
        let mut moves_this_pass = 0usize;
        for &v in &order {
            let v = v as usize;
            let current = community[v];
            let k_v = work.degrees[v];

            for &(u, w) in &work.adjacency[v] {
                let comm = community[u as usize];
                if neighbor_weight[comm as usize] == 0.0 {
                    touched.push(comm);
                }
                neighbor_weight[comm as usize] += w;
            }
            if neighbor_weight[current as usize] == 0.0 {
                touched.push(current);
            }

            comm_degree[current as usize] -= k_v;
            let stay_gain = neighbor_weight[current as usize]
                - k_v * comm_degree[current as usize] / two_m;

            // A move must strictly beat staying; among candidates take the
            // highest gain, breaking exact ties by the lowest community id.
            let mut best: Option<(f64, u32)> = None;
            for &comm in &touched {
                if comm == current {
                    continue;
                }
                let gain = neighbor_weight[comm as usize]
                    - k_v * comm_degree[comm as usize] / two_m;
                if gain <= stay_gain + 1e-12 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bg, bc)) => gain > bg + 1e-12 || ((gain - bg).abs() <= 1e-12 && comm < bc),
                };
                if better {
                    best = Some((gain, comm));
                }
            }

            let target = best.map_or(current, |(_, comm)| comm);
            comm_degree[target as usize] += k_v;
            if target != current {
                community[v] = target;
                moves_this_pass += 1;
                any_move = true;
            }

            for &comm in &touched {
                neighbor_weight[comm as usize] = 0.0;
            }
            touched.clear();
        }
        if moves_this_pass == 0 {
            break;
        }
    }
    (community, any_move)
}

/// Map sparse community ids to a dense 0..k range (first-seen order).
fn compact_communities(node_to_comm: &[u32]) -> Vec<u32> {
    let mut mapping = vec![u32::MAX; node_to_comm.len()];
    let mut next = 0;
    for &c in node_to_comm {
        if mapping[c as usize] == u32::MAX {
            mapping[c as usize] = next;
            next += 1;
        }
    }
    mapping
}

/// Fold communities into meta-vertices; cross-community weights merge into
/// meta-edges and intra weights become self-loops.
fn aggregate(work: &WorkGraph, node_to_comm: &[u32], compact: &[u32]) -> WorkGraph {
    let n_meta = compact.iter().filter(|&&c| c != u32::MAX).count();
    let meta_of = |v: usize| compact[node_to_comm[v] as usize] as usize;

    let mut self_loops = vec![0.0; n_meta];
    let mut cross: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for v in 0..work.len() {
        let mv = meta_of(v);
        self_loops[mv] += work.self_loops[v];
        for &(u, w) in &work.adjacency[v] {
            let mu = meta_of(u as usize);
            match mv.cmp(&mu) {
                std::cmp::Ordering::Less => {
                    *cross.entry((mv as u32, mu as u32)).or_insert(0.0) += w;
                }
                std::cmp::Ordering::Equal => {
                    // Each undirected edge appears twice in adjacency.
                    self_loops[mv] += w / 2.0;
                }
                std::cmp::Ordering::Greater => {}
            }
        }
    }

    let mut adjacency = vec![Vec::new(); n_meta];
    let mut degrees = vec![0.0; n_meta];
    let mut total = 0.0;
    for (&(a, b), &w) in &cross {
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
        degrees[a as usize] += w;
        degrees[b as usize] += w;
        total += w;
    }
    for (v, &s) in self_loops.iter().enumerate() {
        degrees[v] += 2.0 * s;
        total += s;
    }
    WorkGraph {
        adjacency,
        self_loops,
        degrees,
        total,
    }
}

/// Relabel communities canonically: by descending size, ties by the
/// lexicographically smallest member.
fn canonicalize(graph: &CoCommentGraph, labels: &[u32]) -> Vec<u32> {
    let n_comm = labels.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut size = vec![0usize; n_comm];
    let mut min_member: Vec<Option<&str>> = vec![None; n_comm];
    for (v, &c) in labels.iter().enumerate() {
        size[c as usize] += 1;
        let name = graph.vertex_name(v as u32);
        if min_member[c as usize].is_none_or(|m| name < m) {
            min_member[c as usize] = Some(name);
        }
    }
    let mut order: Vec<usize> = (0..n_comm).filter(|&c| size[c] > 0).collect();
    order.sort_by(|&a, &b| {
        size[b]
            .cmp(&size[a])
            .then_with(|| min_member[a].cmp(&min_member[b]))
    });
    let mut rank = vec![u32::MAX; n_comm];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new as u32;
    }
    labels.iter().map(|&c| rank[c as usize]).collect()
}

/// JSON export shape for a window's assignment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentExport {
    pub window: u32,
    pub seed: u64,
    pub modularity: f64,
    pub communities: Vec<CommunityExport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommunityExport {
    pub id: u32,
    pub size: usize,
    pub members: Vec<String>,
}

pub fn assignment_export(window: u32, assignment: &CommunityAssignment) -> AssignmentExport {
    let mut members: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for (vertex, &comm) in &assignment.labels {
        members.entry(comm).or_default().push(vertex.clone());
    }
    AssignmentExport {
        window,
        seed: assignment.seed,
        modularity: assignment.modularity,
        communities: members
            .into_iter()
            .map(|(id, members)| CommunityExport {
                id,
                size: members.len(),
                members,
            })
            .collect(),
    }
}

pub fn assignment_from_export(export: &AssignmentExport) -> CommunityAssignment {
    let mut labels = BTreeMap::new();
    for community in &export.communities {
        for member in &community.members {
            labels.insert(member.clone(), community.id);
        }
    }
    CommunityAssignment {
        labels,
        modularity: export.modularity,
        seed: export.seed,
        community_count: export.communities.len() as u32,
    }
}
