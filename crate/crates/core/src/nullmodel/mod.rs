//! Per-edge independent-behavior null model and backbone extraction.
//!
//! For every edge (c, d) the null weight is a Poisson-Binomial variable: one
//! Bernoulli trial per post of each influencer both endpoints engaged with,
//! with success probability r_p(c) * r_p(d), where r_p(c) = 1 - (1 - f)^|C_p|
//! is the chance that c lands on post p at all under engagement-proportional
//! random assignment. An edge survives when its observed weight exceeds the
//! (1 - alpha) percentile of that distribution.

pub mod pb;

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::ingest::Snapshot;
use crate::projection::{CoCommentGraph, TsvHeader};
use crate::{Error, Result};

use pb::PbMoments;

/// Per-influencer engagement shares and post popularities of one snapshot.
#[derive(Debug, Clone)]
pub struct EngagementTable {
    influencers: Vec<String>,
    commenters: Vec<String>,
    /// Per influencer: (post id, |C_p|), sorted by post id.
    posts: Vec<Vec<(String, u32)>>,
    /// Per influencer: post sizes only, parallel to `posts`.
    sizes: Vec<Vec<u32>>,
    /// Per influencer: (size, multiplicity), ascending. Posts of one
    /// influencer share few distinct sizes, so the per-edge scan batches
    /// identical Bernoulli parameters (hot path).
    size_groups: Vec<Vec<(u32, u32)>>,
    /// Per influencer: commenter index -> (x_i(c), f_i(c)).
    engagement: Vec<FxHashMap<u32, (u32, f64)>>,
    /// Per commenter: (influencer index, f_i(c)), sorted by influencer.
    support: Vec<Vec<(u32, f64)>>,
    /// Influencers skipped for having no commenters at all.
    pub warnings: Vec<String>,
}

impl EngagementTable {
    pub fn influencers(&self) -> &[String] {
        &self.influencers
    }

    pub fn commenters(&self) -> &[String] {
        &self.commenters
    }

    pub fn commenter_id(&self, name: &str) -> Option<u32> {
        self.commenters
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    fn influencer_id(&self, name: &str) -> Option<u32> {
        self.influencers
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    /// x_i(c): number of posts by `influencer` that `commenter` commented on.
    pub fn raw(&self, influencer: &str, commenter: &str) -> Option<u32> {
        let i = self.influencer_id(influencer)?;
        let c = self.commenter_id(commenter)?;
        self.engagement[i as usize].get(&c).map(|&(x, _)| x)
    }

    /// f_i(c): the commenter's share of all unique-commenter slots on the
    /// influencer's posts.
    pub fn relative(&self, influencer: &str, commenter: &str) -> Option<f64> {
        let i = self.influencer_id(influencer)?;
        let c = self.commenter_id(commenter)?;
        self.engagement[i as usize].get(&c).map(|&(_, f)| f)
    }

    pub fn post_size(&self, post: &str) -> Option<u32> {
        for posts in &self.posts {
            if let Ok(idx) = posts.binary_search_by(|(p, _)| p.as_str().cmp(post)) {
                return Some(posts[idx].1);
            }
        }
        None
    }
}

/// Build the engagement table of a filtered snapshot.
///
/// For every influencer i, sum over c of f_i(c) is 1 by construction;
/// commenters with zero engagement toward i are simply absent from i's map.
pub fn engagement_table(snapshot: &Snapshot) -> Result<EngagementTable> {
    let commenters = snapshot.commenter_index();
    let commenter_id: FxHashMap<&str, u32> = commenters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i as u32))
        .collect();

    let mut influencers = Vec::new();
    let mut posts = Vec::new();
    let mut sizes = Vec::new();
    let mut size_groups = Vec::new();
    let mut engagement = Vec::new();
    let mut warnings = Vec::new();

    for (influencer, post_ids) in &snapshot.posts_by_influencer {
        let mut influencer_posts = Vec::with_capacity(post_ids.len());
        let mut counts: FxHashMap<u32, u32> = FxHashMap::default();
        let mut total_slots: u64 = 0;
        for post in post_ids {
            let commenter_set = snapshot
                .commenters_per_post
                .get(post)
                .ok_or_else(|| Error::invalid(format!("post {post:?} has no commenter set")))?;
            influencer_posts.push((post.clone(), commenter_set.len() as u32));
            total_slots += commenter_set.len() as u64;
            for c in commenter_set {
                *counts.entry(commenter_id[c.as_str()]).or_insert(0) += 1;
            }
        }
        if total_slots == 0 {
            warnings.push(format!("influencer {influencer:?} has no comments; excluded"));
            continue;
        }
        let table: FxHashMap<u32, (u32, f64)> = counts
            .into_iter()
            .map(|(c, x)| (c, (x, f64::from(x) / total_slots as f64)))
            .collect();
        influencers.push(influencer.clone());
        let post_sizes: Vec<u32> = influencer_posts.iter().map(|&(_, s)| s).collect();
        let mut grouped: BTreeMap<u32, u32> = BTreeMap::new();
        for &s in &post_sizes {
            *grouped.entry(s).or_insert(0) += 1;
        }
        size_groups.push(grouped.into_iter().collect());
        sizes.push(post_sizes);
        posts.push(influencer_posts);
        engagement.push(table);
    }

    let mut support = vec![Vec::new(); commenters.len()];
    for (i, table) in engagement.iter().enumerate() {
        for (&c, &(_, f)) in table {
            support[c as usize].push((i as u32, f));
        }
    }
    for list in &mut support {
        list.sort_unstable_by_key(|&(i, _)| i);
    }

    Ok(EngagementTable {
        influencers,
        commenters,
        posts,
        sizes,
        size_groups,
        engagement,
        support,
        warnings,
    })
}

/// Probability that a commenter with relative engagement `f` lands on a post
/// with `n` unique commenter slots: 1 - (1 - f)^n.
pub fn post_inclusion_prob(f: f64, n: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&f), "engagement share out of range");
    debug_assert!(n >= 1);
    1.0 - (1.0 - f).powi(n as i32)
}

/// The null parameter sequence of edge (c, d): one r_p(c, d) per post of
/// every influencer both endpoints engaged with, in (influencer, post id)
/// order. Posts of influencers known to only one endpoint contribute exact
/// zeros and are skipped.
pub fn edge_null_params(table: &EngagementTable, c: &str, d: &str) -> Vec<f64> {
    let (Some(ci), Some(di)) = (table.commenter_id(c), table.commenter_id(d)) else {
        return Vec::new();
    };
    let mut params = Vec::new();
    for_common_posts(table, ci, di, |r| params.push(r));
    params
}

/// Walk r_p(c, d) over all posts of influencers common to both endpoints.
fn for_common_posts(table: &EngagementTable, ci: u32, di: u32, mut visit: impl FnMut(f64)) {
    let left = &table.support[ci as usize];
    let right = &table.support[di as usize];
    let (mut a, mut b) = (0, 0);
    while a < left.len() && b < right.len() {
        let (ia, fa) = left[a];
        let (ib, fb) = right[b];
        match ia.cmp(&ib) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                let base_a = 1.0 - fa;
                let base_b = 1.0 - fb;
                for &size in &table.sizes[ia as usize] {
                    let r = (1.0 - base_a.powi(size as i32)) * (1.0 - base_b.powi(size as i32));
                    visit(r);
                }
                a += 1;
                b += 1;
            }
        }
    }
}

/// Null-model summary of one edge: moment sums and the derived percentile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeNullSummary {
    pub mu: f64,
    pub var: f64,
    pub m3: f64,
    /// Number of posts contributing a nonzero parameter.
    pub support: u32,
    /// The (1 - alpha) percentile of the null edge weight.
    pub percentile: u32,
}

fn summarize_edge(
    table: &EngagementTable,
    ci: u32,
    di: u32,
    q: f64,
    exact_cap: usize,
    scratch: &mut Vec<f64>,
) -> EdgeNullSummary {
    let mut moments = PbMoments::default();
    let mut count: u32 = 0;
    scratch.clear();
    // Same parameter multiset as `for_common_posts`, batched by post size;
    // the distribution (and so the percentile) is permutation-invariant.
    let left = &table.support[ci as usize];
    let right = &table.support[di as usize];
    let (mut a, mut b) = (0, 0);
    while a < left.len() && b < right.len() {
        let (ia, fa) = left[a];
        let (ib, fb) = right[b];
        match ia.cmp(&ib) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                let base_a = 1.0 - fa;
                let base_b = 1.0 - fb;
                for &(size, multiplicity) in &table.size_groups[ia as usize] {
                    let r = (1.0 - base_a.powi(size as i32)) * (1.0 - base_b.powi(size as i32));
                    let q_r = 1.0 - r;
                    moments.mu += f64::from(multiplicity) * r;
                    moments.var += f64::from(multiplicity) * r * q_r;
                    moments.m3 += f64::from(multiplicity) * r * q_r * (1.0 - 2.0 * r);
                    count += multiplicity;
                    if (count as usize) <= exact_cap {
                        for _ in 0..multiplicity {
                            scratch.push(r);
                        }
                    }
                }
                a += 1;
                b += 1;
            }
        }
    }
    let percentile = if (count as usize) <= exact_cap {
        pb::percentile_exact(scratch, q)
    } else {
        pb::percentile_rna(moments.mu, moments.var, moments.m3, count, q)
    };
    EdgeNullSummary {
        mu: moments.mu,
        var: moments.var,
        m3: moments.m3,
        support: count,
        percentile,
    }
}

/// Compute the null summary of a single edge by commenter name.
pub fn edge_null_summary(
    table: &EngagementTable,
    c: &str,
    d: &str,
    q: f64,
    exact_cap: usize,
) -> Option<EdgeNullSummary> {
    let (ci, di) = (table.commenter_id(c)?, table.commenter_id(d)?);
    let mut scratch = Vec::new();
    Some(summarize_edge(table, ci, di, q, exact_cap, &mut scratch))
}

/// Options for backbone extraction.
#[derive(Debug, Clone, Copy)]
pub struct BackboneOptions {
    pub alpha: f64,
    /// Keep an edge only when weight strictly exceeds the percentile. The
    /// lenient alternative (>=) admits weights that may sit below their
    /// nominal percentile because of the discreteness of the distribution.
    pub strict: bool,
    /// Edges with at most this many contributing posts use the exact CDF
    /// instead of the approximation; cheap, and it sidesteps the poorly
    /// specified small-mu regime of the approximation.
    pub exact_fallback_cap: usize,
}

impl Default for BackboneOptions {
    fn default() -> Self {
        BackboneOptions {
            alpha: 0.05,
            strict: true,
            exact_fallback_cap: 64,
        }
    }
}

/// The salient subgraph of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    pub graph: CoCommentGraph,
    pub alpha: f64,
    pub strict: bool,
}

impl Backbone {
    pub fn to_tsv(&self) -> String {
        self.graph.write_tsv(&format!(
            "#backbone v1 window={} alpha={} strict={}",
            self.graph.window_index(),
            self.alpha,
            self.strict
        ))
    }

    pub fn from_tsv(data: &str) -> Result<Backbone> {
        let (graph, header) = CoCommentGraph::from_tsv(data)?;
        if header.kind != "backbone" {
            return Err(Error::invalid(format!(
                "expected a backbone edge list, found {:?}",
                header.kind
            )));
        }
        let alpha = header_attr(&header, "alpha")?;
        let strict = header_attr(&header, "strict")?;
        Ok(Backbone { graph, alpha, strict })
    }

    pub fn vertex_set(&self) -> &[String] {
        self.graph.vertices()
    }
}

fn header_attr<T: std::str::FromStr>(header: &TsvHeader, key: &str) -> Result<T> {
    header
        .attrs
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::invalid(format!("backbone header missing attribute {key:?}")))
}

/// Per-weight retention achieved by a backbone extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionReport {
    pub total_edges: u64,
    pub kept_edges: u64,
    /// weight -> fraction of edges of that weight that were kept.
    pub per_weight: BTreeMap<u32, f64>,
}

impl RetentionReport {
    pub fn kept_fraction(&self) -> f64 {
        if self.total_edges == 0 {
            0.0
        } else {
            self.kept_edges as f64 / self.total_edges as f64
        }
    }
}

/// Filter a graph down to its backbone.
///
/// Edges are scanned in canonical order, in parallel batches; the outcome is
/// independent of thread count because every edge decision depends only on
/// the immutable engagement table. Isolated vertices are dropped from the
/// result.
pub fn extract_backbone(
    graph: &CoCommentGraph,
    table: &EngagementTable,
    opts: &BackboneOptions,
) -> Result<(Backbone, RetentionReport)> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::config(format!(
            "alpha must lie strictly between 0 and 1, got {}",
            opts.alpha
        )));
    }
    if graph.vertices() != table.commenters() {
        return Err(Error::invalid(
            "graph and engagement table come from different snapshots",
        ));
    }
    let q = 1.0 - opts.alpha;

    let kept: Vec<bool> = graph
        .edges()
        .par_iter()
        .map_init(Vec::new, |scratch, edge| {
            let summary = summarize_edge(table, edge.src, edge.dst, q, opts.exact_fallback_cap, scratch);
            if opts.strict {
                edge.weight > summary.percentile
            } else {
                edge.weight >= summary.percentile
            }
        })
        .collect();

    let mut totals: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    let mut kept_edges: u64 = 0;
    for (edge, &keep) in graph.edges().iter().zip(&kept) {
        let entry = totals.entry(edge.weight).or_insert((0, 0));
        entry.0 += 1;
        if keep {
            entry.1 += 1;
            kept_edges += 1;
        }
    }
    let report = RetentionReport {
        total_edges: graph.edge_count() as u64,
        kept_edges,
        per_weight: totals
            .into_iter()
            .map(|(w, (total, kept))| (w, kept as f64 / total as f64))
            .collect(),
    };

    // Re-index the surviving subgraph over its surviving endpoints.
    let mut used = vec![false; graph.vertex_count()];
    for (edge, &keep) in graph.edges().iter().zip(&kept) {
        if keep {
            used[edge.src as usize] = true;
            used[edge.dst as usize] = true;
        }
    }
    let mut remap = vec![u32::MAX; graph.vertex_count()];
    let mut vertices = Vec::new();
    for (old, &flag) in used.iter().enumerate() {
        if flag {
            remap[old] = vertices.len() as u32;
            vertices.push(graph.vertices()[old].clone());
        }
    }
    let raw_edges: Vec<(u32, u32, u32)> = graph
        .edges()
        .iter()
        .zip(&kept)
        .filter(|(_, &keep)| keep)
        .map(|(e, _)| (remap[e.src as usize], remap[e.dst as usize], e.weight))
        .collect();
    let backbone_graph = CoCommentGraph::from_parts(graph.window_index(), vertices, raw_edges)?;

    Ok((
        Backbone {
            graph: backbone_graph,
            alpha: opts.alpha,
            strict: opts.strict,
        },
        report,
    ))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ingest::{filter_single_post_commenters, window_partition, InteractionRecord, WindowSpec};
    use crate::projection::build_graph;

    pub(crate) fn snapshot(posts: &[(&str, &str, &[&str])]) -> Snapshot {
        let base = 1_535_932_800;
        let mut records = Vec::new();
        for (n, (post, influencer, commenters)) in posts.iter().enumerate() {
            for c in *commenters {
                records.push(InteractionRecord {
                    commenter: (*c).to_string(),
                    influencer: (*influencer).to_string(),
                    post: (*post).to_string(),
                    timestamp: base + n as i64,
                    text: None,
                    is_reply: None,
                    sentiment: None,
                });
            }
        }
        let snaps = window_partition(&records, &WindowSpec::default()).unwrap();
        filter_single_post_commenters(&snaps[0])
    }

    /// The worked seven-post example: influencer i with post sizes 3+2+3+3,
    /// influencer j with sizes 2+2+3.
    pub(crate) fn toy_snapshot() -> Snapshot {
        snapshot(&[
            ("p1", "i", &["c", "d", "f1"]),
            ("p2", "i", &["c", "d"]),
            ("p3", "i", &["c", "e", "f1"]),
            ("p4", "i", &["f1", "f2", "f3"]),
            ("p5", "j", &["f2", "f3"]),
            ("p6", "j", &["c", "f2"]),
            ("p7", "j", &["d", "e", "f3"]),
        ])
    }

    /// Two-decimal truncation, the display convention of the worked example.
    fn trunc2(x: f64) -> f64 {
        (x * 100.0).floor() / 100.0
    }

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn toy_relative_engagement() {
        let table = engagement_table(&toy_snapshot()).unwrap();
        assert!((table.relative("i", "c").unwrap() - 3.0 / 11.0).abs() < 1e-12);
        assert!((table.relative("i", "d").unwrap() - 2.0 / 11.0).abs() < 1e-12);
        assert!((table.relative("i", "e").unwrap() - 1.0 / 11.0).abs() < 1e-12);
        for who in ["c", "d", "e"] {
            assert!((table.relative("j", who).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        }
        assert_eq!(round2(table.relative("i", "c").unwrap()), 0.27);
        assert_eq!(round2(table.relative("i", "d").unwrap()), 0.18);
        assert_eq!(round2(table.relative("i", "e").unwrap()), 0.09);
        assert_eq!(round2(table.relative("j", "e").unwrap()), 0.14);
        assert_eq!(table.raw("i", "c"), Some(3));
        assert_eq!(table.raw("i", "e"), Some(1));
        assert_eq!(table.raw("j", "c"), Some(1));
        assert_eq!(table.post_size("p1"), Some(3));
        assert_eq!(table.post_size("p7"), Some(3));
    }

    #[test]
    fn relative_engagement_normalizes_per_influencer() {
        let table = engagement_table(&toy_snapshot()).unwrap();
        for influencer in table.influencers().to_vec() {
            let total: f64 = table
                .commenters()
                .to_vec()
                .iter()
                .filter_map(|c| table.relative(&influencer, c))
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{influencer}: {total}");
        }
    }

    #[test]
    fn single_commenter_single_influencer_normalizes_to_one() {
        let snap = snapshot(&[("p1", "i", &["solo"]), ("p2", "i", &["solo"])]);
        let table = engagement_table(&snap).unwrap();
        assert_eq!(table.relative("i", "solo"), Some(1.0));
    }

    #[test]
    fn toy_post_inclusion_probabilities() {
        // Evaluated at the two-decimal engagement shares and truncated for
        // display, the convention of the worked example.
        assert_eq!(trunc2(post_inclusion_prob(0.27, 3)), 0.61);
        assert_eq!(trunc2(post_inclusion_prob(0.18, 3)), 0.44);
        assert_eq!(trunc2(post_inclusion_prob(0.14, 3)), 0.36);
    }

    #[test]
    fn post_inclusion_prob_boundaries_and_monotonicity() {
        assert_eq!(post_inclusion_prob(0.0, 5), 0.0);
        assert_eq!(post_inclusion_prob(1.0, 5), 1.0);
        let mut last = 0.0;
        for f in [0.1, 0.2, 0.3, 0.4] {
            let r = post_inclusion_prob(f, 3);
            assert!(r > last);
            last = r;
        }
        assert!(post_inclusion_prob(0.3, 4) > post_inclusion_prob(0.3, 3));
    }

    #[test]
    fn toy_edge_null_params() {
        let table = engagement_table(&toy_snapshot()).unwrap();
        let params = edge_null_params(&table, "c", "d");
        // Both engage with i (4 posts) and j (3 posts).
        assert_eq!(params.len(), 7);
        let r1 = (1.0 - (8.0f64 / 11.0).powi(3)) * (1.0 - (9.0f64 / 11.0).powi(3));
        assert!((params[0] - r1).abs() < 1e-12);
        let r7 = (1.0 - (6.0f64 / 7.0).powi(3)) * (1.0 - (6.0f64 / 7.0).powi(3));
        assert!((params[6] - r7).abs() < 1e-12);

        // Display arithmetic of the worked example: products of the
        // two-decimal r values, truncated to two decimals.
        let rc = trunc2(post_inclusion_prob(0.27, 3));
        let rd = trunc2(post_inclusion_prob(0.18, 3));
        assert_eq!(trunc2(rc * rd), 0.26);
        let re = trunc2(post_inclusion_prob(0.14, 3));
        assert_eq!(trunc2(re * re), 0.12);
    }

    #[test]
    fn disjoint_support_yields_no_params() {
        let snap = snapshot(&[
            ("p1", "i", &["a", "b"]),
            ("p2", "i", &["a", "b"]),
            ("p3", "j", &["x", "y"]),
            ("p4", "j", &["x", "y"]),
        ]);
        let table = engagement_table(&snap).unwrap();
        assert!(edge_null_params(&table, "a", "x").is_empty());
    }

    #[test]
    fn zero_mean_null_keeps_observed_edges() {
        // a and x never share an influencer, yet co-comment nowhere; build
        // a graph with a synthetic cross edge to exercise the rule.
        let snap = snapshot(&[
            ("p1", "i", &["a", "b"]),
            ("p2", "i", &["a", "b"]),
            ("p3", "j", &["x", "y"]),
            ("p4", "j", &["x", "y"]),
        ]);
        let table = engagement_table(&snap).unwrap();
        let summary = edge_null_summary(&table, "a", "x", 0.95, 64).unwrap();
        assert_eq!(summary.support, 0);
        assert_eq!(summary.percentile, 0);
        // gamma >= 1 > 0: kept under the strict rule.
    }

    #[test]
    fn backbone_is_a_weight_preserving_subgraph() {
        let snap = toy_snapshot();
        let graph = build_graph(&snap).unwrap();
        let table = engagement_table(&snap).unwrap();
        let (backbone, report) = extract_backbone(&graph, &table, &BackboneOptions::default()).unwrap();
        assert!(backbone.graph.edge_count() <= graph.edge_count());
        for e in backbone.graph.edges() {
            let a = backbone.graph.vertex_name(e.src);
            let b = backbone.graph.vertex_name(e.dst);
            assert_eq!(graph.weight_between(a, b), Some(e.weight));
        }
        assert_eq!(report.total_edges, graph.edge_count() as u64);
        // No isolated vertices in the result.
        let mut touched = vec![false; backbone.graph.vertex_count()];
        for e in backbone.graph.edges() {
            touched[e.src as usize] = true;
            touched[e.dst as usize] = true;
        }
        assert!(touched.iter().all(|&t| t));
    }

    #[test]
    fn alpha_outside_unit_interval_is_a_config_error() {
        let snap = toy_snapshot();
        let graph = build_graph(&snap).unwrap();
        let table = engagement_table(&snap).unwrap();
        for alpha in [0.0, 1.0, -0.2, 1.5] {
            let opts = BackboneOptions {
                alpha,
                ..BackboneOptions::default()
            };
            assert!(extract_backbone(&graph, &table, &opts).is_err(), "alpha={alpha}");
        }
    }

    #[test]
    fn lenient_filter_keeps_at_least_as_much_as_strict() {
        let snap = toy_snapshot();
        let graph = build_graph(&snap).unwrap();
        let table = engagement_table(&snap).unwrap();
        let (strict, _) = extract_backbone(&graph, &table, &BackboneOptions::default()).unwrap();
        let (lenient, _) = extract_backbone(
            &graph,
            &table,
            &BackboneOptions {
                strict: false,
                ..BackboneOptions::default()
            },
        )
        .unwrap();
        assert!(lenient.graph.edge_count() >= strict.graph.edge_count());
    }

    #[test]
    fn backbone_tsv_roundtrip() {
        let snap = toy_snapshot();
        let graph = build_graph(&snap).unwrap();
        let table = engagement_table(&snap).unwrap();
        let (backbone, _) = extract_backbone(
            &graph,
            &table,
            &BackboneOptions {
                strict: false,
                ..BackboneOptions::default()
            },
        )
        .unwrap();
        let tsv = backbone.to_tsv();
        assert!(tsv.starts_with("#backbone v1 window=1 alpha=0.05 strict=false\n"));
        let parsed = Backbone::from_tsv(&tsv).unwrap();
        assert_eq!(parsed, backbone);
    }

    #[test]
    fn extraction_is_independent_of_thread_count() {
        let snap = toy_snapshot();
        let graph = build_graph(&snap).unwrap();
        let table = engagement_table(&snap).unwrap();
        let (default_run, _) =
            extract_backbone(&graph, &table, &BackboneOptions::default()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let (single_run, _) = pool
            .install(|| extract_backbone(&graph, &table, &BackboneOptions::default()))
            .unwrap();
        assert_eq!(default_run.graph, single_run.graph);
        assert_eq!(default_run.to_tsv(), single_run.to_tsv());
    }
}
