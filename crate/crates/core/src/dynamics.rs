//! Temporal metrics across consecutive windows: membership persistence,
//! NMI over persisted members, engaged-commenter cohorts, and topic-based
//! community matching.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::community::CommunityAssignment;
use crate::ingest::Snapshot;
use crate::nullmodel::Backbone;
use crate::text::{cosine_similarity, SparseVector};
use crate::{Error, Result};

/// Fraction of window-w backbone members still present in window w+1.
pub fn persistence(backbone_w: &Backbone, backbone_w1: &Backbone) -> Result<f64> {
    let from = backbone_w.vertex_set();
    if from.is_empty() {
        return Err(Error::undefined("persistence of an empty backbone"));
    }
    let present = from
        .iter()
        .filter(|v| backbone_w1.graph.contains_vertex(v))
        .count();
    Ok(present as f64 / from.len() as f64)
}

/// Normalized mutual information between two community partitions,
/// restricted to `persisted`. Natural logarithms; the normalization by
/// sqrt(H(X) H(Y)) makes the base irrelevant.
///
/// Degenerate cases: if both partitions are single-community over the
/// persisted set the NMI is 1 (no information lost); if exactly one is, it
/// is 0.
pub fn membership_nmi(
    labels_w: &BTreeMap<String, u32>,
    labels_w1: &BTreeMap<String, u32>,
    persisted: &BTreeSet<String>,
) -> Result<f64> {
    if persisted.is_empty() {
        return Err(Error::undefined("NMI over an empty persisted set"));
    }
    let mut joint: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for vertex in persisted {
        let x = labels_w
            .get(vertex)
            .ok_or_else(|| Error::invalid(format!("{vertex:?} unlabeled in window w")))?;
        let y = labels_w1
            .get(vertex)
            .ok_or_else(|| Error::invalid(format!("{vertex:?} unlabeled in window w+1")))?;
        *joint.entry((*x, *y)).or_insert(0) += 1;
    }
    let n = persisted.len() as f64;
    let mut px: BTreeMap<u32, f64> = BTreeMap::new();
    let mut py: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(x, y), &count) in &joint {
        *px.entry(x).or_insert(0.0) += count as f64 / n;
        *py.entry(y).or_insert(0.0) += count as f64 / n;
    }
    let hx: f64 = -px.values().map(|p| p * p.ln()).sum::<f64>();
    let hy: f64 = -py.values().map(|p| p * p.ln()).sum::<f64>();
    if hx == 0.0 && hy == 0.0 {
        return Ok(1.0);
    }
    if hx == 0.0 || hy == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (&(x, y), &count) in &joint {
        let pxy = count as f64 / n;
        mi += pxy * (pxy / (px[&x] * py[&y])).ln();
    }
    Ok((mi / (hx * hy).sqrt()).clamp(0.0, 1.0))
}

/// The ceil(fraction * |V^b|) backbone members with the most comments in the
/// window; ties go to the lexicographically smaller commenter id.
pub fn top_k_commenters(
    snapshot: &Snapshot,
    backbone: &Backbone,
    fraction: f64,
) -> Result<BTreeSet<String>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config(format!(
            "cohort fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let members = backbone.vertex_set();
    let mut counts: BTreeMap<&str, u64> = members.iter().map(|m| (m.as_str(), 0)).collect();
    for record in &snapshot.comments {
        if let Some(c) = counts.get_mut(record.commenter.as_str()) {
            *c += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let k = ((fraction * members.len() as f64).ceil() as usize).min(members.len());
    Ok(ranked[..k].iter().map(|(name, _)| name.to_string()).collect())
}

/// Match window-w communities to window-(w+1) communities by TF-IDF cosine.
///
/// Community j maps to the most similar document of the next window provided
/// that similarity strictly exceeds the similarity to `baseline`, the
/// "average community" of the next window; otherwise it has no match.
/// Several communities may map to the same target.
pub fn match_communities(
    docs_w: &[SparseVector],
    docs_w1: &[SparseVector],
    baseline_w1: &SparseVector,
) -> Vec<Option<(usize, f64)>> {
    docs_w
        .iter()
        .map(|doc| {
            let threshold = cosine_similarity(doc, baseline_w1);
            let mut best: Option<(usize, f64)> = None;
            for (k, candidate) in docs_w1.iter().enumerate() {
                let sim = cosine_similarity(doc, candidate);
                if best.is_none_or(|(_, bs)| sim > bs) {
                    best = Some((k, sim));
                }
            }
            best.filter(|&(_, sim)| sim > threshold)
        })
        .collect()
}

/// Engagement cohorts used by the temporal report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cohort {
    #[serde(rename = "all")]
    All,
    #[serde(rename = "top1pct")]
    Top1Pct,
    #[serde(rename = "top5pct")]
    Top5Pct,
}

impl Cohort {
    pub fn fraction(self) -> Option<f64> {
        match self {
            Cohort::All => None,
            Cohort::Top1Pct => Some(0.01),
            Cohort::Top5Pct => Some(0.05),
        }
    }
}

/// One community-to-community match in a transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub community_from: u32,
    /// `None` encodes "no match".
    pub community_to: Option<u32>,
    pub similarity: Option<f64>,
}

/// One (window pair, cohort) entry of the temporal report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub window_from: u32,
    pub window_to: u32,
    pub cohort: Cohort,
    pub persistence: f64,
    pub nmi: f64,
    /// Topic matches are cohort-independent and attached to the `All` entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<Vec<MatchRecord>>,
}

/// Everything the temporal analysis needs to know about one window.
pub struct WindowArtifacts<'a> {
    pub snapshot: &'a Snapshot,
    pub backbone: &'a Backbone,
    pub assignment: &'a CommunityAssignment,
    /// Per-community TF-IDF vectors, indexed by community id.
    pub docs: &'a [SparseVector],
    /// The "average community" vector of this window.
    pub baseline_doc: &'a SparseVector,
}

/// Build the per-cohort transition records for one consecutive window pair.
///
/// Cohorts restrict both persistence and NMI to their members: persistence
/// becomes the fraction of cohort members still in the next backbone, NMI is
/// computed over those that persisted. An empty persisted set contributes
/// zeros rather than an error so a report row always exists.
pub fn transition(from: &WindowArtifacts, to: &WindowArtifacts) -> Result<Vec<TransitionRecord>> {
    let mut records = Vec::with_capacity(3);
    for cohort in [Cohort::All, Cohort::Top1Pct, Cohort::Top5Pct] {
        let base: BTreeSet<String> = match cohort.fraction() {
            None => from.backbone.vertex_set().iter().cloned().collect(),
            Some(fraction) => top_k_commenters(from.snapshot, from.backbone, fraction)?,
        };
        let persisted: BTreeSet<String> = base
            .iter()
            .filter(|v| to.backbone.graph.contains_vertex(v))
            .cloned()
            .collect();
        let persistence = if base.is_empty() {
            0.0
        } else {
            persisted.len() as f64 / base.len() as f64
        };
        let nmi = if persisted.is_empty() {
            0.0
        } else {
            membership_nmi(&from.assignment.labels, &to.assignment.labels, &persisted)?
        };
        let matches = match cohort {
            Cohort::All => Some(
                match_communities(from.docs, to.docs, to.baseline_doc)
                    .into_iter()
                    .enumerate()
                    .map(|(j, matched)| MatchRecord {
                        community_from: j as u32,
                        community_to: matched.map(|(k, _)| k as u32),
                        similarity: matched.map(|(_, sim)| sim),
                    })
                    .collect(),
            ),
            _ => None,
        };
        records.push(TransitionRecord {
            window_from: from.snapshot.window_index,
            window_to: to.snapshot.window_index,
            cohort,
            persistence,
            nmi,
            matches,
        });
    }
    Ok(records)
}
