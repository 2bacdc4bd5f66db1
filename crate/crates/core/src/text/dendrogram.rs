//! Agglomerative clustering of influencers by the correlation of community
//! activity on their posts.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::CommunityInfluencerMatrix;

/// Binary merge tree with merge heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MergeTree {
    Leaf {
        label: String,
    },
    Node {
        height: f64,
        left: Box<MergeTree>,
        right: Box<MergeTree>,
    },
}

impl MergeTree {
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            MergeTree::Leaf { label } => vec![label.as_str()],
            MergeTree::Node { left, right, .. } => {
                let mut out = left.leaves();
                out.extend(right.leaves());
                out
            }
        }
    }

    pub fn height(&self) -> f64 {
        match self {
            MergeTree::Leaf { .. } => 0.0,
            MergeTree::Node { height, .. } => *height,
        }
    }
}

/// Pearson correlation of two equal-length slices. `None` when either side
/// has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return None;
    }
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return None;
    }
    Some(cov / (var_a * var_b).sqrt())
}

/// Cluster influencer columns by average-linkage on 1 - Pearson distance.
///
/// Tie-breaking is by the smallest influencer id of each candidate cluster
/// pair, which makes the tree deterministic.
pub fn influencer_dendrogram(matrix: &CommunityInfluencerMatrix) -> Result<MergeTree> {
    let n = matrix.columns.len();
    if n < 2 {
        return Err(Error::config(
            "dendrogram needs at least two influencer columns",
        ));
    }
    let column = |j: usize| -> Vec<f64> { matrix.rows.iter().map(|r| r[j]).collect() };
    let columns: Vec<Vec<f64>> = (0..n).map(column).collect();

    // Leaf-level distance matrix.
    let mut dist = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let rho = pearson(&columns[a], &columns[b]).ok_or_else(|| {
                let name = if columns[a].iter().all(|&x| x == columns[a][0]) {
                    &matrix.columns[a]
                } else {
                    &matrix.columns[b]
                };
                Error::undefined(format!(
                    "influencer {name:?} has constant activity; correlation undefined"
                ))
            })?;
            dist[a][b] = 1.0 - rho;
            dist[b][a] = 1.0 - rho;
        }
    }

    struct Cluster {
        tree: MergeTree,
        members: Vec<usize>,
        min_label: String,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|j| Cluster {
            tree: MergeTree::Leaf {
                label: matrix.columns[j].clone(),
            },
            members: vec![j],
            min_label: matrix.columns[j].clone(),
        })
        .collect();

    while clusters.len() > 1 {
        // Average linkage over all cross pairs of leaves.
        let linkage = |x: &Cluster, y: &Cluster| -> f64 {
            let mut total = 0.0;
            for &a in &x.members {
                for &b in &y.members {
                    total += dist[a][b];
                }
            }
            total / (x.members.len() * y.members.len()) as f64
        };
        let pair_key = |x: &Cluster, y: &Cluster| -> (String, String) {
            if x.min_label <= y.min_label {
                (x.min_label.clone(), y.min_label.clone())
            } else {
                (y.min_label.clone(), x.min_label.clone())
            }
        };
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = linkage(&clusters[i], &clusters[j]);
                let better = match &best {
                    None => true,
                    Some((bd, bi, bj)) => {
                        d < *bd - 1e-15
                            || ((d - bd).abs() <= 1e-15
                                && pair_key(&clusters[i], &clusters[j])
                                    < pair_key(&clusters[*bi], &clusters[*bj]))
                    }
                };
                if better {
                    best = Some((d, i, j));
                }
            }
        }
        let (height, i, j) = best.expect("at least one pair");
        let right = clusters.swap_remove(j);
        let left = clusters.swap_remove(i);
        let (first, second) = if left.min_label <= right.min_label {
            (left, right)
        } else {
            (right, left)
        };
        let mut members = first.members.clone();
        members.extend(&second.members);
        let min_label = first.min_label.clone();
        clusters.push(Cluster {
            tree: MergeTree::Node {
                height,
                left: Box::new(first.tree),
                right: Box::new(second.tree),
            },
            members,
            min_label,
        });
    }
    Ok(clusters.pop().expect("one cluster remains").tree)
}
