//! Rank and dispersion statistics for the lexicon attribute analysis.

use std::collections::{BTreeMap, BTreeSet};

use crate::special::chi2_sf;
use crate::{Error, Result};

/// Kruskal-Wallis H with tied-rank correction and its chi-squared p-value
/// (groups - 1 degrees of freedom).
///
/// Returns `None` when every sample is identical: the statistic is
/// undefined and the attribute carries no signal.
pub fn kruskal_h(groups: &[Vec<f64>]) -> Result<Option<(f64, f64)>> {
    if groups.len() < 2 {
        return Err(Error::config("Kruskal-Wallis needs at least two groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::config(
            "Kruskal-Wallis needs at least two samples per group",
        ));
    }
    let n: usize = groups.iter().map(Vec::len).sum();

    // Pool and rank with midranks for ties.
    let mut pooled: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (g, samples) in groups.iter().enumerate() {
        for &x in samples {
            pooled.push((x, g));
        }
    }
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("samples must not be NaN"));

    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        let midrank = (i + j + 1) as f64 / 2.0; // average of 1-based ranks i+1..j
        for &(_, g) in &pooled[i..j] {
            rank_sums[g] += midrank;
        }
        tie_term += t * t * t - t;
        i = j;
    }

    let n_f = n as f64;
    let correction = 1.0 - tie_term / (n_f * n_f * n_f - n_f);
    if correction <= 0.0 {
        return Ok(None); // all samples identical
    }
    let mut h = 0.0;
    for (g, samples) in groups.iter().enumerate() {
        h += rank_sums[g] * rank_sums[g] / samples.len() as f64;
    }
    h = 12.0 / (n_f * (n_f + 1.0)) * h - 3.0 * (n_f + 1.0);
    h /= correction;
    let p = chi2_sf(h, (groups.len() - 1) as f64);
    Ok(Some((h, p)))
}

/// Keep attributes whose per-comment distributions differ significantly
/// across communities (Kruskal-Wallis p below the threshold). Attributes
/// with all-identical samples are excluded.
pub fn kruskal_filter(
    samples: &BTreeMap<String, Vec<Vec<f64>>>,
    p_threshold: f64,
) -> Result<BTreeSet<String>> {
    let mut selected = BTreeSet::new();
    for (attribute, groups) in samples {
        if let Some((_, p)) = kruskal_h(groups)? {
            if p < p_threshold {
                selected.insert(attribute.clone());
            }
        }
    }
    Ok(selected)
}

/// Gini coefficient of non-negative values:
/// sum_ij |x_i - x_j| / (2 n^2 mean). Zero mean is defined as zero.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    let mut abs_diff = 0.0;
    for &a in values {
        for &b in values {
            abs_diff += (a - b).abs();
        }
    }
    abs_diff / (2.0 * (n * n) as f64 * mean)
}

/// The `k` attributes with largest Gini coefficient over their per-community
/// means; ties resolve by attribute name.
pub fn gini_rank(means: &BTreeMap<String, Vec<f64>>, k: usize) -> Vec<String> {
    let mut scored: Vec<(&String, f64)> = means
        .iter()
        .map(|(attr, values)| (attr, gini(values)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("gini is finite")
            .then_with(|| a.0.cmp(b.0))
    });
    scored.into_iter().take(k).map(|(a, _)| a.clone()).collect()
}

/// Z-score each column with the population standard deviation. A constant
/// column is an error naming the offending attribute.
pub fn zscore_matrix(rows: &[Vec<f64>], columns: &[String]) -> Result<Vec<Vec<f64>>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let width = columns.len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("ragged matrix in z-score normalization"));
    }
    let n = rows.len() as f64;
    let mut out = vec![vec![0.0; width]; rows.len()];
    for (j, name) in columns.iter().enumerate() {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            return Err(Error::undefined(format!(
                "attribute {name:?} is constant; z-score undefined"
            )));
        }
        let std = var.sqrt();
        for (i, row) in rows.iter().enumerate() {
            out[i][j] = (row[j] - mean) / std;
        }
    }
    Ok(out)
}
