//! Two-component PCA over z-scored community feature rows.

use crate::{Error, Result};

/// Result of [`pca_2d`]: 2-D coordinates per row and the loading vectors.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Pca2d {
    /// One (PC1, PC2) pair per input row.
    pub coordinates: Vec<[f64; 2]>,
    /// One (PC1, PC2) loading pair per metric.
    pub loadings: Vec<[f64; 2]>,
    /// Fraction of total variance carried by each component.
    pub explained: [f64; 2],
}

/// Project rows onto their top two principal components.
///
/// Columns are z-score standardized (population std) first, so the
/// decomposition runs on the correlation matrix; a constant column is an
/// error naming the metric. Eigenvector signs are fixed so the
/// largest-magnitude loading of each component is positive.
pub fn pca_2d(rows: &[Vec<f64>], metric_names: &[&str]) -> Result<Pca2d> {
    let width = metric_names.len();
    if rows.len() < 3 {
        return Err(Error::config(format!(
            "PCA needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    if width < 2 {
        return Err(Error::config("PCA needs at least 2 metrics"));
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("ragged feature matrix"));
    }
    let n = rows.len() as f64;

    let mut standardized = vec![vec![0.0; width]; rows.len()];
    for j in 0..width {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            return Err(Error::undefined(format!(
                "metric {:?} is constant; PCA undefined",
                metric_names[j]
            )));
        }
        let std = var.sqrt();
        for (i, row) in rows.iter().enumerate() {
            standardized[i][j] = (row[j] - mean) / std;
        }
    }

    // Correlation matrix (population covariance of z-scored columns).
    let mut cov = vec![vec![0.0; width]; width];
    for a in 0..width {
        for b in a..width {
            let s: f64 = standardized.iter().map(|r| r[a] * r[b]).sum::<f64>() / n;
            cov[a][b] = s;
            cov[b][a] = s;
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .expect("eigenvalues are finite")
            .then(a.cmp(&b))
    });

    let total: f64 = eigenvalues.iter().map(|&l| l.max(0.0)).sum();
    let mut components = [vec![0.0; width], vec![0.0; width]];
    let mut explained = [0.0, 0.0];
    for (slot, &idx) in order.iter().take(2).enumerate() {
        let mut vector: Vec<f64> = (0..width).map(|r| eigenvectors[r][idx]).collect();
        // Sign convention: the largest-magnitude loading is positive.
        let dominant = (0..width)
            .max_by(|&a, &b| {
                vector[a]
                    .abs()
                    .partial_cmp(&vector[b].abs())
                    .expect("loadings are finite")
                    .then(b.cmp(&a))
            })
            .expect("width >= 2");
        if vector[dominant] < 0.0 {
            for v in &mut vector {
                *v = -*v;
            }
        }
        explained[slot] = if total > 0.0 {
            eigenvalues[idx].max(0.0) / total
        } else {
            0.0
        };
        components[slot] = vector;
    }

    let coordinates = standardized
        .iter()
        .map(|row| {
            [
                row.iter().zip(&components[0]).map(|(x, l)| x * l).sum(),
                row.iter().zip(&components[1]).map(|(x, l)| x * l).sum(),
            ]
        })
        .collect();
    let loadings = (0..width)
        .map(|j| [components[0][j], components[1][j]])
        .collect();

    Ok(Pca2d {
        coordinates,
        loadings,
        explained,
    })
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors as columns). Deterministic; fine for the
/// handful-of-metrics matrices this crate works with.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let eigenvalues = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}
