//! k-nearest-neighbor classifier over z-scored features with Euclidean
//! distance and majority vote.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Training rows are stored already z-scored; queries are standardized with
/// the stored column means and deviations (constant columns use deviation 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    /// Dense class index per stored row.
    pub classes: Vec<usize>,
}

pub fn fit_knn(values: &Array2<f64>, classes: &[usize], k: usize) -> KnnModel {
    let n = values.nrows();
    let l = values.ncols();
    let mut means = vec![0.0; l];
    let mut stds = vec![0.0; l];
    for f in 0..l {
        let col = values.column(f);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        means[f] = mean;
        stds[f] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let rows = (0..n)
        .map(|r| {
            (0..l)
                .map(|f| (values[(r, f)] - means[f]) / stds[f])
                .collect()
        })
        .collect();
    KnnModel {
        k,
        means,
        stds,
        rows,
        classes: classes.to_vec(),
    }
}

/// Vote fractions per class among the k nearest stored rows. Distance ties
/// at the k-boundary are resolved by lower stored-row index. The winning
/// class (used by the caller's argmax) is the one with most votes; equal
/// votes go to the class with the smaller mean neighbor distance, then the
/// lower class index.
pub fn knn_scores(model: &KnnModel, row: &[f64], n_classes: usize) -> Vec<f64> {
    let query: Vec<f64> = row
        .iter()
        .zip(&model.means)
        .zip(&model.stds)
        .map(|((&v, &m), &s)| (v - m) / s)
        .collect();
    let mut dist: Vec<(f64, usize)> = model
        .rows
        .iter()
        .enumerate()
        .map(|(i, stored)| {
            let d2: f64 = stored
                .iter()
                .zip(&query)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            (d2.sqrt(), i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));

    let k = model.k.min(dist.len());
    let mut votes = vec![0.0; n_classes];
    let mut dist_sum = vec![0.0; n_classes];
    for &(d, i) in &dist[..k] {
        let c = model.classes[i];
        votes[c] += 1.0;
        dist_sum[c] += d;
    }

    // Nudge the winner so argmax reflects the vote count with the distance
    // and index tie-breaks, while keeping scores within vote fractions.
    let mut winner = 0;
    for c in 1..n_classes {
        let better = votes[c] > votes[winner]
            || (votes[c] == votes[winner]
                && votes[c] > 0.0
                && dist_sum[c] / votes[c] < dist_sum[winner] / votes[winner].max(1.0));
        if better {
            winner = c;
        }
    }
    let mut scores: Vec<f64> = votes.iter().map(|&v| v / k as f64).collect();
    let bump = 0.5 / k as f64;
    scores[winner] += bump;
    let total: f64 = scores.iter().sum();
    scores.iter_mut().for_each(|s| *s /= total);
    scores
}
