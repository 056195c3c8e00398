//! Minimum-redundancy maximum-relevance ranking, difference form:
//! greedily pick argmax of I(f; class) - mean over selected s of I(f; s),
//! with mutual information estimated from equal-frequency discretization.

use crate::error::{Error, Result};
use crate::ranking::{RankMethod, RankingResult};
use crate::table::FeatureTable;

/// Equal-frequency bins with tie awareness: equal values always share a
/// bin, so the discretization is invariant under strictly increasing maps.
pub fn discretize_column(values: &[f64], bins: usize) -> Vec<u16> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("feature values are finite")
            .then(a.cmp(&b))
    });
    let mut out = vec![0u16; n];
    let mut run_bin = 0u16;
    for (pos, &i) in idx.iter().enumerate() {
        if pos == 0 || values[i] != values[idx[pos - 1]] {
            run_bin = (pos * bins / n) as u16;
        }
        out[i] = run_bin;
    }
    out
}

/// Empirical mutual information (natural log) of two discrete columns.
pub fn mutual_information(a: &[u16], b: &[u16], levels_a: usize, levels_b: usize) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut joint = vec![0usize; levels_a * levels_b];
    let mut marg_a = vec![0usize; levels_a];
    let mut marg_b = vec![0usize; levels_b];
    for (&x, &y) in a.iter().zip(b.iter()) {
        joint[x as usize * levels_b + y as usize] += 1;
        marg_a[x as usize] += 1;
        marg_b[y as usize] += 1;
    }
    let mut mi = 0.0;
    for x in 0..levels_a {
        if marg_a[x] == 0 {
            continue;
        }
        for y in 0..levels_b {
            let c = joint[x * levels_b + y];
            if c == 0 {
                continue;
            }
            let pxy = c as f64 / n;
            let px = marg_a[x] as f64 / n;
            let py = marg_b[y] as f64 / n;
            mi += pxy * (pxy / (px * py)).ln();
        }
    }
    mi.max(0.0)
}

/// Greedy mRMR ordering. `scores` hold each feature's criterion value at
/// the moment it was selected (relevance for the first pick). Ties break
/// by ascending feature index.
pub fn mrmr_rank(table: &FeatureTable, bins: usize) -> Result<RankingResult> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "mRMR needs at least 2 bins, got {bins}"
        )));
    }
    let n = table.n();
    if n < bins {
        return Err(Error::InvalidArgument(format!(
            "mRMR needs at least as many samples as bins ({n} < {bins})"
        )));
    }
    let l = table.values.ncols();

    let discretized: Vec<Vec<u16>> = (0..l)
        .map(|j| discretize_column(&table.column(j).to_vec(), bins))
        .collect();

    // Dense class codes in label order.
    let mut class_ids: Vec<u32> = table.labels.clone();
    class_ids.sort_unstable();
    class_ids.dedup();
    let classes: Vec<u16> = table
        .labels
        .iter()
        .map(|l| class_ids.binary_search(l).expect("label present") as u16)
        .collect();
    let c = class_ids.len();

    let relevance: Vec<f64> = (0..l)
        .map(|j| mutual_information(&discretized[j], &classes, bins, c))
        .collect();

    // Pairwise MI is filled lazily; only pairs (selected, unselected) are
    // ever needed.
    let mut pair_mi: Vec<Option<f64>> = vec![None; l * l];
    let pair = |a: usize, b: usize, disc: &[Vec<u16>], cache: &mut Vec<Option<f64>>| -> f64 {
        let key = a.min(b) * l + a.max(b);
        if let Some(v) = cache[key] {
            return v;
        }
        let v = mutual_information(&disc[a], &disc[b], bins, bins);
        cache[key] = Some(v);
        v
    };

    let mut selected: Vec<usize> = Vec::with_capacity(l);
    let mut remaining: Vec<usize> = (0..l).collect();
    let mut scores = vec![0.0; l];

    while !remaining.is_empty() {
        let mut best_f = remaining[0];
        let mut best_score = f64::NEG_INFINITY;
        for &f in &remaining {
            let criterion = if selected.is_empty() {
                relevance[f]
            } else {
                let redundancy: f64 = selected
                    .iter()
                    .map(|&s| pair(f, s, &discretized, &mut pair_mi))
                    .sum::<f64>()
                    / selected.len() as f64;
                relevance[f] - redundancy
            };
            if criterion > best_score {
                best_score = criterion;
                best_f = f;
            }
        }
        scores[best_f] = best_score;
        selected.push(best_f);
        remaining.retain(|&f| f != best_f);
    }

    Ok(RankingResult {
        method: RankMethod::Mrmr,
        order: selected,
        scores,
        fold_id: None,
    })
}
