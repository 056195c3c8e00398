//! Bagged decision forest with Gini splits and per-split feature
//! subsampling.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::learners::tree::{Tree, TreeNode};
use crate::learners::stream_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfParams {
    pub trees: usize,
    pub min_leaf: usize,
    /// Features examined per split; None means floor(sqrt(L)).
    pub mtry: Option<usize>,
    /// Weight samples by inverse class frequency.
    pub balance_classes: bool,
}

impl Default for DfParams {
    fn default() -> Self {
        DfParams {
            trees: 100,
            min_leaf: 5,
            mtry: None,
            balance_classes: false,
        }
    }
}

/// Forest state: each tree votes one class index per query; the model score
/// for a class is its fraction of tree votes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfModel {
    pub params: DfParams,
    pub trees: Vec<Tree<usize>>,
}

struct TreeBuilder<'a> {
    values: &'a Array2<f64>,
    classes: &'a [usize],
    weights: &'a [f64],
    n_classes: usize,
    min_leaf: usize,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode<usize>>,
}

impl TreeBuilder<'_> {
    fn weighted_counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &i in rows {
            counts[self.classes[i]] += self.weights[i];
        }
        counts
    }

    fn majority(counts: &[f64]) -> usize {
        let mut best = 0;
        for (c, &v) in counts.iter().enumerate() {
            if v > counts[best] {
                best = c;
            }
        }
        best
    }

    fn gini(counts: &[f64], total: f64) -> f64 {
        if total <= 0.0 {
            return 0.0;
        }
        1.0 - counts.iter().map(|&c| (c / total) * (c / total)).sum::<f64>()
    }

    /// Sampled feature subset for one split, ascending for a fixed
    /// evaluation order.
    fn sample_features(&mut self) -> Vec<usize> {
        let l = self.values.ncols();
        let mut pool: Vec<usize> = (0..l).collect();
        for i in 0..self.mtry.min(l) {
            let j = self.rng.gen_range(i..l);
            pool.swap(i, j);
        }
        let mut picked = pool[..self.mtry.min(l)].to_vec();
        picked.sort_unstable();
        picked
    }

    fn build(&mut self, rows: Vec<usize>) -> usize {
        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf(0));

        let counts = self.weighted_counts(&rows);
        let total: f64 = counts.iter().sum();
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || rows.len() < 2 * self.min_leaf {
            self.nodes[slot] = TreeNode::Leaf(Self::majority(&counts));
            return slot;
        }

        let parent_gini = Self::gini(&counts, total);
        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.sample_features() {
            let mut order: Vec<usize> = rows.clone();
            order.sort_by(|&a, &b| {
                self.values[(a, f)]
                    .partial_cmp(&self.values[(b, f)])
                    .expect("finite feature values")
                    .then(a.cmp(&b))
            });
            let mut left_counts = vec![0.0; self.n_classes];
            let mut left_weight = 0.0;
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left_counts[self.classes[i]] += self.weights[i];
                left_weight += self.weights[i];
                let v = self.values[(i, f)];
                let next = self.values[(order[pos + 1], f)];
                if next <= v {
                    continue;
                }
                let left_n = pos + 1;
                let right_n = order.len() - left_n;
                if left_n < self.min_leaf || right_n < self.min_leaf {
                    continue;
                }
                let right_counts: Vec<f64> = counts
                    .iter()
                    .zip(left_counts.iter())
                    .map(|(t, l)| t - l)
                    .collect();
                let right_weight = total - left_weight;
                let child_gini = (left_weight * Self::gini(&left_counts, left_weight)
                    + right_weight * Self::gini(&right_counts, right_weight))
                    / total;
                let gain = parent_gini - child_gini;
                if gain > best.map_or(1e-12, |(g, _, _)| g) {
                    best = Some((gain, f, (v + next) / 2.0));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            self.nodes[slot] = TreeNode::Leaf(Self::majority(&counts));
            return slot;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.values[(i, feature)] <= threshold);
        let left = self.build(left_rows);
        let right = self.build(right_rows);
        self.nodes[slot] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

/// Trains the forest on canonicalized data. `classes` are dense class
/// indices (0..n_classes).
pub fn fit_forest(
    values: &Array2<f64>,
    classes: &[usize],
    n_classes: usize,
    params: &DfParams,
    seed: u64,
) -> DfModel {
    let n = values.nrows();
    let l = values.ncols();
    let mtry = params.mtry.unwrap_or(((l as f64).sqrt().floor() as usize).max(1));

    let mut weights = vec![1.0; n];
    if params.balance_classes {
        let mut freq = vec![0usize; n_classes];
        for &c in classes {
            freq[c] += 1;
        }
        for (w, &c) in weights.iter_mut().zip(classes.iter()) {
            *w = n as f64 / (n_classes as f64 * freq[c] as f64);
        }
    }

    let mut trees = Vec::with_capacity(params.trees);
    for t in 0..params.trees {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, t as u64));
        let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        rows.sort_unstable();
        let mut builder = TreeBuilder {
            values,
            classes,
            weights: &weights,
            n_classes,
            min_leaf: params.min_leaf,
            mtry,
            rng,
            nodes: Vec::new(),
        };
        builder.build(rows);
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }
    DfModel {
        params: params.clone(),
        trees,
    }
}

/// Vote fractions per class for one query row.
pub fn forest_scores(model: &DfModel, row: &[f64], n_classes: usize) -> Vec<f64> {
    let mut votes = vec![0.0; n_classes];
    for tree in &model.trees {
        votes[*tree.leaf(row)] += 1.0;
    }
    let total = model.trees.len() as f64;
    votes.iter_mut().for_each(|v| *v /= total);
    votes
}
