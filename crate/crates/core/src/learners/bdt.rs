//! Gradient-boosted decision trees with logistic loss and Newton leaf
//! estimates. Multi-class tasks train one-vs-rest ensembles; binary tasks
//! train a single positive-class ensemble.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::learners::tree::{Tree, TreeNode};

const EPS: f64 = 1e-12;
const LEAF_CLAMP: f64 = 10.0;
const MIN_GAIN: f64 = 1e-12;
const INACTIVE: u32 = u32::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Weight samples by inverse class frequency.
    pub balance_classes: bool,
}

impl Default for BdtParams {
    fn default() -> Self {
        BdtParams {
            rounds: 100,
            max_depth: 4,
            learning_rate: 0.2,
            min_leaf: 10,
            balance_classes: false,
        }
    }
}

/// Leaf values are stored with the learning rate already applied; a class
/// margin is base + sum of routed leaves, mapped through the sigmoid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdtModel {
    pub params: BdtParams,
    /// Base margin per ensemble (logit of the weighted positive rate).
    pub base: Vec<f64>,
    /// One ensemble per class, or a single ensemble for binary tasks.
    pub ensembles: Vec<Vec<Tree<f64>>>,
    /// Mean training log-loss across ensembles after each round.
    pub loss_trace: Vec<f64>,
}

fn sigmoid(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

fn leaf_value(g: f64, h: f64) -> f64 {
    (-g / (h + EPS)).clamp(-LEAF_CLAMP, LEAF_CLAMP)
}

fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64) -> f64 {
    gl * gl / (hl + EPS) + gr * gr / (hr + EPS) - (gl + gr) * (gl + gr) / (hl + hr + EPS)
}

struct ActiveNode {
    slot: usize,
    g: f64,
    h: f64,
    count: usize,
}

enum NodeOutcome {
    Leaf,
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Builds one regression tree level by level, scanning globally presorted
/// feature orders once per level.
fn build_tree(
    values: &Array2<f64>,
    presort: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    params: &BdtParams,
) -> Tree<f64> {
    let n = values.nrows();
    let mut nodes: Vec<TreeNode<f64>> = vec![TreeNode::Leaf(0.0)];
    let root = ActiveNode {
        slot: 0,
        g: grad.iter().sum(),
        h: hess.iter().sum(),
        count: n,
    };
    let mut active = vec![root];
    let mut node_of = vec![0u32; n];

    for depth in 0..=params.max_depth {
        if active.is_empty() {
            break;
        }
        // Best (gain, feature, threshold) per active node; splits are only
        // searched above the depth budget's last level.
        let mut best: Vec<Option<(f64, usize, f64)>> = vec![None; active.len()];
        if depth < params.max_depth {
            for (f, order) in presort.iter().enumerate() {
                let mut left_g = vec![0.0; active.len()];
                let mut left_h = vec![0.0; active.len()];
                let mut left_n = vec![0usize; active.len()];
                let mut last = vec![f64::NAN; active.len()];
                for &r in order {
                    let a = node_of[r as usize];
                    if a == INACTIVE {
                        continue;
                    }
                    let a = a as usize;
                    let v = values[(r as usize, f)];
                    if left_n[a] > 0 && v > last[a] {
                        let right_n = active[a].count - left_n[a];
                        if left_n[a] >= params.min_leaf && right_n >= params.min_leaf {
                            let gain = split_gain(
                                left_g[a],
                                left_h[a],
                                active[a].g - left_g[a],
                                active[a].h - left_h[a],
                            );
                            let prior = best[a].map_or(MIN_GAIN, |(g, _, _)| g);
                            if gain > prior {
                                best[a] = Some((gain, f, (last[a] + v) / 2.0));
                            }
                        }
                    }
                    left_g[a] += grad[r as usize];
                    left_h[a] += hess[r as usize];
                    left_n[a] += 1;
                    last[a] = v;
                }
            }
        }

        let mut outcomes = Vec::with_capacity(active.len());
        let mut next_active: Vec<ActiveNode> = Vec::new();
        for (a, node) in active.iter().enumerate() {
            match best[a] {
                Some((_, feature, threshold)) => {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf(0.0));
                    let right = nodes.len();
                    nodes.push(TreeNode::Leaf(0.0));
                    nodes[node.slot] = TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    let li = next_active.len();
                    next_active.push(ActiveNode {
                        slot: left,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                    });
                    next_active.push(ActiveNode {
                        slot: right,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                    });
                    outcomes.push(NodeOutcome::Split {
                        feature,
                        threshold,
                        left: li,
                        right: li + 1,
                    });
                }
                None => {
                    let value = leaf_value(node.g, node.h) * params.learning_rate;
                    nodes[node.slot] = TreeNode::Leaf(value);
                    outcomes.push(NodeOutcome::Leaf);
                }
            }
        }

        for r in 0..n {
            let a = node_of[r];
            if a == INACTIVE {
                continue;
            }
            match outcomes[a as usize] {
                NodeOutcome::Leaf => node_of[r] = INACTIVE,
                NodeOutcome::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let child = if values[(r, feature)] <= threshold {
                        left
                    } else {
                        right
                    };
                    next_active[child].g += grad[r];
                    next_active[child].h += hess[r];
                    next_active[child].count += 1;
                    node_of[r] = child as u32;
                }
            }
        }
        active = next_active;
    }
    Tree { nodes }
}

fn row_slice(values: &Array2<f64>, r: usize) -> &[f64] {
    values.row(r).to_slice().expect("row-major feature matrix")
}

fn log_loss(margins: &[f64], targets: &[f64], weights: &[f64]) -> f64 {
    let wsum: f64 = weights.iter().sum();
    let mut total = 0.0;
    for ((&m, &y), &w) in margins.iter().zip(targets).zip(weights) {
        let p = sigmoid(m).clamp(1e-15, 1.0 - 1e-15);
        total += w * -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
    }
    total / wsum
}

fn fit_ensemble(
    values: &Array2<f64>,
    presort: &[Vec<u32>],
    targets: &[f64],
    weights: &[f64],
    params: &BdtParams,
) -> (f64, Vec<Tree<f64>>, Vec<f64>) {
    let n = values.nrows();
    let wsum: f64 = weights.iter().sum();
    let rate = (targets
        .iter()
        .zip(weights)
        .map(|(&y, &w)| y * w)
        .sum::<f64>()
        / wsum)
        .clamp(1e-12, 1.0 - 1e-12);
    let base = (rate / (1.0 - rate)).ln().clamp(-LEAF_CLAMP, LEAF_CLAMP);

    let mut margins = vec![base; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut trace = Vec::with_capacity(params.rounds);
    for _ in 0..params.rounds {
        for r in 0..n {
            let p = sigmoid(margins[r]);
            grad[r] = (p - targets[r]) * weights[r];
            hess[r] = p * (1.0 - p) * weights[r];
        }
        let tree = build_tree(values, presort, &grad, &hess, params);
        for (r, margin) in margins.iter_mut().enumerate() {
            *margin += tree.leaf(row_slice(values, r));
        }
        trees.push(tree);
        trace.push(log_loss(&margins, targets, weights));
    }
    (base, trees, trace)
}

/// Trains on canonicalized data; `classes` are dense indices in
/// 0..n_classes. Training is fully deterministic.
pub fn fit_bdt(
    values: &Array2<f64>,
    classes: &[usize],
    n_classes: usize,
    params: &BdtParams,
) -> BdtModel {
    let n = values.nrows();
    let l = values.ncols();
    let mut presort: Vec<Vec<u32>> = Vec::with_capacity(l);
    for f in 0..l {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            values[(a as usize, f)]
                .partial_cmp(&values[(b as usize, f)])
                .expect("finite feature values")
                .then(a.cmp(&b))
        });
        presort.push(order);
    }

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

    let columns: Vec<usize> = if n_classes == 2 {
        vec![1]
    } else {
        (0..n_classes).collect()
    };
    let mut base = Vec::with_capacity(columns.len());
    let mut ensembles = Vec::with_capacity(columns.len());
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for &c in &columns {
        let targets: Vec<f64> = classes
            .iter()
            .map(|&k| if k == c { 1.0 } else { 0.0 })
            .collect();
        let (b, trees, trace) = fit_ensemble(values, &presort, &targets, &weights, params);
        base.push(b);
        ensembles.push(trees);
        traces.push(trace);
    }

    let loss_trace = (0..params.rounds)
        .map(|t| traces.iter().map(|tr| tr[t]).sum::<f64>() / traces.len() as f64)
        .collect();
    BdtModel {
        params: params.clone(),
        base,
        ensembles,
        loss_trace,
    }
}

/// Per-class sigmoid scores for one query row. Binary models emit
/// [1 - p, p] from the single positive-class ensemble.
pub fn bdt_scores(model: &BdtModel, row: &[f64], n_classes: usize) -> Vec<f64> {
    let margins: Vec<f64> = model
        .ensembles
        .iter()
        .zip(&model.base)
        .map(|(trees, &b)| b + trees.iter().map(|t| t.leaf(row)).sum::<f64>())
        .collect();
    if n_classes == 2 {
        let p = sigmoid(margins[0]);
        vec![1.0 - p, p]
    } else {
        margins.into_iter().map(sigmoid).collect()
    }
}
