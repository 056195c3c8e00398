//! Binary decision tree shared by the forest and boosting learners.

use serde::{Deserialize, Serialize};

/// Slot-indexed tree node; `L` is the leaf payload (class index for forest
/// trees, additive score for boosted trees).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode<L> {
    Leaf(L),
    Split {
        feature: usize,
        /// Rows with `value <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree<L> {
    pub nodes: Vec<TreeNode<L>>,
}

impl<L> Tree<L> {
    pub fn leaf(&self, row: &[f64]) -> &L {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf(payload) => return payload,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<L>(nodes: &[TreeNode<L>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}
