//! Binary classification tree grown by Gini impurity.
//!
//! Shared by the single CART learner and the random forest. Split candidates
//! are midpoints between consecutive distinct feature values of the node.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// A split must reduce total impurity by at least `cp` times the root
    /// impurity.
    pub cp: f64,
    /// Features examined per node; `None` examines all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_depth: None,
            cp: 0.0,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Fraction of class1 rows in the leaf.
        p_class1: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
}

/// Count-weighted Gini impurity `n · 2p(1−p)`.
#[inline]
fn weighted_gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        2.0 * pos * (n - pos) / n
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl DecisionTree {
    /// Grow a tree on `rows` (repeats allowed, e.g. a bootstrap sample).
    /// Impurity decreases are added to `importance`, indexed by feature.
    pub fn fit(
        x: &Matrix,
        y: &[bool],
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut Rng,
        importance: &mut [f64],
    ) -> DecisionTree {
        let mut tree = DecisionTree {
            nodes: Vec::new(),
            n_features: x.cols(),
        };
        let root_pos = rows.iter().filter(|&&i| y[i]).count() as f64;
        let root_impurity = weighted_gini(root_pos, rows.len() as f64);
        let min_decrease = params.cp * root_impurity;

        // (node slot, rows, depth)
        tree.nodes.push(Node::Leaf { p_class1: 0.0, n: 0 });
        let mut stack = vec![(0usize, rows, 0usize)];
        let mut feats: Vec<usize> = (0..x.cols()).collect();
        let mut buf: Vec<(f64, bool)> = Vec::new();
        while let Some((slot, node_rows, depth)) = stack.pop() {
            let n = node_rows.len();
            let pos = node_rows.iter().filter(|&&i| y[i]).count();
            let leaf = Node::Leaf {
                p_class1: if n == 0 { 0.0 } else { pos as f64 / n as f64 },
                n,
            };
            let stop = pos == 0
                || pos == n
                || n < params.min_samples_split
                || n < 2 * params.min_samples_leaf
                || params.max_depth.is_some_and(|d| depth >= d);
            if stop {
                tree.nodes[slot] = leaf;
                continue;
            }
            if let Some(m) = params.max_features.filter(|&m| m < x.cols()) {
                feats = index::sample(rng, x.cols(), m.max(1)).into_vec();
                feats.sort_unstable();
            }
            let parent = weighted_gini(pos as f64, n as f64);
            let best = best_split(x, y, &node_rows, &feats, parent, params.min_samples_leaf, &mut buf);
            match best {
                Some(b) if b.decrease > 0.0 && b.decrease >= min_decrease => {
                    importance[b.feature] += b.decrease;
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        node_rows.into_iter().partition(|&i| x.get(i, b.feature) <= b.threshold);
                    let left = tree.nodes.len();
                    tree.nodes.push(Node::Leaf { p_class1: 0.0, n: 0 });
                    tree.nodes.push(Node::Leaf { p_class1: 0.0, n: 0 });
                    tree.nodes[slot] = Node::Split {
                        feature: b.feature,
                        threshold: b.threshold,
                        left,
                        right: left + 1,
                    };
                    stack.push((left + 1, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
                _ => tree.nodes[slot] = leaf,
            }
        }
        tree
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { p_class1, .. } => return *p_class1,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn best_split(
    x: &Matrix,
    y: &[bool],
    rows: &[usize],
    feats: &[usize],
    parent: f64,
    min_leaf: usize,
    buf: &mut Vec<(f64, bool)>,
) -> Option<BestSplit> {
    let n = rows.len();
    let total_pos = rows.iter().filter(|&&i| y[i]).count() as f64;
    let mut best: Option<BestSplit> = None;
    for &f in feats {
        buf.clear();
        buf.extend(rows.iter().map(|&i| (x.get(i, f), y[i])));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0.0;
        for k in 0..n - 1 {
            if buf[k].1 {
                left_pos += 1.0;
            }
            let nl = k + 1;
            if buf[k].0 == buf[k + 1].0 || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let children = weighted_gini(left_pos, nl as f64) + weighted_gini(total_pos - left_pos, (n - nl) as f64);
            let decrease = parent - children;
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(BestSplit {
                    feature: f,
                    threshold: (buf[k].0 + buf[k + 1].0) / 2.0,
                    decrease,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn fit(x: &Matrix, y: &[bool], params: &TreeParams) -> (DecisionTree, Vec<f64>) {
        let mut rng = Rng::seed_from_u64(0);
        let mut imp = vec![0.0; x.cols()];
        let t = DecisionTree::fit(x, y, (0..x.rows()).collect(), params, &mut rng, &mut imp);
        (t, imp)
    }

    #[test]
    fn stump_splits_at_separating_midpoint() {
        let x = Matrix::from_vec(6, 1, vec![1.0, 2.0, 3.0, 7.0, 8.0, 9.0]).unwrap();
        let y = [true, true, true, false, false, false];
        let params = TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        };
        let (t, imp) = fit(&x, &y, &params);
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, threshold, .. } if threshold == 5.0));
        // root impurity 6·0.5 = 3, children pure
        assert!((imp[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_leaf_is_respected() {
        let x = Matrix::from_vec(6, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = [true, false, false, false, false, false];
        let params = TreeParams {
            min_samples_leaf: 2,
            ..TreeParams::default()
        };
        let (t, _) = fit(&x, &y, &params);
        for node in t.nodes() {
            if let Node::Leaf { n, .. } = node {
                assert!(*n >= 2);
            }
        }
    }

    #[test]
    fn cp_prunes_weak_splits() {
        let x = Matrix::from_vec(8, 1, (0..8).map(f64::from).collect()).unwrap();
        let y = [true, false, true, false, true, true, false, false];
        let params = TreeParams {
            cp: 0.5,
            ..TreeParams::default()
        };
        let (t, imp) = fit(&x, &y, &params);
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(imp, vec![0.0]);
    }

    #[test]
    fn unused_feature_has_zero_importance() {
        let x = Matrix::from_rows(&[
            vec![0.0, 5.0],
            vec![1.0, 5.0],
            vec![2.0, 5.0],
            vec![3.0, 5.0],
        ])
        .unwrap();
        let y = [true, true, false, false];
        let (_, imp) = fit(&x, &y, &TreeParams::default());
        assert!(imp[0] > 0.0);
        assert_eq!(imp[1], 0.0);
    }
}
