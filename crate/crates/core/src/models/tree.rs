//! CART trees: Gini splits for a binary outcome, variance splits for a
//! continuous one.
//!
//! Each node keeps, for every continuous feature, its samples sorted by that
//! feature; splitting partitions those lists stably, so sorting happens once
//! per tree. Binary features need no ordering and are scanned directly.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::rng::below;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Class-1 probability or mean outcome.
        value: f64,
        n: usize,
        /// Sorted training outcomes, when kept.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Depth-1 tree on `feature` with the given leaf values.
    pub fn stump(feature: usize, threshold: f64, left: f64, right: f64) -> Self {
        Self {
            nodes: vec![
                TreeNode::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf {
                    value: left,
                    n: 0,
                    values: None,
                },
                TreeNode::Leaf {
                    value: right,
                    n: 0,
                    values: None,
                },
            ],
        }
    }

    fn leaf(&self, x: &[f64]) -> &TreeNode {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.leaf(x) {
            TreeNode::Leaf { value, .. } => *value,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    /// Fraction of training outcomes in the leaf above `threshold`.
    pub fn exceedance(&self, x: &[f64], threshold: f64) -> Option<f64> {
        match self.leaf(x) {
            TreeNode::Leaf {
                values: Some(v), ..
            } => {
                let above = v.len() - v.partition_point(|y| *y <= threshold);
                Some(above as f64 / v.len().max(1) as f64)
            }
            _ => None,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub classification: bool,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features tried per split; all when `None`.
    pub max_features: Option<usize>,
    pub laplace: bool,
    pub keep_leaf_values: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            classification: false,
            max_depth: None,
            min_leaf: 1,
            max_features: None,
            laplace: true,
            keep_leaf_values: false,
        }
    }
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    /// Row of each sample position (bootstrap samples repeat rows).
    rows: &'a [usize],
    binary: Vec<bool>,
    params: TreeParams,
    rng: R,
    nodes: Vec<TreeNode>,
    // scratch: side of each sample position for the current split
    goes_left: Vec<bool>,
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Sum of squared per-class (or per-side) sums over counts, the quantity a
/// split maximises for both Gini and variance impurity.
fn side_score(classification: bool, n: f64, s: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else if classification {
        (s * s + (n - s) * (n - s)) / n
    } else {
        s * s / n
    }
}

impl<R: RngCore> Builder<'_, R> {
    fn leaf(&self, samples: &[usize]) -> TreeNode {
        let n = samples.len();
        let sum: f64 = samples.iter().map(|&p| self.y[self.rows[p]]).sum();
        let value = if self.params.classification && self.params.laplace {
            (sum + 1.0) / (n as f64 + 2.0)
        } else {
            sum / n as f64
        };
        let values = self.params.keep_leaf_values.then(|| {
            let mut v: Vec<f64> = samples.iter().map(|&p| self.y[self.rows[p]]).collect();
            v.sort_by(f64::total_cmp);
            v
        });
        TreeNode::Leaf { value, n, values }
    }

    fn candidate_features(&mut self, m: usize) -> (Vec<usize>, Vec<usize>) {
        match self.params.max_features {
            Some(k) if k < m => {
                let mut all: Vec<usize> = (0..m).collect();
                for i in 0..k {
                    let j = i + below(&mut self.rng, m - i);
                    all.swap(i, j);
                }
                let rest = all.split_off(k);
                all.sort_unstable();
                let mut rest = rest;
                rest.sort_unstable();
                (all, rest)
            }
            _ => ((0..m).collect(), Vec::new()),
        }
    }

    fn best_split(&self, features: &[usize], samples: &[usize], sorted: &[Vec<usize>]) -> Option<Best> {
        let n = samples.len() as f64;
        let total: f64 = samples.iter().map(|&p| self.y[self.rows[p]]).sum();
        let parent = side_score(self.params.classification, n, total);
        let min_leaf = self.params.min_leaf as f64;
        let eps = 1e-12 * parent.abs().max(1e-300);
        let mut best: Option<Best> = None;
        for &f in features {
            let col = &self.x[f];
            if self.binary[f] {
                let (mut nl, mut sl) = (0.0, 0.0);
                for &p in samples {
                    let r = self.rows[p];
                    if col[r] == 0.0 {
                        nl += 1.0;
                        sl += self.y[r];
                    }
                }
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let score = side_score(self.params.classification, nl, sl)
                    + side_score(self.params.classification, nr, total - sl);
                if score > parent + eps && best.as_ref().is_none_or(|b| score > b.score + eps) {
                    best = Some(Best {
                        feature: f,
                        threshold: 0.5,
                        score,
                    });
                }
            } else {
                let order = &sorted[f];
                let (mut nl, mut sl) = (0.0, 0.0);
                for w in 0..order.len().saturating_sub(1) {
                    let r = self.rows[order[w]];
                    nl += 1.0;
                    sl += self.y[r];
                    let next = col[self.rows[order[w + 1]]];
                    if col[r] == next || nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let score = side_score(self.params.classification, nl, sl)
                        + side_score(self.params.classification, n - nl, total - sl);
                    if score > parent + eps && best.as_ref().is_none_or(|b| score > b.score + eps) {
                        let mut threshold = col[r] + (next - col[r]) / 2.0;
                        if threshold >= next {
                            threshold = col[r];
                        }
                        best = Some(Best {
                            feature: f,
                            threshold,
                            score,
                        });
                    }
                }
            }
        }
        best
    }

    fn grow(&mut self, samples: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            value: 0.0,
            n: 0,
            values: None,
        });
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        let m = self.x.len();
        let best = if depth_ok && samples.len() >= 2 * self.params.min_leaf {
            let (tried, rest) = self.candidate_features(m);
            self.best_split(&tried, &samples, &sorted)
                .or_else(|| self.best_split(&rest, &samples, &sorted))
        } else {
            None
        };
        let Some(best) = best else {
            self.nodes[id] = self.leaf(&samples);
            return id;
        };
        let col = &self.x[best.feature];
        for &p in &samples {
            self.goes_left[p] = col[self.rows[p]] <= best.threshold;
        }
        let (ls, rs): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&p| self.goes_left[p]);
        let mut lsorted = Vec::with_capacity(m);
        let mut rsorted = Vec::with_capacity(m);
        for list in sorted {
            let (a, b): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&p| self.goes_left[p]);
            lsorted.push(a);
            rsorted.push(b);
        }
        let left = self.grow(ls, lsorted, depth + 1);
        let right = self.grow(rs, rsorted, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }
}

/// Fits a tree to the sample positions `rows` (indices into `y` and each
/// column of `x`; repeats allowed). `binary[f]` marks 0/1 features.
pub fn fit_tree<R: RngCore>(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    binary: &[bool],
    params: TreeParams,
    rng: R,
) -> Tree {
    let positions: Vec<usize> = (0..rows.len()).collect();
    let sorted: Vec<Vec<usize>> = x
        .iter()
        .zip(binary)
        .map(|(col, &b)| {
            if b {
                Vec::new()
            } else {
                let mut p = positions.clone();
                p.sort_by(|&a, &c| col[rows[a]].total_cmp(&col[rows[c]]).then(a.cmp(&c)));
                p
            }
        })
        .collect();
    let mut builder = Builder {
        x,
        y,
        rows,
        binary: binary.to_vec(),
        params,
        rng,
        nodes: Vec::new(),
        goes_left: vec![false; rows.len()],
    };
    builder.grow(positions, sorted, 0);
    Tree {
        nodes: builder.nodes,
    }
}
