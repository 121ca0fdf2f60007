//! Regression tree grown by variance reduction and simplified by
//! reduced-error pruning against a held-out pruning set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_set, Regressor};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_TRAINING_ROWS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepTreeParams {
    pub min_leaf: usize,
    /// Share of the rows held out for pruning.
    pub prune_fraction: f64,
    pub seed: u64,
}

impl Default for RepTreeParams {
    fn default() -> Self {
        RepTreeParams {
            min_leaf: 2,
            prune_fraction: 1.0 / 3.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node<T> {
    Leaf {
        value: T,
        count: usize,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: T,
        /// Growing-set mean, used if the split gets pruned.
        value: T,
        count: usize,
        left: Box<Node<T>>,
        right: Box<Node<T>>,
    },
}

impl<T: Real> Node<T> {
    pub fn predict(&self, x: &[T]) -> T {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruningStats<T> {
    pub growing_rows: usize,
    pub pruning_rows: usize,
    pub sse_before: T,
    pub sse_after: T,
    pub leaves_before: usize,
    pub leaves_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepTreeModel<T> {
    pub params: RepTreeParams,
    pub n_features: usize,
    pub root: Node<T>,
    pub pruning: PruningStats<T>,
}

/// Seeded split of `0..n` into (growing, pruning) index sets.
pub fn holdout_split(n: usize, prune_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_prune = ((n as f64 * prune_fraction).round() as usize).clamp(1, n - 1);
    let grow = idx.split_off(n_prune);
    let mut grow = grow;
    grow.sort_unstable();
    idx.sort_unstable();
    (grow, idx)
}

impl<T: Real> RepTreeModel<T> {
    pub fn train(x: &[Vec<T>], y: &[T], params: RepTreeParams) -> Result<Self> {
        let d = check_training_set(x, y, MIN_TRAINING_ROWS)?;
        if params.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
        }
        if !(params.prune_fraction > 0.0 && params.prune_fraction < 1.0) {
            return Err(Error::InvalidArgument("prune_fraction must be in (0, 1)".into()));
        }
        let (grow, prune) = holdout_split(x.len(), params.prune_fraction, params.seed);
        let unpruned = grow_node(x, y, grow.clone(), params.min_leaf);
        let sse_before = sse(&unpruned, x, y, &prune);
        let leaves_before = unpruned.leaves();
        let mut root = unpruned;
        let sse_after = prune_node(&mut root, x, y, &prune);
        Ok(RepTreeModel {
            params,
            n_features: d,
            pruning: PruningStats {
                growing_rows: grow.len(),
                pruning_rows: prune.len(),
                sse_before,
                sse_after,
                leaves_before,
                leaves_after: root.leaves(),
            },
            root,
        })
    }
}

impl<T: Real> Regressor<T> for RepTreeModel<T> {
    fn input_dim(&self) -> usize {
        self.n_features
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        check_dim(self.n_features, x.len())?;
        Ok(self.root.predict(x))
    }
}

/// Sum of squared errors of `node` on the given rows.
pub fn sse<T: Real>(node: &Node<T>, x: &[Vec<T>], y: &[T], rows: &[usize]) -> T {
    rows.iter()
        .map(|&i| {
            let r = y[i] - node.predict(&x[i]);
            r * r
        })
        .sum()
}

fn mean_of<T: Real>(y: &[T], rows: &[usize]) -> T {
    rows.iter().map(|&i| y[i]).sum::<T>() / T::from_usize_lossy(rows.len())
}

struct BestSplit<T> {
    feature: usize,
    threshold: T,
    gain: T,
}

/// Best split by reduction of summed squared deviation, which is the
/// size-weighted variance reduction up to the constant factor n.
fn best_split<T: Real>(x: &[Vec<T>], y: &[T], rows: &[usize], min_leaf: usize) -> Option<BestSplit<T>> {
    let n = rows.len();
    let total: T = rows.iter().map(|&i| y[i]).sum();
    let total_sq: T = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent = total_sq - total * total / T::from_usize_lossy(n);
    let mut best: Option<BestSplit<T>> = None;
    let mut order = rows.to_vec();
    for f in 0..x[rows[0]].len() {
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap().then(a.cmp(&b)));
        let mut left_sum = T::zero();
        let mut left_sq = T::zero();
        for k in 1..n {
            let prev = order[k - 1];
            left_sum += y[prev];
            left_sq += y[prev] * y[prev];
            if k < min_leaf || n - k < min_leaf {
                continue;
            }
            let (lo, hi) = (x[prev][f], x[order[k]][f]);
            if !(lo < hi) {
                continue;
            }
            let nl = T::from_usize_lossy(k);
            let nr = T::from_usize_lossy(n - k);
            let right_sum = total - left_sum;
            let right_sq = total_sq - left_sq;
            let children = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
            let gain = parent - children;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let mut threshold = (lo + hi) / T::lit(2.0);
                if !(threshold < hi) {
                    threshold = lo;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    let tiny = T::epsilon() * T::lit(64.0) * total_sq.max(T::min_positive_value());
    best.filter(|b| b.gain > tiny)
}

fn grow_node<T: Real>(x: &[Vec<T>], y: &[T], rows: Vec<usize>, min_leaf: usize) -> Node<T> {
    let value = mean_of(y, &rows);
    let count = rows.len();
    let pure = rows.iter().all(|&i| y[i] == y[rows[0]]);
    if pure || count < 2 * min_leaf {
        return Node::Leaf { value, count };
    }
    match best_split(x, y, &rows, min_leaf) {
        None => Node::Leaf { value, count },
        Some(split) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| x[i][split.feature] <= split.threshold);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                value,
                count,
                left: Box::new(grow_node(x, y, l, min_leaf)),
                right: Box::new(grow_node(x, y, r, min_leaf)),
            }
        }
    }
}

/// Bottom-up reduced-error pruning. Returns the pruning-set SSE of the
/// resulting subtree; a subtree becomes a leaf whenever that does not raise it.
fn prune_node<T: Real>(node: &mut Node<T>, x: &[Vec<T>], y: &[T], rows: &[usize]) -> T {
    let (subtree, as_leaf) = match node {
        Node::Leaf { value, .. } => {
            return rows.iter().map(|&i| (y[i] - *value) * (y[i] - *value)).sum();
        }
        Node::Split {
            feature,
            threshold,
            value,
            left,
            right,
            ..
        } => {
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x[i][*feature] <= *threshold);
            let subtree = prune_node(left, x, y, &l) + prune_node(right, x, y, &r);
            let as_leaf: T = rows.iter().map(|&i| (y[i] - *value) * (y[i] - *value)).sum();
            (subtree, as_leaf)
        }
    };
    if as_leaf <= subtree {
        if let Node::Split { value, count, .. } = *node {
            *node = Node::Leaf { value, count };
        }
        as_leaf
    } else {
        subtree
    }
}
