//! Greedy variance-reduction CART with presorted feature columns.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Forest, ForestParams, NodeKind, RegressionTree, TreeNode};
use crate::dataset::Dataset;
use crate::error::{argument, Result};

/// Seed of tree `index` in a forest seeded with `seed` (SplitMix64 finalizer).
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fits one tree, on a bootstrap resample when `params.bootstrap` is set.
pub fn fit_tree(train: &Dataset, params: &ForestParams, tree_seed: u64) -> Result<RegressionTree> {
    params.validate()?;
    if train.is_empty() {
        return Err(argument("cannot fit a tree on an empty dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let n = train.n_rows();
    let sample: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    Ok(Builder::new(train, &sample, params, rng).build())
}

/// Fits `params.n_estimators` trees in parallel; results do not depend on the thread count.
pub fn fit_forest(train: &Dataset, params: &ForestParams) -> Result<Forest> {
    params.validate()?;
    if train.is_empty() {
        return Err(argument("cannot fit a forest on an empty dataset"));
    }
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| fit_tree(train, params, tree_seed(params.seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Forest::new(trees, params.clone(), train.feature_names().to_vec())
}

struct Split {
    feature: usize,
    threshold: f64,
    /// Position in the node's sorted segment of the last sample going left.
    last_left: usize,
}

struct Builder<'a> {
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    n_features: usize,
    /// `columns[f][pos]`: feature `f` of in-bag sample `pos`.
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    /// `sorted[f]`: sample positions ordered by feature `f`; every node owns
    /// the same contiguous range in each of these arrays.
    sorted: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<TreeNode>,
    depth: usize,
}

impl<'a> Builder<'a> {
    fn new(data: &Dataset, sample: &[usize], params: &'a ForestParams, rng: ChaCha8Rng) -> Self {
        let n_features = data.n_features();
        let columns: Vec<Vec<f64>> = (0..n_features)
            .map(|f| sample.iter().map(|&r| data.row(r)[f]).collect())
            .collect();
        let y = sample.iter().map(|&r| data.targets()[r]).collect();
        let sorted = columns
            .iter()
            .map(|col| {
                let mut order: Vec<u32> = (0..sample.len() as u32).collect();
                order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                order
            })
            .collect();
        Builder {
            params,
            rng,
            n_features,
            columns,
            y,
            sorted,
            goes_left: vec![false; sample.len()],
            scratch: Vec::with_capacity(sample.len()),
            nodes: Vec::new(),
            depth: 0,
        }
    }

    fn build(mut self) -> RegressionTree {
        let n = self.y.len();
        self.grow(0, n, 0);
        RegressionTree::from_parts_unchecked(self.nodes, self.depth, self.n_features)
    }

    /// Grows the subtree over segment `[start, end)` and returns its node id.
    fn grow(&mut self, start: usize, end: usize, depth: usize) -> usize {
        self.depth = self.depth.max(depth);
        let id = self.nodes.len();
        let order = self.sorted.first().map(|s| &s[start..end]);
        let (sum, lo, hi) = match order {
            Some(order) => order
                .iter()
                .fold((0.0, f64::INFINITY, f64::NEG_INFINITY), |(s, lo, hi), &p| {
                    let v = self.y[p as usize];
                    (s + v, lo.min(v), hi.max(v))
                }),
            // no features: every sample is in one leaf
            None => {
                let s: f64 = self.y.iter().sum();
                (s, 0.0, 0.0)
            }
        };
        let count = end - start;
        let value = sum / count as f64;
        self.nodes.push(TreeNode::leaf(value, count as u64));

        let min_leaf = self.params.min_samples_leaf;
        if depth >= self.params.max_depth || count < 2 * min_leaf || lo == hi {
            return id;
        }
        let Some(split) = self.best_split(start, end, sum) else {
            return id;
        };

        self.partition(start, end, &split);
        let mid = split.last_left + 1;
        let left = self.grow(start, mid, depth + 1);
        let right = self.grow(mid, end, depth + 1);
        self.nodes[id].kind = NodeKind::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let f = self.n_features;
        if self.params.feature_fraction >= 1.0 {
            return (0..f).collect();
        }
        let k = ((self.params.feature_fraction * f as f64).round() as usize).clamp(1, f);
        let mut chosen = index::sample(&mut self.rng, f, k).into_vec();
        chosen.sort_unstable();
        chosen
    }

    /// Maximizes `S_l²/n_l + S_r²/n_r`, which is equivalent to maximizing the
    /// decrease in summed squared error. Ties keep the earliest candidate
    /// (lowest feature, then smallest threshold).
    fn best_split(&mut self, start: usize, end: usize, sum: f64) -> Option<Split> {
        let n = end - start;
        let min_leaf = self.params.min_samples_leaf;
        let parent_score = sum * sum / n as f64;
        let mut best_score = parent_score + parent_score.abs() * 1e-12;
        let mut best = None;
        for f in self.candidate_features() {
            let col = &self.columns[f];
            let order = &self.sorted[f][start..end];
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                let pos = order[i] as usize;
                left_sum += self.y[pos];
                let n_left = i + 1;
                if n_left < min_leaf {
                    continue;
                }
                if n - n_left < min_leaf {
                    break;
                }
                let (v, next) = (col[pos], col[order[i + 1] as usize]);
                if v >= next {
                    continue;
                }
                let right_sum = sum - left_sum;
                let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64;
                if score > best_score {
                    best_score = score;
                    let mut threshold = 0.5 * (v + next);
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature: f,
                        threshold,
                        last_left: start + i,
                    });
                }
            }
        }
        best
    }

    /// Stable partition of every feature's segment into left then right.
    fn partition(&mut self, start: usize, end: usize, split: &Split) {
        for (i, &pos) in self.sorted[split.feature][start..end].iter().enumerate() {
            self.goes_left[pos as usize] = start + i <= split.last_left;
        }
        for f in 0..self.n_features {
            if f == split.feature {
                continue;
            }
            let segment = &mut self.sorted[f][start..end];
            self.scratch.clear();
            let mut write = 0;
            for k in 0..segment.len() {
                let pos = segment[k];
                if self.goes_left[pos as usize] {
                    segment[write] = pos;
                    write += 1;
                } else {
                    self.scratch.push(pos);
                }
            }
            segment[write..].copy_from_slice(&self.scratch);
        }
    }
}
