//! CART trees on Gini impurity, and bagged / randomised ensembles of them.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_first, TrainingData};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Class proportions of the training samples reaching this leaf.
    Leaf(Vec<f64>),
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

struct Grower<'a> {
    data: &'a TrainingData,
    /// Non-constant features examined per split; `d` for a plain tree.
    max_features: usize,
    random_thresholds: bool,
    min_samples_split: usize,
}

/// `n * gini`, from class counts.
fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

impl Grower<'_> {
    fn counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.data.n_classes];
        for &i in samples {
            c[self.data.y[i]] += 1;
        }
        c
    }

    fn value(&self, i: usize, f: usize) -> f64 {
        self.data.x[i * self.data.d + f]
    }

    /// Best `(impurity, feature, threshold)` over a random feature order.
    fn best_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<(f64, usize, f64)> {
        let mut order: Vec<usize> = (0..self.data.d).collect();
        order.shuffle(rng);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut visited = 0;
        let mut values: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        for f in order {
            if visited >= self.max_features {
                break;
            }
            values.clear();
            values.extend(samples.iter().map(|&i| (self.value(i, f), self.data.y[i])));
            let lo = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
            let hi = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
            if lo >= hi {
                continue;
            }
            visited += 1;
            let candidate = if self.random_thresholds {
                let t = rng.random_range(lo..hi);
                let mut left = vec![0; self.data.n_classes];
                let mut right = vec![0; self.data.n_classes];
                let mut n_left = 0;
                for &(v, y) in &values {
                    if v <= t {
                        left[y] += 1;
                        n_left += 1;
                    } else {
                        right[y] += 1;
                    }
                }
                let imp =
                    weighted_gini(&left, n_left) + weighted_gini(&right, values.len() - n_left);
                Some((imp, f, t))
            } else {
                values.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0; self.data.n_classes];
                let mut right = self.counts(samples);
                let mut local: Option<(f64, f64)> = None;
                for k in 0..values.len() - 1 {
                    let y = values[k].1;
                    left[y] += 1;
                    right[y] -= 1;
                    if values[k].0 == values[k + 1].0 {
                        continue;
                    }
                    let imp =
                        weighted_gini(&left, k + 1) + weighted_gini(&right, values.len() - k - 1);
                    if local.is_none_or(|(b, _)| imp < b) {
                        local = Some((imp, values[k].0));
                    }
                }
                local.map(|(imp, t)| (imp, f, t))
            };
            if let Some(c) = candidate {
                if best.is_none_or(|b| c.0 < b.0) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn grow(&self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = vec![Node::Leaf(Vec::new())];
        let mut stack = vec![(0usize, samples)];
        while let Some((id, samples)) = stack.pop() {
            let counts = self.counts(&samples);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure || samples.len() < self.min_samples_split {
                None
            } else {
                self.best_split(&samples, rng)
            };
            match split {
                None => {
                    let n = samples.len() as f64;
                    nodes[id] = Node::Leaf(counts.iter().map(|&c| c as f64 / n).collect());
                }
                Some((_, feature, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = samples
                        .iter()
                        .partition(|&&i| self.value(i, feature) <= threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf(Vec::new()));
                    let right = nodes.len();
                    nodes.push(Node::Leaf(Vec::new()));
                    nodes[id] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    stack.push((right, r));
                    stack.push((left, l));
                }
            }
        }
        Tree { nodes }
    }
}

impl Tree {
    /// Fully grown tree; features are scanned in a seeded random order so
    /// equally good splits are broken reproducibly.
    pub(super) fn fit(data: &TrainingData, min_samples_split: usize, seed: u64) -> Self {
        let grower = Grower {
            data,
            max_features: data.d,
            random_thresholds: false,
            min_samples_split,
        };
        grower.grow((0..data.n).collect(), &mut seed::rng(seed, &[0]))
    }

    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(p) => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Random forest (bootstrap samples, best threshold) or extra-trees
    /// (all samples, one uniform random threshold per candidate feature).
    pub(super) fn fit(
        data: &TrainingData,
        extra: bool,
        n_trees: usize,
        max_features: Option<usize>,
        min_samples_split: usize,
        seed: u64,
    ) -> Self {
        let default_features = ((data.d as f64).sqrt().floor() as usize).max(1);
        let grower = Grower {
            data,
            max_features: max_features.unwrap_or(default_features).min(data.d),
            random_thresholds: extra,
            min_samples_split,
        };
        let trees = (0..n_trees as u64)
            .map(|t| {
                let mut rng = seed::rng(seed, &[1, t]);
                let samples = if extra {
                    (0..data.n).collect()
                } else {
                    (0..data.n).map(|_| rng.random_range(0..data.n)).collect()
                };
                grower.grow(samples, &mut rng)
            })
            .collect();
        Forest { trees }
    }

    /// Number of trees voting for each class.
    pub(super) fn votes(&self, x: &[f64], n_classes: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_classes];
        for t in &self.trees {
            v[argmax_first(t.leaf(x))] += 1.0;
        }
        v
    }
}
