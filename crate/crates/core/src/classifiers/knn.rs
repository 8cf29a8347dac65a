use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::linalg::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<usize>,
}

impl Knn {
    pub(super) fn fit(data: &TrainingData, k: usize) -> Self {
        Knn {
            k: k.min(data.n),
            d: data.d,
            x: data.x.clone(),
            y: data.y.clone(),
        }
    }

    /// Vote counts among the k nearest (Euclidean) training vectors.
    ///
    /// With one training vector per class every vote count is 1, so a
    /// fractional bonus in (0, 0.5] is added for how early a class's first
    /// neighbour appears: equal votes go to the class holding the closer
    /// neighbour.
    pub(super) fn scores(&self, q: &[f64], n_classes: usize) -> Vec<f64> {
        let n = self.y.len();
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|i| (sq_dist(&self.x[i * self.d..(i + 1) * self.d], q), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.max(1);
        let mut votes = vec![0.0; n_classes];
        let mut first_rank: Vec<Option<usize>> = vec![None; n_classes];
        for (rank, &(_, i)) in order.iter().take(k).enumerate() {
            let c = self.y[i];
            votes[c] += 1.0;
            first_rank[c].get_or_insert(rank);
        }
        for (v, r) in votes.iter_mut().zip(first_rank) {
            if let Some(r) = r {
                *v += 0.5 * (1.0 - r as f64 / k as f64);
            }
        }
        votes
    }
}
