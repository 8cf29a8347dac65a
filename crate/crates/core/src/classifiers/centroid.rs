use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::linalg::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestCentroid {
    d: usize,
    centroids: Vec<f64>,
}

impl NearestCentroid {
    pub(super) fn fit(data: &TrainingData) -> Self {
        NearestCentroid {
            d: data.d,
            centroids: data.class_means(),
        }
    }

    /// Negative squared distance to each class mean.
    pub(super) fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.centroids
            .chunks_exact(self.d)
            .map(|c| -sq_dist(c, x))
            .collect()
    }
}
