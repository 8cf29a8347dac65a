use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::linalg::{cholesky, cholesky_solve, dot};
use crate::Result;

/// Linear discriminant analysis with a shrunk pooled covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lda {
    d: usize,
    coef: Vec<f64>,
    intercept: Vec<f64>,
}

impl Lda {
    /// `S = (1 - g) * Sw + g * (tr(Sw) / d) * I`, where `Sw` is the pooled
    /// within-class covariance (divided by n). With one sample per class
    /// `Sw` is zero and the target falls back to the identity.
    pub(super) fn fit(data: &TrainingData, shrinkage: f64) -> Result<Self> {
        let d = data.d;
        let means = data.class_means();
        let mut cov = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for i in 0..data.n {
            let c = data.y[i];
            for j in 0..d {
                e[j] = data.row(i)[j] - means[c * d + j];
            }
            for a in 0..d {
                if e[a] == 0.0 {
                    continue;
                }
                for b in 0..d {
                    cov[a * d + b] += e[a] * e[b];
                }
            }
        }
        cov.iter_mut().for_each(|v| *v /= data.n as f64);
        let trace: f64 = (0..d).map(|j| cov[j * d + j]).sum();
        let mu = if trace > 0.0 { trace / d as f64 } else { 1.0 };
        for v in cov.iter_mut() {
            *v *= 1.0 - shrinkage;
        }
        for j in 0..d {
            cov[j * d + j] += shrinkage * mu;
        }
        let l = cholesky(&cov, d)?;

        let priors: Vec<f64> = data
            .class_counts()
            .into_iter()
            .map(|c| c as f64 / data.n as f64)
            .collect();
        let mut coef = Vec::with_capacity(data.n_classes * d);
        let mut intercept = Vec::with_capacity(data.n_classes);
        for (c, prior) in priors.iter().enumerate() {
            let m = &means[c * d..(c + 1) * d];
            let mut w = m.to_vec();
            cholesky_solve(&l, d, &mut w);
            intercept.push(-0.5 * dot(m, &w) + prior.ln());
            coef.extend_from_slice(&w);
        }
        Ok(Lda { d, coef, intercept })
    }

    pub(super) fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .chunks_exact(self.d)
            .zip(&self.intercept)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }
}
