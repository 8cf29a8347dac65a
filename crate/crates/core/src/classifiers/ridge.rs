use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::linalg::{cholesky, cholesky_solve, dot};
use crate::Result;

/// One-vs-rest least squares on +1/-1 targets with an L2 penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    d: usize,
    coef: Vec<f64>,
    intercept: Vec<f64>,
}

impl Ridge {
    /// Inputs and targets are centred so the intercept is unpenalised.
    /// When there are fewer samples than features the n x n dual system is
    /// solved instead of the d x d primal one; both give the same weights.
    pub(super) fn fit(data: &TrainingData, alpha: f64) -> Result<Self> {
        let (n, d, k) = (data.n, data.d, data.n_classes);
        let mut x_mean = vec![0.0; d];
        for i in 0..n {
            for (m, v) in x_mean.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        x_mean.iter_mut().for_each(|m| *m /= n as f64);
        let xc: Vec<f64> = (0..n)
            .flat_map(|i| data.row(i).iter().zip(&x_mean).map(|(v, m)| v - m))
            .collect();
        let counts = data.class_counts();
        let y_mean: Vec<f64> = counts
            .iter()
            .map(|&c| (2.0 * c as f64 - n as f64) / n as f64)
            .collect();
        let target = |i: usize, c: usize| if data.y[i] == c { 1.0 } else { -1.0 } - y_mean[c];

        let mut coef = vec![0.0; k * d];
        if n < d {
            let mut gram = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..=a {
                    let v = dot(&xc[a * d..(a + 1) * d], &xc[b * d..(b + 1) * d]);
                    gram[a * n + b] = v;
                    gram[b * n + a] = v;
                }
                gram[a * n + a] += alpha;
            }
            let l = cholesky(&gram, n)?;
            for c in 0..k {
                let mut dual: Vec<f64> = (0..n).map(|i| target(i, c)).collect();
                cholesky_solve(&l, n, &mut dual);
                let w = &mut coef[c * d..(c + 1) * d];
                for (i, a) in dual.iter().enumerate() {
                    for (wj, xj) in w.iter_mut().zip(&xc[i * d..(i + 1) * d]) {
                        *wj += a * xj;
                    }
                }
            }
        } else {
            let mut gram = vec![0.0; d * d];
            for i in 0..n {
                let row = &xc[i * d..(i + 1) * d];
                for a in 0..d {
                    for b in 0..d {
                        gram[a * d + b] += row[a] * row[b];
                    }
                }
            }
            for a in 0..d {
                gram[a * d + a] += alpha;
            }
            let l = cholesky(&gram, d)?;
            for c in 0..k {
                let w = &mut coef[c * d..(c + 1) * d];
                for i in 0..n {
                    let t = target(i, c);
                    for (wj, xj) in w.iter_mut().zip(&xc[i * d..(i + 1) * d]) {
                        *wj += t * xj;
                    }
                }
                cholesky_solve(&l, d, w);
            }
        }
        let intercept = (0..k)
            .map(|c| y_mean[c] - dot(&x_mean, &coef[c * d..(c + 1) * d]))
            .collect();
        Ok(Ridge { d, coef, intercept })
    }

    pub(super) fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .chunks_exact(self.d)
            .zip(&self.intercept)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }
}
