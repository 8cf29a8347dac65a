use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::TrainingData;

fn log_priors(data: &TrainingData) -> Vec<f64> {
    data.class_counts()
        .into_iter()
        .map(|c| (c as f64 / data.n as f64).ln())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    d: usize,
    log_prior: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl GaussianNb {
    /// Per-class means and variances; every variance gets
    /// `smoothing * (largest feature variance)` added so constant features
    /// and single-sample classes stay finite.
    pub(super) fn fit(data: &TrainingData, smoothing: f64) -> Self {
        let d = data.d;
        let mean = data.class_means();
        let counts = data.class_counts();
        let mut var = vec![0.0; data.n_classes * d];
        for i in 0..data.n {
            let c = data.y[i];
            for j in 0..d {
                let e = data.row(i)[j] - mean[c * d + j];
                var[c * d + j] += e * e;
            }
        }
        for (c, &cnt) in counts.iter().enumerate() {
            var[c * d..(c + 1) * d]
                .iter_mut()
                .for_each(|v| *v /= cnt as f64);
        }

        let mut max_var = 0.0f64;
        for j in 0..d {
            let m = (0..data.n).map(|i| data.row(i)[j]).sum::<f64>() / data.n as f64;
            let v = (0..data.n)
                .map(|i| (data.row(i)[j] - m).powi(2))
                .sum::<f64>()
                / data.n as f64;
            max_var = max_var.max(v);
        }
        let eps = smoothing * if max_var > 0.0 { max_var } else { 1.0 };
        var.iter_mut().for_each(|v| *v += eps);

        GaussianNb {
            d,
            log_prior: log_priors(data),
            mean,
            var,
        }
    }

    /// Joint log-likelihood per class.
    pub(super) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        self.log_prior
            .iter()
            .enumerate()
            .map(|(c, lp)| {
                let mut s = *lp;
                for j in 0..d {
                    let v = self.var[c * d + j];
                    let e = x[j] - self.mean[c * d + j];
                    s -= 0.5 * ((2.0 * PI * v).ln() + e * e / v);
                }
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNb {
    d: usize,
    thresholds: Vec<f64>,
    log_prior: Vec<f64>,
    log_p: Vec<f64>,
    log_not_p: Vec<f64>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl BernoulliNb {
    /// Features are binarised as `x > median` with medians taken over the
    /// training set; probabilities use add-`alpha` smoothing.
    pub(super) fn fit(data: &TrainingData, alpha: f64) -> Self {
        let d = data.d;
        let thresholds: Vec<f64> = (0..d)
            .map(|j| {
                let mut col: Vec<f64> = (0..data.n).map(|i| data.row(i)[j]).collect();
                median(&mut col)
            })
            .collect();
        let counts = data.class_counts();
        let mut ones = vec![0.0; data.n_classes * d];
        for i in 0..data.n {
            let c = data.y[i];
            for j in 0..d {
                if data.row(i)[j] > thresholds[j] {
                    ones[c * d + j] += 1.0;
                }
            }
        }
        let mut log_p = vec![0.0; data.n_classes * d];
        let mut log_not_p = vec![0.0; data.n_classes * d];
        for c in 0..data.n_classes {
            for j in 0..d {
                let p = (ones[c * d + j] + alpha) / (counts[c] as f64 + 2.0 * alpha);
                log_p[c * d + j] = p.ln();
                log_not_p[c * d + j] = (1.0 - p).ln();
            }
        }
        BernoulliNb {
            d,
            thresholds,
            log_prior: log_priors(data),
            log_p,
            log_not_p,
        }
    }

    pub(super) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        self.log_prior
            .iter()
            .enumerate()
            .map(|(c, lp)| {
                let mut s = *lp;
                for j in 0..d {
                    s += if x[j] > self.thresholds[j] {
                        self.log_p[c * d + j]
                    } else {
                        self.log_not_p[c * d + j]
                    };
                }
                s
            })
            .collect()
    }
}
