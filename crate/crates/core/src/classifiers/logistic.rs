//! Multinomial logistic regression with an L2 penalty on the weights.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{softmax, TrainingData};
use crate::linalg::{dot, gram_spectral_norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    d: usize,
    /// `n_classes x d` weights followed by `n_classes` biases.
    theta: Vec<f64>,
    pub iterations: usize,
}

/// Mean cross-entropy plus `0.5 * l2 * |W|^2` and its gradient.
///
/// `theta` holds the row-major `n_classes x d` weight matrix followed by the
/// `n_classes` biases; biases are not penalised.
pub fn objective(
    theta: &[f64],
    x: &[f64],
    y: &[usize],
    d: usize,
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = y.len();
    let (w, b) = theta.split_at(n_classes * d);
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (i, &yi) in y.iter().enumerate() {
        let xi = &x[i * d..(i + 1) * d];
        for c in 0..n_classes {
            z[c] = dot(&w[c * d..(c + 1) * d], xi) + b[c];
        }
        let p = softmax(&z);
        loss -= p[yi].max(f64::MIN_POSITIVE).ln();
        let (gw, gb) = grad.split_at_mut(n_classes * d);
        for c in 0..n_classes {
            let g = p[c] - if c == yi { 1.0 } else { 0.0 };
            gb[c] += g;
            for (acc, v) in gw[c * d..(c + 1) * d].iter_mut().zip(xi) {
                *acc += g * v;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    grad.iter_mut().for_each(|g| *g *= inv_n);
    for (g, wv) in grad.iter_mut().zip(w) {
        *g += l2 * wv;
    }
    loss += 0.5 * l2 * dot(w, w);
    (loss, grad)
}

impl Logistic {
    /// Full-batch gradient descent from zero with step `1 / L`, where `L`
    /// bounds the curvature of the objective, until the gradient norm drops
    /// below `tol` or `max_iter` steps have been taken.
    pub(super) fn fit(data: &TrainingData, l2: f64, tol: f64, max_iter: usize) -> Self {
        let (d, k, n) = (data.d, data.n_classes, data.n);
        let mut augmented = Vec::with_capacity(n * (d + 1));
        for i in 0..n {
            augmented.extend_from_slice(data.row(i));
            augmented.push(1.0);
        }
        let lipschitz = 0.5 * gram_spectral_norm(&augmented, n, d + 1) / n as f64 + l2;
        let step = if lipschitz > 0.0 {
            1.0 / lipschitz
        } else {
            1.0
        };
        let mut theta = vec![0.0; k * d + k];
        let mut iterations = 0;
        while iterations < max_iter {
            let (_, grad) = objective(&theta, &data.x, &data.y, d, k, l2);
            if dot(&grad, &grad).sqrt() < tol {
                break;
            }
            for (t, g) in theta.iter_mut().zip(&grad) {
                *t -= step * g;
            }
            iterations += 1;
        }
        Logistic {
            d,
            theta,
            iterations,
        }
    }

    pub(super) fn logits(&self, x: &[f64]) -> Vec<f64> {
        let k = self.theta.len() / (self.d + 1);
        let (w, b) = self.theta.split_at(k * self.d);
        (0..k)
            .map(|c| dot(&w[c * self.d..(c + 1) * self.d], x) + b[c])
            .collect()
    }
}
