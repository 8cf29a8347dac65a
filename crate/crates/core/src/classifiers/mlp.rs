//! One-hidden-layer ReLU network with a softmax output, trained by Adam on
//! shuffled mini-batches.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{softmax, TrainingData};
use crate::linalg::dot;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

/// Parameter layout: `W1 (h x d)`, `b1 (h)`, `W2 (k x h)`, `b2 (k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub d: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.hidden * self.d + self.hidden + self.classes * self.hidden + self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn split<'a>(&self, theta: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (w1, rest) = theta.split_at(self.hidden * self.d);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(self.classes * self.hidden);
        (w1, b1, w2, b2)
    }

    fn hidden_layer(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let (w1, b1, _, _) = self.split(theta);
        (0..self.hidden)
            .map(|j| dot(&w1[j * self.d..(j + 1) * self.d], x) + b1[j])
            .collect()
    }

    fn output(&self, theta: &[f64], pre: &[f64]) -> Vec<f64> {
        let (_, _, w2, b2) = self.split(theta);
        (0..self.classes)
            .map(|c| {
                let row = &w2[c * self.hidden..(c + 1) * self.hidden];
                row.iter()
                    .zip(pre)
                    .map(|(w, a)| w * a.max(0.0))
                    .sum::<f64>()
                    + b2[c]
            })
            .collect()
    }
}

/// Mean cross-entropy over the rows `batch` of `x`, and its gradient.
pub fn objective(
    theta: &[f64],
    shape: Shape,
    x: &[f64],
    y: &[usize],
    batch: &[usize],
) -> (f64, Vec<f64>) {
    let Shape {
        d,
        hidden: h,
        classes: k,
    } = shape;
    let (_, _, w2, _) = shape.split(theta);
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    for &i in batch {
        let xi = &x[i * d..(i + 1) * d];
        let pre = shape.hidden_layer(theta, xi);
        let p = softmax(&shape.output(theta, &pre));
        loss -= p[y[i]].max(f64::MIN_POSITIVE).ln();

        let (gw1, rest) = grad.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(k * h);
        let mut g_hidden = vec![0.0; h];
        for c in 0..k {
            let g = p[c] - if c == y[i] { 1.0 } else { 0.0 };
            gb2[c] += g;
            for j in 0..h {
                gw2[c * h + j] += g * pre[j].max(0.0);
                g_hidden[j] += g * w2[c * h + j];
            }
        }
        for j in 0..h {
            if pre[j] <= 0.0 {
                continue;
            }
            let g = g_hidden[j];
            gb1[j] += g;
            for (acc, v) in gw1[j * d..(j + 1) * d].iter_mut().zip(xi) {
                *acc += g * v;
            }
        }
    }
    let inv = 1.0 / batch.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    (loss * inv, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    d: usize,
    hidden: usize,
    classes: usize,
    theta: Vec<f64>,
}

impl Mlp {
    fn shape(&self) -> Shape {
        Shape {
            d: self.d,
            hidden: self.hidden,
            classes: self.classes,
        }
    }

    pub(super) fn fit(data: &TrainingData, cfg: &MlpConfig, seed: u64) -> Self {
        let shape = Shape {
            d: data.d,
            hidden: cfg.hidden,
            classes: data.n_classes,
        };
        let mut rng = seed::rng(seed, &[2]);
        let mut theta = vec![0.0; shape.len()];
        {
            let (w1, rest) = theta.split_at_mut(shape.hidden * shape.d);
            let (_, rest) = rest.split_at_mut(shape.hidden);
            let (w2, _) = rest.split_at_mut(shape.classes * shape.hidden);
            let s1 = 1.0 / (shape.d as f64).sqrt();
            let s2 = 1.0 / (shape.hidden as f64).sqrt();
            for w in w1.iter_mut() {
                *w = s1 * rng.sample::<f64, _>(StandardNormal);
            }
            for w in w2.iter_mut() {
                *w = s2 * rng.sample::<f64, _>(StandardNormal);
            }
        }

        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
        let mut m = vec![0.0; theta.len()];
        let mut v = vec![0.0; theta.len()];
        let mut t = 0i32;
        let batch_size = cfg.batch_size.min(data.n);
        let mut order: Vec<usize> = (0..data.n).collect();
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(batch_size) {
                let (_, g) = objective(&theta, shape, &data.x, &data.y, batch);
                t += 1;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for i in 0..theta.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    theta[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
        Mlp {
            d: shape.d,
            hidden: shape.hidden,
            classes: shape.classes,
            theta,
        }
    }

    pub(super) fn logits(&self, x: &[f64]) -> Vec<f64> {
        let shape = self.shape();
        let pre = shape.hidden_layer(&self.theta, x);
        shape.output(&self.theta, &pre)
    }
}
