//! Rank correlations with permutation p-values, and accuracy summaries.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_PERMUTATION_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMethod {
    Spearman,
    KendallTauB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub coefficient: f64,
    /// Two-sided permutation p-value, `(hits + 1) / (permutations + 1)`.
    pub p_value: f64,
    pub n: usize,
    pub method: CorrelationMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationConfig {
    pub permutations: usize,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            permutations: DEFAULT_PERMUTATIONS,
            seed: DEFAULT_PERMUTATION_SEED,
        }
    }
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = alloc::vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    Ok(())
}

fn permutation_p<F>(y: &[f64], observed: f64, cfg: &PermutationConfig, stat: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = seed::rng(cfg.seed, &[]);
    let mut shuffled = y.to_vec();
    let tol = 1e-12;
    let mut hits = 0usize;
    for _ in 0..cfg.permutations {
        shuffled.shuffle(&mut rng);
        if stat(&shuffled).abs() >= observed.abs() - tol {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (cfg.permutations + 1) as f64
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    spearman_with(x, y, &PermutationConfig::default())
}

/// Pearson correlation of average ranks.
pub fn spearman_with(x: &[f64], y: &[f64], cfg: &PermutationConfig) -> Result<CorrelationResult> {
    check_inputs(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let coefficient = pearson(&rx, &ry).ok_or(Error::ZeroVariance)?;
    let p_value = permutation_p(&ry, coefficient, cfg, |perm| {
        pearson(&rx, perm).unwrap_or(0.0)
    });
    Ok(CorrelationResult {
        coefficient,
        p_value,
        n: x.len(),
        method: CorrelationMethod::Spearman,
    })
}

pub fn kendall(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    kendall_with(x, y, &PermutationConfig::default())
}

fn tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                tied_x += 1;
            }
            if dy == 0.0 {
                tied_y += 1;
            }
            let s = dx * dy;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = ((n0 - tied_x) as f64 * (n0 - tied_y) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

/// Kendall's tau-b, `(C - D) / sqrt((n0 - t_x)(n0 - t_y))`.
pub fn kendall_with(x: &[f64], y: &[f64], cfg: &PermutationConfig) -> Result<CorrelationResult> {
    check_inputs(x, y)?;
    let coefficient = tau_b(x, y).ok_or(Error::ZeroVariance)?;
    let p_value = permutation_p(y, coefficient, cfg, |perm| tau_b(x, perm).unwrap_or(0.0));
    Ok(CorrelationResult {
        coefficient,
        p_value,
        n: x.len(),
        method: CorrelationMethod::KendallTauB,
    })
}

/// Minimum and max-minus-min of a row of accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    pub min: f64,
    pub spread: f64,
}

pub fn summarize_row(values: &[f64]) -> Option<RowSummary> {
    let min = values.iter().copied().reduce(f64::min)?;
    let max = values.iter().copied().reduce(f64::max)?;
    Some(RowSummary {
        min,
        spread: max - min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_examples() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])
                .unwrap()
                .coefficient,
            1.0
        );
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[6.0, 5.0, 4.0])
                .unwrap()
                .coefficient,
            -1.0
        );
        assert_eq!(
            kendall(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])
                .unwrap()
                .coefficient,
            1.0
        );
    }

    #[test]
    fn hand_enumerated_kendall() {
        let r = kendall(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert!((r.coefficient - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 5.0]),
            [2.5, 4.0, 2.5, 1.0]
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewSamples(2))
        );
        assert_eq!(
            kendall(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(3, 2))
        );
        assert_eq!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        );
        assert_eq!(
            kendall(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]),
            Err(Error::ZeroVariance)
        );
    }

    #[test]
    fn p_values_bounded_and_seeded() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0];
        let y = [2.0, 3.0, 1.0, 9.0, 4.0, 6.0, 8.0];
        let cfg = PermutationConfig {
            permutations: 999,
            seed: 3,
        };
        let a = spearman_with(&x, &y, &cfg).unwrap();
        let b = spearman_with(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.p_value >= 1.0 / 1000.0 && a.p_value <= 1.0);
        let k = kendall_with(&x, &y, &cfg).unwrap();
        assert!(k.p_value >= 1.0 / 1000.0 && k.p_value <= 1.0);
    }

    #[test]
    fn row_summary() {
        assert_eq!(summarize_row(&[0.7]).unwrap().spread, 0.0);
        let s = summarize_row(&[0.5, 0.7]).unwrap();
        assert_eq!(s.min, 0.5);
        assert!((s.spread - 0.2).abs() < 1e-12);
        assert!(summarize_row(&[]).is_none());
    }
}
