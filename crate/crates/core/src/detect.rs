//! Pan-Tompkins style R-peak detection and R-aligned beat windows.
//!
//! The detector runs offline over a whole channel: zero-phase band-pass,
//! centred five-point derivative, squaring, centred moving-window
//! integration, then an adaptive dual threshold with search-back. Every
//! accepted detection is moved onto the raw-signal maximum nearby.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::filter::BandPass;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub band_low: f64,
    pub band_high: f64,
    pub integration_window_ms: f64,
    pub refractory_ms: f64,
    /// Weight of the newest peak in the running signal/noise level estimates.
    pub threshold_decay: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            band_low: 5.0,
            band_high: 15.0,
            integration_window_ms: 150.0,
            refractory_ms: 200.0,
            threshold_decay: 0.125,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.band_low > 0.0 && self.band_low < self.band_high && self.band_high < fs / 2.0) {
            return Err(Error::InvalidBand {
                low: self.band_low,
                high: self.band_high,
                fs,
            });
        }
        if !(self.refractory_ms > 0.0) {
            return Err(Error::InvalidConfig(
                "refractory period must be positive".into(),
            ));
        }
        if !(self.integration_window_ms > 0.0) {
            return Err(Error::InvalidConfig(
                "integration window must be positive".into(),
            ));
        }
        if !(self.threshold_decay > 0.0 && self.threshold_decay < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold decay {} outside (0, 1)",
                self.threshold_decay
            )));
        }
        Ok(())
    }
}

pub(crate) fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round() as usize
}

/// Index of the first maximum of `x[lo..=hi]`.
fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo + 1..=hi {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

/// Moves `i` uphill until it is the first maximum within `±half` samples.
fn climb(x: &[f64], mut i: usize, half: usize) -> usize {
    loop {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(x.len() - 1);
        let j = argmax(x, lo, hi);
        if j == i {
            return i;
        }
        i = j;
    }
}

fn centred_moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / width as f64
        })
        .collect()
}

/// Detects R peaks, returning strictly ascending sample indices.
pub fn detect_r_peaks(channel: &[f64], fs: f64, cfg: &DetectorConfig) -> Result<Vec<usize>> {
    if !(fs >= 100.0) {
        return Err(Error::InvalidConfig(format!(
            "sampling rate {fs} Hz below the 100 Hz minimum"
        )));
    }
    cfg.validate(fs)?;
    let required = (2.0 * fs).ceil() as usize;
    if channel.len() < required {
        return Err(Error::SignalTooShort {
            len: channel.len(),
            required,
        });
    }
    let n = channel.len();

    let filtered = BandPass::new(fs, cfg.band_low, cfg.band_high)?.apply(channel);
    let mut slope = alloc::vec![0.0; n];
    for i in 2..n - 2 {
        slope[i] =
            (2.0 * filtered[i + 2] + filtered[i + 1] - filtered[i - 1] - 2.0 * filtered[i - 2])
                / 8.0;
    }
    let squared: Vec<f64> = slope.iter().map(|d| d * d).collect();
    let width = ms_to_samples(cfg.integration_window_ms, fs).max(1) | 1;
    let integrated = centred_moving_average(&squared, width);

    let peak_level = integrated.iter().copied().fold(0.0, f64::max);
    if !(peak_level > 0.0) {
        return Ok(Vec::new());
    }

    let refractory = ms_to_samples(cfg.refractory_ms, fs).max(1);
    let candidates = suppress_non_maxima(&integrated, refractory);

    // learning phase over the first two seconds
    let learn = &integrated[..required];
    let mut spki = learn.iter().copied().fold(0.0, f64::max) / 3.0;
    let mut npki = learn.iter().sum::<f64>() / learn.len() as f64 / 2.0;
    let decay = cfg.threshold_decay;
    let half = width / 2;
    let slope_at = |i: usize| {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        slope[lo..=hi].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let t_wave_window = ms_to_samples(360.0, fs);

    let mut accepted: Vec<usize> = Vec::new();
    let mut last_slope = 0.0;
    let mut rr: Vec<usize> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();

    for &c in &candidates {
        let v = integrated[c];
        let threshold = npki + 0.25 * (spki - npki);

        if let (Some(&last), false) = (accepted.last(), rr.is_empty()) {
            let rr_avg = rr.iter().rev().take(8).sum::<usize>() as f64 / rr.len().min(8) as f64;
            if (c - last) as f64 > 1.66 * rr_avg {
                let second = 0.5 * threshold;
                let missed = pending
                    .iter()
                    .copied()
                    .filter(|&p| p > last && integrated[p] > second)
                    .fold(None, |best: Option<usize>, p| match best {
                        Some(b) if integrated[b] >= integrated[p] => Some(b),
                        _ => Some(p),
                    });
                if let Some(m) = missed {
                    spki = 0.25 * integrated[m] + 0.75 * spki;
                    rr.push(m - last);
                    accepted.push(m);
                    last_slope = slope_at(m);
                }
            }
        }
        pending.retain(|&p| p > c.saturating_sub(3 * required));

        let is_t_wave = accepted
            .last()
            .is_some_and(|&last| c - last < t_wave_window && slope_at(c) < 0.5 * last_slope);
        if v > threshold && !is_t_wave {
            spki = decay * v + (1.0 - decay) * spki;
            if let Some(&last) = accepted.last() {
                rr.push(c - last);
            }
            accepted.push(c);
            last_slope = slope_at(c);
            pending.clear();
        } else {
            npki = decay * v + (1.0 - decay) * npki;
            pending.push(c);
        }
    }

    let search = ms_to_samples(50.0, fs);
    let mut peaks: Vec<usize> = accepted
        .into_iter()
        .map(|c| {
            let lo = c.saturating_sub(half);
            let hi = (c + half).min(n - 1);
            climb(channel, argmax(&filtered, lo, hi), search)
        })
        .collect();
    peaks.sort_unstable();
    peaks.dedup();

    let mut out: Vec<usize> = Vec::with_capacity(peaks.len());
    for p in peaks {
        match out.last_mut() {
            Some(last) if p - *last < refractory => {
                if channel[p] > channel[*last] {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    Ok(out)
}

/// Local maxima of `x`, greedily thinned (largest first) so that no two are
/// closer than `distance`. Returned in ascending index order.
fn suppress_non_maxima(x: &[f64], distance: usize) -> Vec<usize> {
    let mut maxima: Vec<usize> = (1..x.len().saturating_sub(1))
        .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > 0.0)
        .collect();
    maxima.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut kept = BTreeSet::new();
    for i in maxima {
        let lo = i.saturating_sub(distance - 1);
        if kept.range(lo..i + distance).next().is_none() {
            kept.insert(i);
        }
    }
    kept.into_iter().collect()
}

/// One heartbeat cut from a channel, aligned on its R sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatWindow {
    /// R index in the source channel.
    pub r_index: usize,
    /// R index inside `samples`.
    pub r_offset: usize,
    pub pre_span_ms: f64,
    pub post_span_ms: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub beats: Vec<BeatWindow>,
    /// Peaks whose window would cross either end of the channel.
    pub dropped: usize,
}

pub const DEFAULT_PRE_SPAN_MS: f64 = 250.0;
pub const DEFAULT_POST_SPAN_MS: f64 = 420.0;

/// Window length in samples, shared by every beat of a record.
pub fn window_len(fs: f64, pre_ms: f64, post_ms: f64) -> usize {
    ((pre_ms + post_ms) / 1000.0 * fs).round() as usize + 1
}

/// Cuts a fixed-width window around each R peak, dropping edge beats.
pub fn segment_beats(
    channel: &[f64],
    fs: f64,
    r_peaks: &[usize],
    pre_ms: f64,
    post_ms: f64,
) -> Segmentation {
    let len = window_len(fs, pre_ms, post_ms);
    let pre = ms_to_samples(pre_ms, fs).min(len - 1);
    let post = len - 1 - pre;
    let mut beats = Vec::with_capacity(r_peaks.len());
    let mut dropped = 0;
    for &r in r_peaks {
        if r < pre || r + post >= channel.len() {
            dropped += 1;
            continue;
        }
        beats.push(BeatWindow {
            r_index: r,
            r_offset: pre,
            pre_span_ms: pre_ms,
            post_span_ms: post_ms,
            samples: channel[r - pre..=r + post].to_vec(),
        });
    }
    Segmentation { beats, dropped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spike(x: &mut [f64], centre: usize, fs: f64, amp: f64) {
        let sigma = 0.008 * fs;
        for (i, v) in x.iter_mut().enumerate() {
            let d = (i as f64 - centre as f64) / sigma;
            *v += amp * (-0.5 * d * d).exp();
        }
    }

    #[test]
    fn flat_signal_has_no_peaks() {
        let peaks = detect_r_peaks(&vec![0.0; 5000], 500.0, &DetectorConfig::default()).unwrap();
        assert!(peaks.is_empty());
    }

    #[test]
    fn refractory_suppresses_close_spikes() {
        let fs = 500.0;
        let mut x = vec![0.0; 1500];
        spike(&mut x, 700, fs, 1.0);
        spike(&mut x, 750, fs, 0.9);
        let peaks = detect_r_peaks(&x, fs, &DetectorConfig::default()).unwrap();
        assert_eq!(peaks, [700]);
    }

    #[test]
    fn regular_spike_train() {
        let fs = 250.0;
        let mut x = vec![0.0; 2500];
        let truth: Vec<usize> = (0..10).map(|k| 100 + k * 230).collect();
        for &t in &truth {
            spike(&mut x, t, fs, 1.0);
        }
        let peaks = detect_r_peaks(&x, fs, &DetectorConfig::default()).unwrap();
        assert_eq!(peaks, truth);
    }

    #[test]
    fn short_and_slow_inputs_rejected() {
        let cfg = DetectorConfig::default();
        assert!(matches!(
            detect_r_peaks(&[0.0; 100], 250.0, &cfg),
            Err(Error::SignalTooShort { .. })
        ));
        assert!(matches!(
            detect_r_peaks(&[0.0; 1000], 50.0, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        let bad = DetectorConfig {
            refractory_ms: 0.0,
            ..cfg
        };
        assert!(detect_r_peaks(&[0.0; 1000], 250.0, &bad).is_err());
    }

    #[test]
    fn window_length_formula() {
        assert_eq!(window_len(1000.0, 250.0, 420.0), 671);
        let x = vec![0.0; 20_000];
        let seg = segment_beats(&x, 1000.0, &[0, 10_000], 250.0, 420.0);
        assert_eq!(seg.dropped, 1);
        assert_eq!(seg.beats.len(), 1);
        assert_eq!(seg.beats[0].samples.len(), 671);
        assert_eq!(seg.beats[0].r_offset, 250);
    }

    #[test]
    fn segmentation_preserves_cardinality() {
        let x = vec![0.0; 30_000];
        let peaks: Vec<usize> = (0..25).map(|k| 1000 + k * 1000).collect();
        let seg = segment_beats(&x, 1000.0, &peaks, 250.0, 420.0);
        assert_eq!(seg.beats.len(), 25);
        assert_eq!(seg.dropped, 0);
        assert!(seg.beats.iter().all(|b| b.samples.len() == 671));
    }

    #[test]
    fn climb_reaches_local_maximum() {
        let x = [0.0, 1.0, 2.0, 3.0, 2.0, 5.0, 1.0];
        assert_eq!(climb(&x, 0, 1), 3);
        assert_eq!(climb(&x, 0, 2), 5);
        assert_eq!(climb(&x, 4, 1), 5);
    }
}
