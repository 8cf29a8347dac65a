//! Seeded synthetic ECG: five Gaussian bumps per beat, jittered RR
//! intervals, white noise and an optional slow baseline ramp.
//!
//! A subject's morphology depends only on `(seed, subject index)`; beat
//! timing and noise also depend on the session number, so several
//! recordings of one subject share a morphology but not their samples.
//! Rendering is chunk-independent: any sub-range of a recording equals the
//! same slice of the full rendering.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::wfdb::{RecordHeader, SignalRecord, SignalSpec, StorageFormat};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub duration_s: f64,
    pub fs: f64,
    pub heart_rate_bpm: f64,
    /// Standard deviation of each subject's mean heart rate around
    /// `heart_rate_bpm`.
    pub heart_rate_spread_bpm: f64,
    /// Beat-to-beat RR standard deviation as a fraction of the mean RR.
    pub rr_jitter: f64,
    /// Beat-to-beat amplitude standard deviation, as a fraction.
    pub beat_jitter: f64,
    pub noise_rms: f64,
    /// T-wave displacement in ms (QT prolongation when positive).
    pub t_shift_ms: f64,
    pub t_scale: f64,
    /// Baseline ramp in mV per hour, starting at `drift_onset_s`.
    pub drift_mv_per_hour: f64,
    pub drift_onset_s: f64,
    /// Channel names; every channel carries the same signal.
    pub leads: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 10,
            duration_s: 120.0,
            fs: 500.0,
            heart_rate_bpm: 70.0,
            heart_rate_spread_bpm: 5.0,
            rr_jitter: 0.02,
            beat_jitter: 0.02,
            noise_rms: 0.01,
            t_shift_ms: 0.0,
            t_scale: 1.0,
            drift_mv_per_hour: 0.0,
            drift_onset_s: 0.0,
            leads: vec!["II".to_string()],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite_non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if self.n_subjects == 0 {
            return bad("at least one subject is required".into());
        }
        if !(self.fs >= 100.0 && self.fs.is_finite()) {
            return bad(format!("sampling rate {} Hz below 100 Hz", self.fs));
        }
        if !(20.0..=250.0).contains(&self.heart_rate_bpm) {
            return bad(format!(
                "heart rate {} bpm outside [20, 250]",
                self.heart_rate_bpm
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s * self.heart_rate_bpm / 60.0 >= 40.0) {
            return bad(format!(
                "{} s at {} bpm gives fewer than 40 beats",
                self.duration_s, self.heart_rate_bpm
            ));
        }
        if !(0.0..=0.2).contains(&self.rr_jitter) || !(0.0..=0.2).contains(&self.beat_jitter) {
            return bad("rr_jitter and beat_jitter must lie in [0, 0.2]".into());
        }
        if !finite_non_negative(self.heart_rate_spread_bpm)
            || !finite_non_negative(self.noise_rms)
            || !finite_non_negative(self.t_scale)
            || !finite_non_negative(self.drift_onset_s)
            || !self.t_shift_ms.is_finite()
            || !self.drift_mv_per_hour.is_finite()
        {
            return bad(
                "noise, spreads, T scale and drift onset must be finite and non-negative".into(),
            );
        }
        if self.t_shift_ms.abs() > 100.0 {
            return bad(format!(
                "T shift {} ms outside [-100, 100]",
                self.t_shift_ms
            ));
        }
        if self.leads.is_empty() {
            return bad("at least one lead is required".into());
        }
        Ok(())
    }
}

/// One Gaussian bump: centre relative to R, width (sigma) and amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub centre_ms: f64,
    pub width_ms: f64,
    pub amp_mv: f64,
}

/// P, Q, R, S, T in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub waves: [Wave; 5],
}

impl Morphology {
    /// Draws a subject's morphology around a textbook lead-II beat.
    pub fn draw(seed: u64, subject: usize) -> Self {
        let mut rng = seed::rng(seed, &[subject as u64, 0]);
        let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
        let waves = [
            Wave {
                centre_ms: u(-185.0, -140.0),
                width_ms: u(15.0, 25.0),
                amp_mv: u(0.08, 0.25),
            },
            Wave {
                centre_ms: u(-48.0, -32.0),
                width_ms: u(6.0, 10.0),
                amp_mv: -u(0.05, 0.3),
            },
            Wave {
                centre_ms: 0.0,
                width_ms: u(7.0, 11.0),
                amp_mv: u(0.8, 1.8),
            },
            Wave {
                centre_ms: u(24.0, 40.0),
                width_ms: u(6.0, 10.0),
                amp_mv: -u(0.1, 0.5),
            },
            Wave {
                centre_ms: u(210.0, 290.0),
                width_ms: u(30.0, 50.0),
                amp_mv: u(0.15, 0.6),
            },
        ];
        Morphology { waves }
    }

    /// The same beat with the T wave moved by `shift_ms` and scaled.
    pub fn with_t_wave(mut self, shift_ms: f64, scale: f64) -> Self {
        self.waves[4].centre_ms += shift_ms;
        self.waves[4].amp_mv *= scale;
        self
    }

    fn value(&self, dt_ms: f64, amp_scale: f64) -> f64 {
        self.waves
            .iter()
            .map(|w| {
                let z = (dt_ms - w.centre_ms) / w.width_ms;
                w.amp_mv * (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * amp_scale
    }

    /// Support of the beat in ms around R; beyond it every bump is < 1e-12.
    fn reach_ms(&self) -> (f64, f64) {
        let lo = self
            .waves
            .iter()
            .map(|w| w.centre_ms - 8.0 * w.width_ms)
            .fold(0.0, f64::min);
        let hi = self
            .waves
            .iter()
            .map(|w| w.centre_ms + 8.0 * w.width_ms)
            .fold(0.0, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthBeat {
    /// R sample index.
    pub r_index: usize,
    pub amp_scale: f64,
}

/// One rendered-on-demand recording of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSubject {
    pub index: usize,
    pub session: u64,
    pub morphology: Morphology,
    pub beats: Vec<SynthBeat>,
    pub n_samples: usize,
    fs: f64,
    noise_rms: f64,
    drift_mv_per_hour: f64,
    drift_onset_s: f64,
    seed: u64,
}

pub fn subject_name(index: usize) -> String {
    format!("subject{index:03}")
}

impl SynthSubject {
    pub fn new(cfg: &SynthConfig, seed: u64, index: usize, session: u64) -> Result<Self> {
        cfg.validate()?;
        let morphology = Morphology::draw(seed, index).with_t_wave(cfg.t_shift_ms, cfg.t_scale);
        let mut hr_rng = seed::rng(seed, &[index as u64, 1]);
        let z: f64 = hr_rng.sample(StandardNormal);
        let hr = (cfg.heart_rate_bpm + cfg.heart_rate_spread_bpm * z).clamp(20.0, 250.0);
        let mean_rr = 60.0 / hr;

        let n_samples = (cfg.duration_s * cfg.fs).round() as usize;
        // a beat is only placed when its QRS ends inside the record
        let s_wave = morphology.waves[3];
        let qrs_tail =
            ((s_wave.centre_ms + 3.0 * s_wave.width_ms) * cfg.fs / 1000.0).ceil() as usize;
        let mut rng = seed::rng(seed, &[index as u64, 2, session]);
        let mut beats = Vec::new();
        let mut t = 0.5 * mean_rr;
        while t < cfg.duration_s {
            let r_index = (t * cfg.fs).round() as usize;
            if r_index + qrs_tail >= n_samples {
                break;
            }
            let a: f64 = rng.sample(StandardNormal);
            beats.push(SynthBeat {
                r_index,
                amp_scale: (1.0 + cfg.beat_jitter * a).max(0.0),
            });
            let j: f64 = rng.sample(StandardNormal);
            t += mean_rr * (1.0 + cfg.rr_jitter * j).clamp(0.5, 1.5);
        }
        Ok(SynthSubject {
            index,
            session,
            morphology,
            beats,
            n_samples,
            fs: cfg.fs,
            noise_rms: cfg.noise_rms,
            drift_mv_per_hour: cfg.drift_mv_per_hour,
            drift_onset_s: cfg.drift_onset_s,
            seed,
        })
    }

    pub fn name(&self) -> String {
        subject_name(self.index)
    }

    pub fn sampling_rate(&self) -> f64 {
        self.fs
    }

    pub fn r_indices(&self) -> Vec<usize> {
        self.beats.iter().map(|b| b.r_index).collect()
    }

    fn block_len(&self) -> usize {
        (self.fs.round() as usize).max(1)
    }

    fn noise_block(&self, block: usize) -> Vec<f64> {
        let mut rng = seed::rng(
            self.seed,
            &[self.index as u64, 3, self.session, block as u64],
        );
        (0..self.block_len())
            .map(|_| self.noise_rms * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Samples `start..end` (clamped to the recording) in mV.
    pub fn render(&self, start: usize, end: usize) -> Vec<f64> {
        let end = end.min(self.n_samples);
        if start >= end {
            return Vec::new();
        }
        let fs = self.fs;
        let mut out = vec![0.0; end - start];
        let (lo_ms, hi_ms) = self.morphology.reach_ms();
        let lo_reach = (-lo_ms * fs / 1000.0).ceil() as usize;
        let hi_reach = (hi_ms * fs / 1000.0).ceil() as usize;
        let first = self.beats.partition_point(|b| b.r_index + hi_reach < start);
        for b in &self.beats[first..] {
            if b.r_index >= end + lo_reach {
                break;
            }
            let from = b.r_index.saturating_sub(lo_reach).max(start);
            let to = (b.r_index + hi_reach + 1).min(end);
            for i in from..to {
                let dt_ms = (i as f64 - b.r_index as f64) * 1000.0 / fs;
                out[i - start] += self.morphology.value(dt_ms, b.amp_scale);
            }
        }
        if self.noise_rms > 0.0 {
            let bl = self.block_len();
            let mut block_idx = usize::MAX;
            let mut block = Vec::new();
            for i in start..end {
                if i / bl != block_idx {
                    block_idx = i / bl;
                    block = self.noise_block(block_idx);
                }
                out[i - start] += block[i % bl];
            }
        }
        if self.drift_mv_per_hour != 0.0 {
            for i in start..end {
                let t = i as f64 / fs;
                if t > self.drift_onset_s {
                    out[i - start] += self.drift_mv_per_hour * (t - self.drift_onset_s) / 3600.0;
                }
            }
        }
        out
    }

    /// The whole recording as a calibrated record, one copy per lead.
    pub fn to_record(&self, leads: &[String], record_name: &str) -> Result<SignalRecord> {
        let signal = self.render(0, self.n_samples);
        let header = RecordHeader {
            record_name: record_name.to_string(),
            n_signals: leads.len(),
            sampling_rate: self.fs,
            n_samples: self.n_samples,
            signals: leads
                .iter()
                .map(|l| SignalSpec {
                    file_name: format!("{record_name}.dat"),
                    storage_format: StorageFormat::Fmt16,
                    gain: 1000.0,
                    baseline: 0,
                    units: "mV".to_string(),
                    adc_resolution: 16,
                    adc_zero: 0,
                    description: l.clone(),
                })
                .collect(),
        };
        SignalRecord::new(header, vec![signal; leads.len()])
    }
}

/// A generated record with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecord {
    pub subject: String,
    pub record: SignalRecord,
    pub r_indices: Vec<usize>,
    pub morphology: Morphology,
}

/// Renders session 0 of every subject in `cfg`.
pub fn synth_generate(cfg: &SynthConfig, seed: u64) -> Result<Vec<SynthRecord>> {
    synth_session(cfg, seed, 0)
}

/// Renders one session of every subject; sessions differ in timing and noise.
pub fn synth_session(cfg: &SynthConfig, seed: u64, session: u64) -> Result<Vec<SynthRecord>> {
    cfg.validate()?;
    (0..cfg.n_subjects)
        .map(|i| {
            let s = SynthSubject::new(cfg, seed, i, session)?;
            let name = format!("{}_s{session}", s.name());
            Ok(SynthRecord {
                subject: s.name(),
                record: s.to_record(&cfg.leads, &name)?,
                r_indices: s.r_indices(),
                morphology: s.morphology,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SynthConfig {
        SynthConfig {
            n_subjects: 2,
            duration_s: 60.0,
            heart_rate_bpm: 60.0,
            heart_rate_spread_bpm: 0.0,
            rr_jitter: 0.0,
            noise_rms: 0.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn sixty_beats_a_second_apart() {
        let s = SynthSubject::new(&quiet(), 1, 0, 0).unwrap();
        let r = s.r_indices();
        assert_eq!(r.len(), 60);
        assert!(r.windows(2).all(|w| w[1] - w[0] == 500));
        assert_eq!(r[0], 250);
    }

    #[test]
    fn chunks_match_full_render() {
        let cfg = SynthConfig {
            drift_mv_per_hour: 3.0,
            drift_onset_s: 10.0,
            ..SynthConfig::default()
        };
        let s = SynthSubject::new(&cfg, 5, 3, 1).unwrap();
        let full = s.render(0, s.n_samples);
        assert_eq!(full.len(), s.n_samples);
        for (a, b) in [(0, 10), (333, 1777), (12_000, 30_000), (59_000, 70_000)] {
            let part = s.render(a, b);
            assert_eq!(part.as_slice(), &full[a..b.min(full.len())]);
        }
    }

    #[test]
    fn morphology_ordered() {
        for i in 0..50 {
            let m = Morphology::draw(9, i);
            assert!(m.waves.windows(2).all(|w| w[0].centre_ms < w[1].centre_ms));
        }
    }

    #[test]
    fn identity_perturbation() {
        let base = SynthSubject::new(&quiet(), 4, 1, 2).unwrap();
        let cfg = SynthConfig {
            t_shift_ms: 0.0,
            t_scale: 1.0,
            ..quiet()
        };
        let same = SynthSubject::new(&cfg, 4, 1, 2).unwrap();
        assert_eq!(base, same);
        let shifted = SynthSubject::new(
            &SynthConfig {
                t_shift_ms: 60.0,
                ..quiet()
            },
            4,
            1,
            2,
        )
        .unwrap();
        assert_eq!(
            shifted.morphology.waves[4].centre_ms,
            base.morphology.waves[4].centre_ms + 60.0
        );
        assert_eq!(shifted.beats, base.beats);
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            SynthConfig {
                n_subjects: 0,
                ..SynthConfig::default()
            },
            SynthConfig {
                duration_s: 10.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                fs: 50.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                noise_rms: -1.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                leads: vec![],
                ..SynthConfig::default()
            },
        ] {
            assert!(matches!(
                synth_generate(&cfg, 0),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let cfg = SynthConfig {
            n_subjects: 2,
            duration_s: 40.0,
            ..SynthConfig::default()
        };
        let a = synth_generate(&cfg, 7).unwrap();
        assert_eq!(a, synth_generate(&cfg, 7).unwrap());
        assert_ne!(
            a[0].record.channels,
            synth_generate(&cfg, 8).unwrap()[0].record.channels
        );
        assert_eq!(a[0].record.channel_names, ["II"]);
    }
}
