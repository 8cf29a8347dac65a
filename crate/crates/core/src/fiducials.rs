//! P/Q/R/S/T landmarks inside an R-aligned beat window.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::detect::{ms_to_samples, BeatWindow};
use crate::{Error, Result};

/// Fiducial times are in ms relative to R, amplitudes in mV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatFiducials {
    pub t_p: f64,
    pub t_q: f64,
    pub t_s: f64,
    pub t_t: f64,
    pub a_p: f64,
    pub a_q: f64,
    pub a_r: f64,
    pub a_s: f64,
    pub a_t: f64,
}

pub const FEATURES_PER_BEAT: usize = 9;

/// `(t_p, t_q, t_s, t_t, a_p, a_q, a_r, a_s, a_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatFeatures(pub [f64; FEATURES_PER_BEAT]);

impl BeatFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

// Search windows in ms relative to R.
const P_FROM: f64 = -250.0;
const QRS_BOUNDARY: f64 = -80.0;
const S_TO: f64 = 100.0;
const T_FROM: f64 = 120.0;
const T_TO: f64 = 420.0;

fn first_extreme(x: &[f64], lo: usize, hi: usize, better: impl Fn(f64, f64) -> bool) -> usize {
    (lo..=hi).fold(lo, |best, i| if better(x[i], x[best]) { i } else { best })
}

fn median(x: &[f64]) -> f64 {
    let mut v: Vec<f64> = x.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Locates the four non-R fiducials with fixed physiologic search windows.
///
/// Q and S are the minima just before/after R, P the maximum of the
/// pre-QRS stretch, and T the sample deviating most from the window median
/// in the post-QRS stretch, so inverted T waves are found too.
pub fn locate_fiducials(beat: &BeatWindow, fs: f64) -> Result<BeatFiducials> {
    let x = &beat.samples;
    let r = beat.r_offset;
    let pre = ms_to_samples(-P_FROM, fs);
    let post = ms_to_samples(T_TO, fs);
    if r >= x.len() || r < pre || x.len() - 1 - r < post || pre == 0 {
        return Err(Error::WindowTooNarrow);
    }
    let at = |ms: f64| -> usize {
        let off = ms_to_samples(ms.abs(), fs);
        if ms < 0.0 {
            r - off
        } else {
            r + off
        }
    };
    let boundary = at(QRS_BOUNDARY);
    if boundary >= r || boundary <= at(P_FROM) {
        return Err(Error::WindowTooNarrow);
    }

    let q = first_extreme(x, boundary, r - 1, |a, b| a < b);
    let s = first_extreme(x, r + 1, at(S_TO), |a, b| a < b);
    let p = first_extreme(x, at(P_FROM), boundary - 1, |a, b| a > b);
    let base = median(x);
    let t = first_extreme(x, at(T_FROM), at(T_TO), |a, b| {
        (a - base).abs() > (b - base).abs()
    });

    let rel = |i: usize| (i as f64 - r as f64) * 1000.0 / fs;
    Ok(BeatFiducials {
        t_p: rel(p),
        t_q: rel(q),
        t_s: rel(s),
        t_t: rel(t),
        a_p: x[p],
        a_q: x[q],
        a_r: x[r],
        a_s: x[s],
        a_t: x[t],
    })
}

/// R's time is omitted: alignment pins it at zero.
pub fn beat_features(f: &BeatFiducials) -> BeatFeatures {
    BeatFeatures([
        f.t_p, f.t_q, f.t_s, f.t_t, f.a_p, f.a_q, f.a_r, f.a_s, f.a_t,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{segment_beats, window_len};
    use alloc::vec;

    struct Bump {
        centre_ms: f64,
        width_ms: f64,
        amp: f64,
    }

    fn bumps() -> [Bump; 5] {
        [
            Bump {
                centre_ms: -160.0,
                width_ms: 20.0,
                amp: 0.15,
            },
            Bump {
                centre_ms: -40.0,
                width_ms: 8.0,
                amp: -0.15,
            },
            Bump {
                centre_ms: 0.0,
                width_ms: 8.0,
                amp: 1.2,
            },
            Bump {
                centre_ms: 30.0,
                width_ms: 8.0,
                amp: -0.3,
            },
            Bump {
                centre_ms: 250.0,
                width_ms: 40.0,
                amp: 0.35,
            },
        ]
    }

    fn render(fs: f64, bumps: &[Bump]) -> BeatWindow {
        let len = window_len(fs, 250.0, 420.0);
        let r = ms_to_samples(250.0, fs);
        let samples = (0..len)
            .map(|i| {
                let t = (i as f64 - r as f64) * 1000.0 / fs;
                bumps
                    .iter()
                    .map(|b| {
                        let d = (t - b.centre_ms) / b.width_ms;
                        b.amp * (-0.5 * d * d).exp()
                    })
                    .sum()
            })
            .collect();
        BeatWindow {
            r_index: 1000,
            r_offset: r,
            pre_span_ms: 250.0,
            post_span_ms: 420.0,
            samples,
        }
    }

    fn check_against_generator(f: &BeatFiducials, b: &[Bump; 5]) {
        let times = [f.t_p, f.t_q, 0.0, f.t_s, f.t_t];
        let amps = [f.a_p, f.a_q, f.a_r, f.a_s, f.a_t];
        for (i, bump) in b.iter().enumerate() {
            assert!(
                (times[i] - bump.centre_ms).abs() <= 10.0,
                "wave {i}: {} vs {}",
                times[i],
                bump.centre_ms
            );
            assert!(
                (amps[i] - bump.amp).abs() <= 0.05 * bump.amp.abs(),
                "wave {i}: {} vs {}",
                amps[i],
                bump.amp
            );
        }
    }

    #[test]
    fn five_bump_beat() {
        for fs in [250.0, 500.0, 1000.0] {
            let b = bumps();
            let f = locate_fiducials(&render(fs, &b), fs).unwrap();
            check_against_generator(&f, &b);
            assert!(f.t_p < f.t_q && f.t_q < 0.0 && 0.0 < f.t_s && f.t_s < f.t_t);
        }
    }

    #[test]
    fn inverted_t_wave() {
        let mut b = bumps();
        b[4].amp = -0.35;
        let f = locate_fiducials(&render(500.0, &b), 500.0).unwrap();
        assert!(f.a_t < 0.0);
        assert!((f.t_t - 250.0).abs() <= 10.0);
    }

    #[test]
    fn lone_r_bump() {
        let b = [Bump {
            centre_ms: 0.0,
            width_ms: 8.0,
            amp: 1.0,
        }];
        let f = locate_fiducials(&render(1000.0, &b), 1000.0).unwrap();
        assert_eq!(f.t_q, -80.0);
        assert_eq!(f.t_s, 100.0);
        assert!(f.a_q.abs() < 1e-6 && f.a_s.abs() < 1e-6);
        assert_eq!(f.a_r, 1.0);
    }

    #[test]
    fn narrow_window_rejected() {
        let x = vec![0.0; 3000];
        let seg = segment_beats(&x, 1000.0, &[1500], 100.0, 420.0);
        assert_eq!(
            locate_fiducials(&seg.beats[0], 1000.0),
            Err(Error::WindowTooNarrow)
        );
    }

    #[test]
    fn feature_order() {
        let f = BeatFiducials {
            t_p: -160.0,
            t_q: -40.0,
            t_s: 30.0,
            t_t: 250.0,
            a_p: 0.0,
            a_q: 0.0,
            a_r: 0.0,
            a_s: 0.0,
            a_t: 0.0,
        };
        assert_eq!(
            beat_features(&f).0,
            [-160.0, -40.0, 30.0, 250.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(beat_features(&f).as_slice().len(), FEATURES_PER_BEAT);
    }

    #[test]
    fn shift_and_scale() {
        let fs = 500.0;
        let b = bumps();
        let beat = render(fs, &b);
        let mut shifted = beat.clone();
        shifted.r_index += 777;
        let f0 = beat_features(&locate_fiducials(&beat, fs).unwrap());
        assert_eq!(f0, beat_features(&locate_fiducials(&shifted, fs).unwrap()));

        let c = 2.5;
        let mut scaled = beat.clone();
        scaled.samples.iter_mut().for_each(|v| *v *= c);
        let f1 = beat_features(&locate_fiducials(&scaled, fs).unwrap());
        for i in 0..4 {
            assert_eq!(f0.0[i], f1.0[i]);
        }
        for i in 4..9 {
            assert!((f1.0[i] - c * f0.0[i]).abs() < 1e-12);
        }
    }
}
