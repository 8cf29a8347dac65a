use ecgid_core::detect::{detect_r_peaks, DetectorConfig};
use ecgid_core::synth::{SynthConfig, SynthSubject};

fn clean_rms(cfg: &SynthConfig, seed: u64) -> f64 {
    let quiet = SynthConfig {
        noise_rms: 0.0,
        ..cfg.clone()
    };
    let s = SynthSubject::new(&quiet, seed, 0, 0).unwrap();
    let x = s.render(0, s.n_samples);
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Matches detections to truth within `tol` samples, one-to-one.
fn match_counts(truth: &[usize], found: &[usize], tol: usize) -> (usize, usize) {
    let mut hits = 0;
    let mut j = 0;
    for &t in truth {
        while j < found.len() && found[j] + tol < t {
            j += 1;
        }
        if j < found.len() && found[j].abs_diff(t) <= tol {
            hits += 1;
            j += 1;
        }
    }
    (hits, found.len())
}

#[test]
fn perfect_detection_40_to_180_bpm() {
    for (k, bpm) in (40..=180).step_by(20).enumerate() {
        for fs in [250.0, 500.0, 1000.0] {
            let mut cfg = SynthConfig {
                n_subjects: 1,
                duration_s: 60.0,
                fs,
                heart_rate_bpm: bpm as f64,
                heart_rate_spread_bpm: 0.0,
                rr_jitter: 0.05,
                ..SynthConfig::default()
            };
            let seed = 100 + k as u64;
            // 20 dB: noise power one hundredth of the clean signal power
            cfg.noise_rms = clean_rms(&cfg, seed) / 10.0;
            let s = SynthSubject::new(&cfg, seed, 0, 0).unwrap();
            let x = s.render(0, s.n_samples);
            let truth = s.r_indices();
            let found = detect_r_peaks(&x, fs, &DetectorConfig::default()).unwrap();
            let tol = (0.010 * fs) as usize;
            let (hits, n_found) = match_counts(&truth, &found, tol);
            assert_eq!(
                hits,
                truth.len(),
                "{bpm} bpm @ {fs} Hz: recall {hits}/{}",
                truth.len()
            );
            assert_eq!(
                n_found, hits,
                "{bpm} bpm @ {fs} Hz: {n_found} detections, {hits} true"
            );
        }
    }
}
