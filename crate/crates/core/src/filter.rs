//! Zero-phase Butterworth band-pass built from two biquad sections.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Transposed direct-form II biquad, coefficients normalised so a0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Second-order Butterworth low-pass via the bilinear transform.
    pub fn lowpass(cutoff: f64, fs: f64) -> Self {
        let k = (PI * cutoff / fs).tan();
        let q = FRAC_1_SQRT_2;
        let norm = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * norm;
        Biquad {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
        }
    }

    /// Second-order Butterworth high-pass via the bilinear transform.
    pub fn highpass(cutoff: f64, fs: f64) -> Self {
        let k = (PI * cutoff / fs).tan();
        let q = FRAC_1_SQRT_2;
        let norm = 1.0 / (1.0 + k / q + k * k);
        Biquad {
            b: [norm, -2.0 * norm, norm],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Magnitude response at `freq`.
    pub fn gain_at(&self, freq: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * freq / fs;
        let (c1, s1, c2, s2) = (w.cos(), -w.sin(), (2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b[0] + self.b[1] * c1 + self.b[2] * c2,
            self.b[1] * s1 + self.b[2] * s2,
        );
        let den = (
            1.0 + self.a[0] * c1 + self.a[1] * c2,
            self.a[0] * s1 + self.a[1] * s2,
        );
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }

    /// Filters `x` in place starting from the steady state for a constant
    /// input equal to `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let y0 = self.dc_gain() * x0;
        let mut z1 = y0 - b0 * x0;
        let mut z2 = b2 * x0 - a2 * y0;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + z1;
            z1 = b1 * input - a1 * y + z2;
            z2 = b2 * input - a2 * y;
            *v = y;
        }
    }
}

/// A cascade of biquads applied forward then backward.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    pub sections: Vec<Biquad>,
    pad: usize,
}

impl BandPass {
    pub fn new(fs: f64, low: f64, high: f64) -> Result<Self> {
        if !(fs.is_finite() && low > 0.0 && low < high && high < fs / 2.0) {
            return Err(Error::InvalidBand { low, high, fs });
        }
        Ok(BandPass {
            sections: alloc::vec![Biquad::highpass(low, fs), Biquad::lowpass(high, fs)],
            pad: (3.0 * fs / low).ceil() as usize,
        })
    }

    /// Single-pass magnitude response; the zero-phase response is its square.
    pub fn gain_at(&self, freq: f64, fs: f64) -> f64 {
        self.sections.iter().map(|s| s.gain_at(freq, fs)).product()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = self.pad.min(n - 1);
        // odd extension around both end points
        let mut buf = Vec::with_capacity(n + 2 * pad);
        buf.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        buf.extend_from_slice(x);
        buf.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        for s in &self.sections {
            s.run(&mut buf);
        }
        buf.reverse();
        for s in &self.sections {
            s.run(&mut buf);
        }
        buf.reverse();
        buf.drain(..pad);
        buf.truncate(n);
        buf
    }
}

/// Zero-phase band-pass of `channel`. Output length equals input length.
pub fn bandpass(channel: &[f64], fs: f64, low: f64, high: f64) -> Result<Vec<f64>> {
    let filter = BandPass::new(fs, low, high)?;
    if channel.len() < 8 {
        return Err(Error::SignalTooShort {
            len: channel.len(),
            required: 8,
        });
    }
    Ok(filter.apply(channel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs).sin())
            .collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn constant_input_is_rejected() {
        let c = 3.7;
        let out = bandpass(&vec![c; 4000], 500.0, 5.0, 15.0).unwrap();
        assert_eq!(out.len(), 4000);
        // steady-state initial conditions leave no edge transient to trim
        assert!(
            out.iter().all(|v| v.abs() < 1e-6 * c),
            "max {:?}",
            out.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        );
    }

    #[test]
    fn passband_centre_within_3_db() {
        let fs = 500.0;
        let filt = BandPass::new(fs, 5.0, 15.0).unwrap();
        // designed response at the band centre, squared for forward-backward
        let designed = filt.gain_at(10.0, fs).powi(2);
        let x = sine(10.0, fs, 10_000);
        let y = filt.apply(&x);
        let measured = rms(&y[2000..8000]) / rms(&x[2000..8000]);
        assert!(
            (measured - designed).abs() < 0.01,
            "measured {measured} designed {designed}"
        );
        assert!(20.0 * measured.log10() > -3.0);
    }

    #[test]
    fn above_band_attenuated_20_db() {
        let fs = 500.0;
        let x = sine(fs / 2.05, fs, 10_000);
        let y = bandpass(&x, fs, 5.0, 15.0).unwrap();
        let gain_db = 20.0 * (rms(&y[2000..8000]) / rms(&x[2000..8000])).log10();
        assert!(gain_db < -20.0, "gain {gain_db} dB");
    }

    #[test]
    fn dc_attenuated_40_db() {
        let filt = BandPass::new(1000.0, 5.0, 15.0).unwrap();
        assert!(20.0 * filt.gain_at(1e-6, 1000.0).powi(2).log10() < -40.0);
    }

    #[test]
    fn invalid_bands() {
        assert!(matches!(
            bandpass(&[0.0; 16], 100.0, 15.0, 5.0),
            Err(Error::InvalidBand { .. })
        ));
        assert!(matches!(
            bandpass(&[0.0; 16], 100.0, 5.0, 50.0),
            Err(Error::InvalidBand { .. })
        ));
        assert!(matches!(
            bandpass(&[0.0; 16], 100.0, 0.0, 10.0),
            Err(Error::InvalidBand { .. })
        ));
        assert!(matches!(
            bandpass(&[0.0; 4], 100.0, 5.0, 15.0),
            Err(Error::SignalTooShort { .. })
        ));
    }
}
