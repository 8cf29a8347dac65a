//! WFDB record headers and the format 16 / 212 sample codecs.
//!
//! Only single-segment records with fixed-layout signal files are
//! accepted. Everything here works on in-memory text and bytes; reading the
//! files is the caller's job (see [`assemble_record`]).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gain used when a header leaves the field empty or writes 0.
pub const DEFAULT_GAIN: f64 = 200.0;
/// Sampling frequency assumed when the record line omits it.
pub const DEFAULT_SAMPLING_RATE: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StorageFormat {
    /// 16-bit little-endian two's complement.
    Fmt16,
    /// Pairs of 12-bit two's complement samples packed into three bytes.
    Fmt212,
}

impl StorageFormat {
    pub fn from_code(code: &str) -> Result<Self> {
        match code {
            "16" => Ok(StorageFormat::Fmt16),
            "212" => Ok(StorageFormat::Fmt212),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }

    pub fn code(self) -> u32 {
        match self {
            StorageFormat::Fmt16 => 16,
            StorageFormat::Fmt212 => 212,
        }
    }

    pub fn range(self) -> (i32, i32) {
        match self {
            StorageFormat::Fmt16 => (-32768, 32767),
            StorageFormat::Fmt212 => (-2048, 2047),
        }
    }

    fn default_resolution(self) -> u32 {
        match self {
            StorageFormat::Fmt16 => 16,
            StorageFormat::Fmt212 => 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub file_name: String,
    pub storage_format: StorageFormat,
    /// ADC units per physical unit.
    pub gain: f64,
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u32,
    pub adc_zero: i32,
    pub description: String,
}

impl SignalSpec {
    /// Factor converting one physical unit of this signal into millivolts.
    pub fn millivolts_per_unit(&self) -> f64 {
        match self.units.as_str() {
            "uV" | "µV" => 1e-3,
            "V" => 1e3,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub record_name: String,
    pub n_signals: usize,
    pub sampling_rate: f64,
    /// Frames per signal; 0 means "infer from the signal file size".
    pub n_samples: usize,
    pub signals: Vec<SignalSpec>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedHeader(msg.into())
}

fn parse_num<T: core::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| malformed(format!("{what} '{field}' is not numeric")))
}

/// Parses the text of a `.hea` file.
pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        })
        .map(str::trim)
        .filter(|l| !l.is_empty());

    let record_line = lines.next().ok_or_else(|| malformed("no record line"))?;
    let fields: Vec<&str> = record_line.split_whitespace().collect();
    if fields.len() < 3 {
        return Err(malformed(format!(
            "record line needs at least 3 fields, found {}",
            fields.len()
        )));
    }
    if fields[0].contains('/') {
        return Err(malformed("multi-segment records are not supported"));
    }
    let record_name = fields[0].to_string();
    let n_signals: usize = parse_num(fields[1], "signal count")?;
    if n_signals == 0 {
        return Err(malformed("record declares no signals"));
    }
    // fs may carry "/counter_freq(base_counter)" suffixes.
    let fs_field = fields[2].split(['/', '(']).next().unwrap_or_default();
    let sampling_rate: f64 = if fs_field.is_empty() {
        DEFAULT_SAMPLING_RATE
    } else {
        parse_num(fs_field, "sampling frequency")?
    };
    if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
        return Err(malformed("sampling frequency must be positive"));
    }
    let n_samples: usize = match fields.get(3) {
        Some(f) => parse_num(f, "sample count")?,
        None => 0,
    };

    let mut signals = Vec::with_capacity(n_signals);
    for _ in 0..n_signals {
        let line = lines.next().ok_or_else(|| {
            malformed(format!(
                "expected {n_signals} signal lines, found {}",
                signals.len()
            ))
        })?;
        signals.push(parse_signal_line(line)?);
    }

    Ok(RecordHeader {
        record_name,
        n_signals,
        sampling_rate,
        n_samples,
        signals,
    })
}

fn parse_signal_line(line: &str) -> Result<SignalSpec> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(malformed(format!(
            "signal line '{line}' lacks a format field"
        )));
    }
    let file_name = fields[0].to_string();
    let format_field = fields[1];
    if format_field.contains(['x', ':', '+']) {
        return Err(malformed(format!(
            "format modifiers in '{format_field}' are not supported"
        )));
    }
    let storage_format = StorageFormat::from_code(format_field)?;

    // gain[(baseline)][/units]
    let (mut gain, mut baseline, mut units) = (0.0, None, String::from("mV"));
    if let Some(g) = fields.get(2) {
        let (g, u) = match g.split_once('/') {
            Some((g, u)) => (g, Some(u)),
            None => (*g, None),
        };
        if let Some(u) = u {
            units = u.to_string();
        }
        let (g, b) = match g.split_once('(') {
            Some((g, rest)) => {
                let b = rest
                    .strip_suffix(')')
                    .ok_or_else(|| malformed(format!("unterminated baseline in '{g}'")))?;
                (g, Some(parse_num::<i32>(b, "baseline")?))
            }
            None => (g, None),
        };
        gain = parse_num(g, "gain")?;
        baseline = b;
    }
    if gain == 0.0 {
        gain = DEFAULT_GAIN;
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(malformed(format!("gain {gain} must be positive")));
    }

    let adc_resolution = match fields.get(3) {
        Some(f) => parse_num(f, "ADC resolution")?,
        None => storage_format.default_resolution(),
    };
    let adc_zero = match fields.get(4) {
        Some(f) => parse_num(f, "ADC zero")?,
        None => 0,
    };
    // fields 5..=7 are initial value, checksum and block size
    for (i, what) in [(5, "initial value"), (6, "checksum"), (7, "block size")] {
        if let Some(f) = fields.get(i) {
            parse_num::<i64>(f, what)?;
        }
    }
    let description = if fields.len() > 8 {
        fields[8..].join(" ")
    } else {
        String::new()
    };

    Ok(SignalSpec {
        file_name,
        storage_format,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        description,
    })
}

/// Renders a header that [`parse_header`] reads back to an equal value.
pub fn format_header(header: &RecordHeader) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {}",
        header.record_name, header.n_signals, header.sampling_rate, header.n_samples
    );
    for s in &header.signals {
        let _ = write!(
            out,
            "{} {} {}({})/{} {} {} 0 0 0",
            s.file_name,
            s.storage_format.code(),
            s.gain,
            s.baseline,
            s.units,
            s.adc_resolution,
            s.adc_zero
        );
        if !s.description.is_empty() {
            let _ = write!(out, " {}", s.description);
        }
        out.push('\n');
    }
    out
}

fn sign_extend_12(v: u16) -> i32 {
    let v = i32::from(v & 0x0FFF);
    if v & 0x800 != 0 {
        v - 0x1000
    } else {
        v
    }
}

/// Decodes every sample in `bytes`, in file order (frame-interleaved).
pub fn decode_flat(bytes: &[u8], format: StorageFormat) -> Result<Vec<i32>> {
    match format {
        StorageFormat::Fmt16 => {
            if bytes.len() % 2 != 0 {
                return Err(Error::TruncatedFile(format!(
                    "{} bytes is not a whole number of 16-bit samples",
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(2)
                .map(|c| i32::from(i16::from_le_bytes([c[0], c[1]])))
                .collect())
        }
        StorageFormat::Fmt212 => {
            // A trailing 2-byte group holds one final sample.
            if bytes.len() % 3 == 1 {
                return Err(Error::TruncatedFile(format!(
                    "{} bytes is not a whole number of 212 groups",
                    bytes.len()
                )));
            }
            let mut out = Vec::with_capacity(bytes.len() / 3 * 2 + 1);
            let mut chunks = bytes.chunks_exact(3);
            for c in &mut chunks {
                let (b0, b1, b2) = (u16::from(c[0]), u16::from(c[1]), u16::from(c[2]));
                out.push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
                out.push(sign_extend_12(b2 | ((b1 & 0xF0) << 4)));
            }
            if let [b0, b1] = chunks.remainder() {
                out.push(sign_extend_12(
                    u16::from(*b0) | ((u16::from(*b1) & 0x0F) << 8),
                ));
            }
            Ok(out)
        }
    }
}

/// Decodes a signal file holding `channel_count` interleaved channels.
///
/// `n` is the frame count to read; 0 infers it from the byte length. Bytes
/// past the requested frames are ignored.
pub fn decode_samples(
    bytes: &[u8],
    format: StorageFormat,
    n: usize,
    channel_count: usize,
) -> Result<Vec<Vec<i32>>> {
    let wanted: Vec<usize> = (0..channel_count).collect();
    decode_channels(bytes, format, n, channel_count, &wanted)
}

/// Like [`decode_samples`] but keeps only the channels listed in `wanted`.
pub fn decode_channels(
    bytes: &[u8],
    format: StorageFormat,
    n: usize,
    channel_count: usize,
    wanted: &[usize],
) -> Result<Vec<Vec<i32>>> {
    if channel_count == 0 {
        return Err(Error::InvalidRecord(
            "signal file with zero channels".into(),
        ));
    }
    if let Some(&bad) = wanted.iter().find(|&&c| c >= channel_count) {
        return Err(Error::InvalidRecord(format!(
            "channel {bad} out of range for {channel_count} channels"
        )));
    }
    let flat = decode_flat(bytes, format)?;
    let frames = if n == 0 {
        if flat.len() % channel_count != 0 {
            return Err(Error::TruncatedFile(format!(
                "{} samples do not split into {channel_count} channels",
                flat.len()
            )));
        }
        flat.len() / channel_count
    } else {
        if flat.len() < n * channel_count {
            return Err(Error::TruncatedFile(format!(
                "need {} samples for {n} frames, file holds {}",
                n * channel_count,
                flat.len()
            )));
        }
        n
    };
    Ok(wanted
        .iter()
        .map(|&c| {
            flat.iter()
                .skip(c)
                .step_by(channel_count)
                .take(frames)
                .copied()
                .collect()
        })
        .collect())
}

/// Packs frame-interleaved samples, the inverse of [`decode_flat`].
pub fn encode_flat(samples: &[i32], format: StorageFormat) -> Result<Vec<u8>> {
    let (lo, hi) = format.range();
    if let Some(&value) = samples.iter().find(|&&v| v < lo || v > hi) {
        return Err(Error::SampleOutOfRange {
            value,
            format: format.code(),
        });
    }
    match format {
        StorageFormat::Fmt16 => Ok(samples
            .iter()
            .flat_map(|&v| (v as i16).to_le_bytes())
            .collect()),
        StorageFormat::Fmt212 => {
            let mut out = Vec::with_capacity(samples.len().div_ceil(2) * 3);
            let mut pairs = samples.chunks_exact(2);
            for p in &mut pairs {
                let (a, b) = ((p[0] & 0x0FFF) as u16, (p[1] & 0x0FFF) as u16);
                out.push((a & 0xFF) as u8);
                out.push((((a >> 8) & 0x0F) | ((b >> 4) & 0xF0)) as u8);
                out.push((b & 0xFF) as u8);
            }
            if let [a] = pairs.remainder() {
                let a = (a & 0x0FFF) as u16;
                out.push((a & 0xFF) as u8);
                out.push(((a >> 8) & 0x0F) as u8);
            }
            Ok(out)
        }
    }
}

/// Interleaves per-channel samples and packs them.
pub fn encode_samples(channels: &[Vec<i32>], format: StorageFormat) -> Result<Vec<u8>> {
    let frames = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != frames) {
        return Err(Error::InvalidRecord("channels differ in length".into()));
    }
    let mut flat = Vec::with_capacity(frames * channels.len());
    for i in 0..frames {
        flat.extend(channels.iter().map(|c| c[i]));
    }
    encode_flat(&flat, format)
}

/// `(raw - baseline) / gain`.
pub fn to_physical(raw: i32, gain: f64, baseline: i32) -> f64 {
    (f64::from(raw) - f64::from(baseline)) / gain
}

/// Inverse of [`to_physical`], rounded to the nearest ADC unit.
pub fn to_adc(physical: f64, gain: f64, baseline: i32) -> i32 {
    (physical * gain + f64::from(baseline)).round() as i32
}

/// Calibrated multichannel ECG in millivolts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub header: RecordHeader,
    pub channels: Vec<Vec<f64>>,
    pub channel_names: Vec<String>,
}

impl SignalRecord {
    /// Validates channel lengths and finiteness. A header declaring zero
    /// samples is updated to the common channel length.
    pub fn new(mut header: RecordHeader, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.len() != header.signals.len() {
            return Err(Error::InvalidRecord(format!(
                "{} channels for {} signal specs",
                channels.len(),
                header.signals.len()
            )));
        }
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidRecord("channels differ in length".into()));
        }
        if header.n_samples == 0 {
            header.n_samples = len;
        } else if header.n_samples != len {
            return Err(Error::InvalidRecord(format!(
                "header declares {} samples, channels hold {len}",
                header.n_samples
            )));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRecord("non-finite sample".into()));
        }
        header.n_signals = channels.len();
        let channel_names = header
            .signals
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.description.is_empty() {
                    format!("ch{i}")
                } else {
                    s.description.clone()
                }
            })
            .collect();
        Ok(SignalRecord {
            header,
            channels,
            channel_names,
        })
    }

    pub fn sampling_rate(&self) -> f64 {
        self.header.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Case-insensitive lookup by lead name ("II", "ii", "V1", ...).
    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names
            .iter()
            .position(|n| n.trim().eq_ignore_ascii_case(name.trim()))
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channel_index(name)
            .map(|i| self.channels[i].as_slice())
    }
}

/// Builds a calibrated record, fetching signal file bytes through `read`.
///
/// `read` receives each distinct file name once, in header order. Only
/// channels whose indices appear in `wanted` are decoded (all when `None`);
/// the resulting record's header lists just those signals.
pub fn assemble_record<F>(
    header: &RecordHeader,
    wanted: Option<&[usize]>,
    mut read: F,
) -> Result<SignalRecord>
where
    F: FnMut(&str) -> Option<Vec<u8>>,
{
    let all: Vec<usize> = (0..header.signals.len()).collect();
    let wanted = wanted.unwrap_or(&all);

    // group signals by file, preserving first-appearance order
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, s) in header.signals.iter().enumerate() {
        match groups.iter_mut().find(|(f, _)| *f == s.file_name) {
            Some((_, members)) => members.push(i),
            None => groups.push((s.file_name.as_str(), alloc::vec![i])),
        }
    }

    let mut decoded: Vec<(usize, Vec<f64>)> = Vec::with_capacity(wanted.len());
    for (file, members) in &groups {
        let local: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|(_, g)| wanted.contains(g))
            .map(|(l, _)| l)
            .collect();
        if local.is_empty() {
            continue;
        }
        let format = header.signals[members[0]].storage_format;
        if members
            .iter()
            .any(|&m| header.signals[m].storage_format != format)
        {
            return Err(malformed(format!("mixed storage formats in {file}")));
        }
        let bytes = read(file).ok_or_else(|| Error::MissingSignalFile((*file).to_string()))?;
        let raw = decode_channels(&bytes, format, header.n_samples, members.len(), &local)?;
        for (l, samples) in local.into_iter().zip(raw) {
            let spec = &header.signals[members[l]];
            let scale = spec.millivolts_per_unit();
            let mv = samples
                .into_iter()
                .map(|r| to_physical(r, spec.gain, spec.baseline) * scale)
                .collect();
            decoded.push((members[l], mv));
        }
    }
    decoded.sort_by_key(|(i, _)| *i);
    decoded.retain(|(i, _)| wanted.contains(i));

    let len = decoded.first().map_or(0, |(_, c)| c.len());
    if decoded.iter().any(|(_, c)| c.len() != len) {
        return Err(Error::TruncatedFile(
            "signal files hold different numbers of frames".into(),
        ));
    }
    let mut sub = header.clone();
    sub.signals = decoded
        .iter()
        .map(|(i, _)| header.signals[*i].clone())
        .collect();
    sub.n_signals = sub.signals.len();
    SignalRecord::new(sub, decoded.into_iter().map(|(_, c)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn single_signal_header() {
        let h = parse_header("rec 1 1000 2000\nrec.dat 16 200 16 0 0 0 0 II").unwrap();
        assert_eq!(h.record_name, "rec");
        assert_eq!(h.n_signals, 1);
        assert_eq!(h.sampling_rate, 1000.0);
        assert_eq!(h.n_samples, 2000);
        assert_eq!(h.signals[0].storage_format, StorageFormat::Fmt16);
        assert_eq!(h.signals[0].description, "II");
        assert_eq!(h.signals[0].gain, 200.0);
    }

    #[test]
    fn two_signal_212_header_with_inferred_length() {
        let h =
            parse_header("rec 2 250 0\na.dat 212 200 12 0 0 0 0 MLII\na.dat 212 200 12 0 0 0 0 V5")
                .unwrap();
        assert_eq!(h.n_signals, 2);
        assert_eq!(h.n_samples, 0);
        assert!(h
            .signals
            .iter()
            .all(|s| s.storage_format == StorageFormat::Fmt212));
    }

    #[test]
    fn ptb_style_header() {
        let text = "# comment\ns0010_re 15 1000 38400\n\
            s0010_re.dat 16 2000 16 0 -489 -8337 0 i\n\
            s0010_re.dat 16 2000 16 0 -458 -24354 0 ii\n\
            s0010_re.dat 16 2000 16 0 31 -6176 0 iii\n\
            s0010_re.dat 16 2000 16 0 474 -13037 0 avr\n\
            s0010_re.dat 16 2000 16 0 -260 1329 0 avl\n\
            s0010_re.dat 16 2000 16 0 -214 -16007 0 avf\n\
            s0010_re.dat 16 2000 16 0 -5 -4628 0 v1\n\
            s0010_re.dat 16 2000 16 0 -25 15263 0 v2\n\
            s0010_re.dat 16 2000 16 0 -66 5498 0 v3\n\
            s0010_re.dat 16 2000 16 0 -128 -1932 0 v4\n\
            s0010_re.dat 16 2000 16 0 -33 -5373 0 v5\n\
            s0010_re.dat 16 2000 16 0 -96 -13237 0 v6\n\
            s0010_re.dat 16 2000 16 0 -49 -1617 0 vx\n\
            s0010_re.dat 16 2000 16 0 -64 -16106 0 vy\n\
            s0010_re.dat 16 2000 16 0 -4 -10533 0 vz\n\
            # age: 81\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.n_signals, 15);
        assert_eq!(h.sampling_rate, 1000.0);
        let names: Vec<&str> = h.signals[..12]
            .iter()
            .map(|s| s.description.as_str())
            .collect();
        assert_eq!(
            names,
            ["i", "ii", "iii", "avr", "avl", "avf", "v1", "v2", "v3", "v4", "v5", "v6"]
        );
        assert_eq!(h.signals[0].gain, 2000.0);
    }

    #[test]
    fn zero_gain_defaults() {
        let h = parse_header("r 1 360\nr.dat 212 0 11 1024 0 0 0 MLII").unwrap();
        assert_eq!(h.signals[0].gain, DEFAULT_GAIN);
        assert_eq!(h.signals[0].baseline, 1024);
    }

    #[test]
    fn gain_with_baseline_and_units() {
        let h = parse_header("r 1 500\nr.dat 16 400(-12)/uV 16 0 0 0 0 I").unwrap();
        let s = &h.signals[0];
        assert_eq!((s.gain, s.baseline, s.units.as_str()), (400.0, -12, "uV"));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_header(""), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            parse_header("rec 1"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_header("rec x 250"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_header("rec 2 250 10\na.dat 16"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_header("rec/3 2 250 10"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_header("rec 1 250\na.dat 80 200"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_header("rec 1 250\na.dat 310 200"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn header_round_trip() {
        let h = parse_header(
            "r 2 500 10\nr.dat 16 200(5)/mV 16 0 0 0 0 I\nr.dat 16 100 16 0 0 0 0 aVR",
        )
        .unwrap();
        assert_eq!(parse_header(&format_header(&h)).unwrap(), h);
    }

    #[test]
    fn decode_212_examples() {
        assert_eq!(
            decode_flat(&[0x01, 0x00, 0x02], StorageFormat::Fmt212).unwrap(),
            [1, 2]
        );
        assert_eq!(
            decode_flat(&[0x00, 0xF0, 0xFF], StorageFormat::Fmt212).unwrap(),
            [0, -1]
        );
    }

    #[test]
    fn decode_16_minus_one() {
        assert_eq!(
            decode_flat(&[0xFF, 0xFF], StorageFormat::Fmt16).unwrap(),
            [-1]
        );
    }

    #[test]
    fn truncated_files() {
        assert!(matches!(
            decode_flat(&[1, 2, 3], StorageFormat::Fmt16),
            Err(Error::TruncatedFile(_))
        ));
        assert!(matches!(
            decode_flat(&[1, 2, 3, 4], StorageFormat::Fmt212),
            Err(Error::TruncatedFile(_))
        ));
        assert!(matches!(
            decode_samples(&[0; 6], StorageFormat::Fmt16, 0, 2),
            Err(Error::TruncatedFile(_))
        ));
        assert!(matches!(
            decode_samples(&[0; 4], StorageFormat::Fmt16, 4, 1),
            Err(Error::TruncatedFile(_))
        ));
    }

    #[test]
    fn interleaved_channels() {
        let bytes = encode_flat(&[1, -1, 2, -2, 3, -3], StorageFormat::Fmt212).unwrap();
        let ch = decode_samples(&bytes, StorageFormat::Fmt212, 0, 2).unwrap();
        assert_eq!(ch, vec![vec![1, 2, 3], vec![-1, -2, -3]]);
        let only_second = decode_channels(&bytes, StorageFormat::Fmt212, 2, 2, &[1]).unwrap();
        assert_eq!(only_second, vec![vec![-1, -2]]);
    }

    #[test]
    fn calibration() {
        assert_eq!(to_physical(1024, 200.0, 1024), 0.0);
        assert_eq!(to_physical(1224, 200.0, 1024), 1.0);
        assert_eq!(to_physical(-2048, 200.0, 0), -10.24);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            encode_flat(&[2048], StorageFormat::Fmt212),
            Err(Error::SampleOutOfRange { .. })
        ));
    }

    #[test]
    fn assemble_two_files() {
        let h = parse_header(
            "r 3 100 4\na.dat 16 100 16 0 0 0 0 I\na.dat 16 100 16 0 0 0 0 II\nb.dat 212 200(10) 12 0 0 0 0 V1",
        )
        .unwrap();
        let a = encode_samples(
            &[vec![100, 200, 300, 400], vec![-100, -200, -300, -400]],
            StorageFormat::Fmt16,
        )
        .unwrap();
        let b = encode_samples(&[vec![10, 210, 410, 610]], StorageFormat::Fmt212).unwrap();
        let rec = assemble_record(&h, None, |f| match f {
            "a.dat" => Some(a.clone()),
            "b.dat" => Some(b.clone()),
            _ => None,
        })
        .unwrap();
        assert_eq!(rec.channels[0], [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(rec.channels[1], [-1.0, -2.0, -3.0, -4.0]);
        assert_eq!(rec.channels[2], [0.0, 1.0, 2.0, 3.0]);
        assert_eq!(rec.channel("ii").unwrap()[0], -1.0);

        let sub = assemble_record(&h, Some(&[2]), |f| match f {
            "b.dat" => Some(b.clone()),
            _ => None,
        })
        .unwrap();
        assert_eq!(sub.channel_names, ["V1"]);

        let missing = assemble_record(&h, None, |_| None);
        assert!(matches!(missing, Err(Error::MissingSignalFile(_))));
    }

    proptest! {
        #[test]
        fn fmt212_round_trip(v in proptest::collection::vec(-2048i32..=2047, 0..64)) {
            let bytes = encode_flat(&v, StorageFormat::Fmt212).unwrap();
            prop_assert_eq!(decode_flat(&bytes, StorageFormat::Fmt212).unwrap(), v);
        }

        #[test]
        fn fmt16_round_trip(v in proptest::collection::vec(any::<i16>().prop_map(i32::from), 0..64)) {
            let bytes = encode_flat(&v, StorageFormat::Fmt16).unwrap();
            prop_assert_eq!(decode_flat(&bytes, StorageFormat::Fmt16).unwrap(), v);
        }

        #[test]
        fn calibration_inverse(raw in -32768i32..=32767, baseline in -4096i32..=4096, gain in 1.0f64..5000.0) {
            prop_assert_eq!(to_adc(to_physical(raw, gain, baseline), gain, baseline), raw);
        }

        #[test]
        fn decoding_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..64), ch in 1usize..4, n in 0usize..20) {
            let _ = decode_samples(&bytes, StorageFormat::Fmt212, n, ch);
            let _ = decode_samples(&bytes, StorageFormat::Fmt16, n, ch);
        }

        #[test]
        fn header_parsing_is_total(text in "\\PC{0,200}") {
            let _ = parse_header(&text);
        }
    }
}
