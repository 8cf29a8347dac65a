//! WFDB and CSV records on disk.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use ecgid_core::experiments::ChannelSource;
use ecgid_core::wfdb::{
    self, assemble_record, format_header, parse_header, RecordHeader, SignalRecord, SignalSpec,
    StorageFormat,
};

use crate::error::{Error, InFile, Result};

/// `rec`, `rec.hea` and `rec.dat` all name the record `rec`.
pub fn record_base(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("hea" | "dat") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn header_path(path: &Path) -> PathBuf {
    with_suffix(&record_base(path), ".hea")
}

pub fn load_header(path: &Path) -> Result<RecordHeader> {
    let hea = header_path(path);
    let text = fs::read_to_string(&hea).map_err(|e| Error::io(&hea, e))?;
    parse_header(&text).in_file(&hea)
}

fn signal_dir(path: &Path) -> PathBuf {
    record_base(path)
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

fn assemble(path: &Path, header: &RecordHeader, wanted: Option<&[usize]>) -> Result<SignalRecord> {
    let dir = signal_dir(path);
    let mut failed = None;
    let rec = assemble_record(header, wanted, |name| match fs::read(dir.join(name)) {
        Ok(b) => Some(b),
        Err(e) => {
            failed = Some((dir.join(name), e));
            None
        }
    });
    match (rec, failed) {
        (Ok(r), _) => Ok(r),
        (Err(_), Some((p, e))) => Err(Error::io(&p, e)),
        (Err(e), None) => Err(e).in_file(&header_path(path)),
    }
}

/// Loads and calibrates every channel of a WFDB record.
pub fn load_record(path: &Path) -> Result<SignalRecord> {
    let header = load_header(path)?;
    assemble(path, &header, None)
}

/// Loads only the named leads (case-insensitive); leads the record lacks
/// are left out of the result.
pub fn load_leads(path: &Path, leads: &[&str]) -> Result<SignalRecord> {
    let header = load_header(path)?;
    let wanted: Vec<usize> = header
        .signals
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            leads
                .iter()
                .any(|l| s.description.trim().eq_ignore_ascii_case(l))
        })
        .map(|(i, _)| i)
        .collect();
    assemble(path, &header, Some(&wanted))
}

/// Writes `record` as `<dir>/<record name>.hea` plus one signal file in
/// `format`, requantised with each channel's gain and baseline.
pub fn write_record(dir: &Path, record: &SignalRecord, format: StorageFormat) -> Result<PathBuf> {
    let name = &record.header.record_name;
    let base = dir.join(name);
    let mut header = record.header.clone();
    let dat = format!("{name}.dat");
    for s in &mut header.signals {
        s.file_name = dat.clone();
        s.storage_format = format;
        s.adc_resolution = match format {
            StorageFormat::Fmt16 => 16,
            StorageFormat::Fmt212 => 12,
        };
    }
    let adc: Vec<Vec<i32>> = record
        .channels
        .iter()
        .zip(&header.signals)
        .map(|(c, s)| {
            let scale = s.millivolts_per_unit();
            c.iter()
                .map(|v| wfdb::to_adc(v / scale, s.gain, s.baseline))
                .collect()
        })
        .collect();
    let bytes = wfdb::encode_samples(&adc, format).in_file(&dir.join(&dat))?;
    write_file(&dir.join(&dat), &bytes)?;
    write_file(
        &with_suffix(&base, ".hea"),
        format_header(&header).as_bytes(),
    )?;
    Ok(base)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_spec(file: &str, name: &str) -> SignalSpec {
    SignalSpec {
        file_name: file.to_string(),
        storage_format: StorageFormat::Fmt16,
        gain: 200.0,
        baseline: 0,
        units: "mV".to_string(),
        adc_resolution: 16,
        adc_zero: 0,
        description: name.to_string(),
    }
}

/// Reads a CSV whose header row names the channels and whose cells are
/// already in mV.
pub fn load_csv(path: &Path, sampling_rate: f64) -> Result<SignalRecord> {
    if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
        return Err(Error::Usage(format!(
            "sampling rate {sampling_rate} must be positive"
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::csv(path, "no channel names in the header row"));
    }
    let mut channels = vec![Vec::new(); names.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::csv(path, format!("row {}: '{cell}' is not numeric", row + 2))
            })?;
            channels[c].push(v);
        }
    }
    let file = path
        .file_name()
        .and_then(|f| f.to_str())
        .unwrap_or_default();
    let stem = path
        .file_stem()
        .and_then(|f| f.to_str())
        .unwrap_or("record");
    let header = RecordHeader {
        record_name: stem.to_string(),
        n_signals: names.len(),
        sampling_rate,
        n_samples: 0,
        signals: names.iter().map(|n| csv_spec(file, n)).collect(),
    };
    SignalRecord::new(header, channels).in_file(path)
}

/// Writes the channels as CSV in mV; `load_csv` reads it back exactly.
pub fn write_csv(path: &Path, record: &SignalRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(&record.channel_names)
        .map_err(|e| Error::csv(path, e))?;
    for i in 0..record.len() {
        w.write_record(record.channels.iter().map(|c| c[i].to_string()))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One channel of a WFDB record read on demand from its signal file, for
/// recordings too long to hold in memory.
#[derive(Debug, Clone)]
pub struct FileChannel {
    path: PathBuf,
    pub name: String,
    fs: f64,
    len: usize,
    format: StorageFormat,
    /// Signals interleaved in the file, and this channel's position among them.
    width: usize,
    offset: usize,
    spec: SignalSpec,
}

impl FileChannel {
    /// Opens the named lead, or the first channel when `lead` is `None`.
    pub fn open(path: &Path, lead: Option<&str>) -> Result<Self> {
        let header = load_header(path)?;
        let index = match lead {
            None => 0,
            Some(l) => header
                .signals
                .iter()
                .position(|s| s.description.trim().eq_ignore_ascii_case(l))
                .ok_or_else(|| Error::bad_file(&header_path(path), format!("no lead named {l}")))?,
        };
        let spec = header.signals[index].clone();
        let members: Vec<usize> = (0..header.signals.len())
            .filter(|&i| header.signals[i].file_name == spec.file_name)
            .collect();
        let offset = members.iter().position(|&i| i == index).unwrap_or(0);
        let file = signal_dir(path).join(&spec.file_name);
        let bytes = fs::metadata(&file).map_err(|e| Error::io(&file, e))?.len() as usize;
        let width = members.len();
        let in_file = match spec.storage_format {
            StorageFormat::Fmt16 => bytes / 2,
            StorageFormat::Fmt212 => bytes / 3 * 2 + usize::from(bytes % 3 == 2),
        } / width;
        let len = if header.n_samples == 0 {
            in_file
        } else if header.n_samples > in_file {
            return Err(Error::InFile {
                path: file,
                source: ecgid_core::Error::TruncatedFile(format!(
                    "header declares {} frames, file holds {in_file}",
                    header.n_samples
                )),
            });
        } else {
            header.n_samples
        };
        let name = if spec.description.is_empty() {
            format!("ch{index}")
        } else {
            spec.description.clone()
        };
        Ok(FileChannel {
            path: file,
            name,
            fs: header.sampling_rate,
            len,
            format: spec.storage_format,
            width,
            offset,
            spec,
        })
    }

    fn read_raw(&self, start: usize, end: usize) -> std::io::Result<Vec<u8>> {
        let (first, count) = (start * self.width, (end - start) * self.width);
        let (byte0, nbytes) = match self.format {
            StorageFormat::Fmt16 => (first * 2, count * 2),
            StorageFormat::Fmt212 => {
                let last = first + count;
                (first / 2 * 3, last.div_ceil(2) * 3 - first / 2 * 3)
            }
        };
        let mut f = File::open(&self.path)?;
        let size = f.metadata()?.len() as usize;
        f.seek(SeekFrom::Start(byte0 as u64))?;
        let mut buf = vec![0; nbytes.min(size.saturating_sub(byte0))];
        f.read_exact(&mut buf)?;
        Ok(buf)
    }
}

impl ChannelSource for FileChannel {
    fn sampling_rate(&self) -> f64 {
        self.fs
    }

    fn len(&self) -> usize {
        self.len
    }

    fn read(&self, start: usize, end: usize) -> ecgid_core::Result<Vec<f64>> {
        let end = end.min(self.len);
        if start >= end {
            return Ok(Vec::new());
        }
        let bytes = self.read_raw(start, end).map_err(|e| {
            ecgid_core::Error::MissingSignalFile(format!("{}: {e}", self.path.display()))
        })?;
        let flat = wfdb::decode_flat(&bytes, self.format)?;
        // format 212 reads start on a whole byte triple
        let skip = match self.format {
            StorageFormat::Fmt16 => 0,
            StorageFormat::Fmt212 => (start * self.width) % 2,
        };
        let scale = self.spec.millivolts_per_unit();
        let out: Vec<f64> = flat[skip..]
            .iter()
            .skip(self.offset)
            .step_by(self.width)
            .take(end - start)
            .map(|&r| wfdb::to_physical(r, self.spec.gain, self.spec.baseline) * scale)
            .collect();
        if out.len() != end - start {
            return Err(ecgid_core::Error::TruncatedFile(format!(
                "{}: wanted {} samples, read {}",
                self.path.display(),
                end - start,
                out.len()
            )));
        }
        Ok(out)
    }
}

/// Streams a long signal to a format-16 or 212 file chunk by chunk.
pub(crate) struct SignalWriter {
    path: PathBuf,
    out: BufWriter<File>,
    format: StorageFormat,
    gain: f64,
    /// Odd trailing 212 sample waiting for its partner.
    pending: Option<i32>,
}

impl SignalWriter {
    pub(crate) fn create(path: &Path, format: StorageFormat, gain: f64) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(SignalWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
            format,
            gain,
            pending: None,
        })
    }

    /// `frames` holds whole interleaved frames in mV.
    pub(crate) fn write(&mut self, frames: &[f64]) -> Result<()> {
        let mut adc: Vec<i32> = self.pending.take().into_iter().collect();
        adc.extend(frames.iter().map(|v| wfdb::to_adc(*v, self.gain, 0)));
        if self.format == StorageFormat::Fmt212 && adc.len() % 2 == 1 {
            self.pending = adc.pop();
        }
        let bytes = wfdb::encode_flat(&adc, self.format).in_file(&self.path)?;
        self.out
            .write_all(&bytes)
            .map_err(|e| Error::io(&self.path, e))
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        if let Some(p) = self.pending.take() {
            let bytes = wfdb::encode_flat(&[p], self.format).in_file(&self.path)?;
            self.out
                .write_all(&bytes)
                .map_err(|e| Error::io(&self.path, e))?;
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
