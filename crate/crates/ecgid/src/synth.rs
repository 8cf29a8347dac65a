//! Writes generated subjects as a WFDB database with ground truth.

use std::fs;
use std::path::Path;

use ecgid_core::experiments::Executor;
use ecgid_core::synth::{SynthConfig, SynthSubject};
use ecgid_core::wfdb::{format_header, RecordHeader, SignalSpec, StorageFormat};

use crate::database::{write_manifest, ManifestEntry, Phase, MANIFEST};
use crate::error::{Error, Result};
use crate::record::{write_file, SignalWriter};

const WAVES: [&str; 5] = ["P", "Q", "R", "S", "T"];
const CHUNK_SECONDS: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// Pre-dose recording shape; its T-wave fields are ignored.
    pub config: SynthConfig,
    /// Post-dose sessions per subject, rendered with the configured T-wave
    /// shift and scale. With none, `config`'s T-wave perturbation applies
    /// to the single session.
    pub post_sessions: u64,
    pub format: StorageFormat,
}

/// Gain leaving headroom for the generated amplitudes in each format.
fn gain(format: StorageFormat) -> f64 {
    match format {
        StorageFormat::Fmt16 => 1000.0,
        StorageFormat::Fmt212 => 200.0,
    }
}

fn record_name(subject: &SynthSubject) -> String {
    format!("{}_s{}", subject.name(), subject.session)
}

fn write_subject(
    dir: &Path,
    s: &SynthSubject,
    leads: &[String],
    format: StorageFormat,
) -> Result<()> {
    let name = record_name(s);
    let dat = format!("{name}.dat");
    let g = gain(format);
    let header = RecordHeader {
        record_name: name.clone(),
        n_signals: leads.len(),
        sampling_rate: s.sampling_rate(),
        n_samples: s.n_samples,
        signals: leads
            .iter()
            .map(|l| SignalSpec {
                file_name: dat.clone(),
                storage_format: format,
                gain: g,
                baseline: 0,
                units: "mV".into(),
                adc_resolution: match format {
                    StorageFormat::Fmt16 => 16,
                    StorageFormat::Fmt212 => 12,
                },
                adc_zero: 0,
                description: l.clone(),
            })
            .collect(),
    };
    let mut w = SignalWriter::create(&dir.join(&dat), format, g)?;
    let chunk = (CHUNK_SECONDS * s.sampling_rate()) as usize;
    let mut start = 0;
    while start < s.n_samples {
        let x = s.render(start, start + chunk);
        let frames: Vec<f64> = x
            .iter()
            .flat_map(|v| std::iter::repeat_n(*v, leads.len()))
            .collect();
        w.write(&frames)?;
        start += chunk;
    }
    w.finish()?;
    write_file(
        &dir.join(format!("{name}.hea")),
        format_header(&header).as_bytes(),
    )?;

    let truth = dir.join(format!("{name}.truth.csv"));
    let mut t = csv::Writer::from_path(&truth).map_err(|e| Error::csv(&truth, e))?;
    t.write_record(["beat", "r_index", "time_s", "amp_scale"])
        .map_err(|e| Error::csv(&truth, e))?;
    for (i, b) in s.beats.iter().enumerate() {
        t.write_record([
            i.to_string(),
            b.r_index.to_string(),
            (b.r_index as f64 / s.sampling_rate()).to_string(),
            b.amp_scale.to_string(),
        ])
        .map_err(|e| Error::csv(&truth, e))?;
    }
    t.flush().map_err(|e| Error::io(&truth, e))
}

/// Renders every subject and session into `dir`: `RECORDS`, one `.hea` /
/// `.dat` pair and one `.truth.csv` (R peaks) per recording, plus
/// `morphology.csv` and a manifest marking pre- and post-dose sessions.
/// Returns the record names.
pub fn write_synth<E: Executor>(
    dir: &Path,
    opts: &SynthOptions,
    seed: u64,
    exec: &E,
) -> Result<Vec<String>> {
    opts.config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pre_cfg = if opts.post_sessions > 0 {
        SynthConfig {
            t_shift_ms: 0.0,
            t_scale: 1.0,
            ..opts.config.clone()
        }
    } else {
        opts.config.clone()
    };
    let mut jobs = Vec::new();
    for i in 0..opts.config.n_subjects {
        jobs.push((i, 0u64));
        for k in 1..=opts.post_sessions {
            jobs.push((i, k));
        }
    }
    let subjects = exec.map(jobs, |(i, session)| -> Result<SynthSubject> {
        let cfg = if session == 0 { &pre_cfg } else { &opts.config };
        let s = SynthSubject::new(cfg, seed, i, session)?;
        write_subject(dir, &s, &opts.config.leads, opts.format)?;
        Ok(s)
    });
    let subjects = subjects.into_iter().collect::<Result<Vec<_>>>()?;

    let names: Vec<String> = subjects.iter().map(record_name).collect();
    let mut index = names.join("\n");
    index.push('\n');
    write_file(&dir.join("RECORDS"), index.as_bytes())?;

    let manifest: Vec<ManifestEntry> = subjects
        .iter()
        .map(|s| ManifestEntry {
            record: record_name(s),
            subject: s.name(),
            phase: Some(if s.session == 0 {
                Phase::Pre
            } else {
                Phase::Post
            }),
            arm: (s.session > 0).then(|| "synthetic".to_string()),
        })
        .collect();
    write_manifest(&dir.join(MANIFEST), &manifest)?;

    let morph = dir.join("morphology.csv");
    let mut m = csv::Writer::from_path(&morph).map_err(|e| Error::csv(&morph, e))?;
    m.write_record([
        "record",
        "subject",
        "wave",
        "centre_ms",
        "width_ms",
        "amp_mv",
    ])
    .map_err(|e| Error::csv(&morph, e))?;
    for s in &subjects {
        for (w, label) in s.morphology.waves.iter().zip(WAVES) {
            m.write_record([
                record_name(s),
                s.name(),
                label.to_string(),
                w.centre_ms.to_string(),
                w.width_ms.to_string(),
                w.amp_mv.to_string(),
            ])
            .map_err(|e| Error::csv(&morph, e))?;
        }
    }
    m.flush().map_err(|e| Error::io(&morph, e))?;
    Ok(names)
}
