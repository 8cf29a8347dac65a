//! PhysioNet-style database directories: a `RECORDS` index, per-record
//! files and an optional `manifest.csv` (record, subject, phase, arm).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use ecgid_core::detect::DetectorConfig;
use ecgid_core::experiments::{
    beat_series, extract_holter, BeatSeries, DrugSubject, Executor, HolterSubject, RecordBeats,
    SubjectRecords,
};
use ecgid_core::wfdb::SignalRecord;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, InFile, Result};
use crate::record::{self, FileChannel};

pub const MANIFEST: &str = "manifest.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pre,
    Post,
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pre" | "predose" | "pre-dose" | "baseline" => Ok(Phase::Pre),
            "post" | "postdose" | "post-dose" => Ok(Phase::Post),
            other => Err(format!("unknown phase '{other}' (expected pre or post)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub record: String,
    pub subject: String,
    #[serde(default, deserialize_with = "phase_or_empty")]
    pub phase: Option<Phase>,
    #[serde(default)]
    pub arm: Option<String>,
}

fn phase_or_empty<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<Phase>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    match s.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some(p) => p.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for e in entries {
        w.serialize(e).map_err(|err| Error::csv(path, err))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct Database {
    pub root: PathBuf,
    /// Entries of `RECORDS`, in file order.
    pub records: Vec<String>,
    manifest: HashMap<String, ManifestEntry>,
    /// Sampling rate assumed for records stored as CSV.
    pub csv_rate: f64,
}

impl Database {
    /// Reads `RECORDS` and, when present, the manifest (`manifest` or
    /// `<root>/manifest.csv`).
    pub fn open(root: &Path, manifest: Option<&Path>) -> Result<Self> {
        let index = root.join("RECORDS");
        let text = fs::read_to_string(&index).map_err(|e| Error::io(&index, e))?;
        let records: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_end_matches('/').to_string())
            .collect();
        if records.is_empty() {
            return Err(Error::bad_file(&index, "lists no records"));
        }
        let default = root.join(MANIFEST);
        let manifest = match manifest {
            Some(p) => read_manifest(p)?,
            None if default.exists() => read_manifest(&default)?,
            None => Vec::new(),
        };
        Ok(Database {
            root: root.to_path_buf(),
            records,
            manifest: manifest
                .into_iter()
                .map(|e| (e.record.clone(), e))
                .collect(),
            csv_rate: 500.0,
        })
    }

    pub fn has_manifest(&self) -> bool {
        !self.manifest.is_empty()
    }

    pub fn entry(&self, record: &str) -> Option<&ManifestEntry> {
        self.manifest.get(record)
    }

    /// Manifest subject, else the record's directory (`patient001/s0010_re`),
    /// else the record name itself.
    pub fn subject_of(&self, record: &str) -> String {
        if let Some(e) = self.entry(record) {
            return e.subject.clone();
        }
        match record.rsplit_once('/') {
            Some((dir, _)) => dir.rsplit('/').next().unwrap_or(dir).to_string(),
            None => record.to_string(),
        }
    }

    pub fn path(&self, record: &str) -> PathBuf {
        self.root.join(record)
    }

    /// Subjects in order of first appearance, each with its records in
    /// index order.
    pub fn subjects(&self) -> Vec<(String, Vec<String>)> {
        let mut out: Vec<(String, Vec<String>)> = Vec::new();
        for r in &self.records {
            let s = self.subject_of(r);
            match out.iter_mut().find(|(n, _)| *n == s) {
                Some((_, v)) => v.push(r.clone()),
                None => out.push((s, vec![r.clone()])),
            }
        }
        out
    }

    fn is_csv(&self, record: &str) -> bool {
        record.ends_with(".csv") && !record::header_path(&self.path(record)).exists()
    }

    /// Loads the named leads (all channels when empty).
    pub fn load(&self, record: &str, leads: &[&str]) -> Result<SignalRecord> {
        let path = self.path(record);
        let mut rec = if self.is_csv(record) {
            record::load_csv(&path, self.csv_rate)?
        } else if leads.is_empty() {
            record::load_record(&path)?
        } else {
            record::load_leads(&path, leads)?
        };
        rec.header.record_name = record.to_string();
        if self.is_csv(record) && !leads.is_empty() {
            let keep: Vec<usize> = (0..rec.channels.len())
                .filter(|&i| {
                    leads
                        .iter()
                        .any(|l| rec.channel_names[i].trim().eq_ignore_ascii_case(l))
                })
                .collect();
            let mut header = rec.header.clone();
            header.signals = keep
                .iter()
                .map(|&i| rec.header.signals[i].clone())
                .collect();
            let channels = keep.iter().map(|&i| rec.channels[i].clone()).collect();
            rec = SignalRecord::new(header, channels).in_file(&path)?;
        }
        Ok(rec)
    }
}

fn series_or_warn(rec: &SignalRecord, lead: &str, cfg: &DetectorConfig) -> Option<BeatSeries> {
    match beat_series(rec, lead, cfg) {
        Ok(s) => Some(s),
        Err(e) => {
            warn!("{} ({lead}): {e}; lead skipped", rec.header.record_name);
            None
        }
    }
}

/// Beat series of every listed lead of every record, grouped by subject.
pub fn lead_sweep_input<E: Executor>(
    db: &Database,
    leads: &[&str],
    cfg: &DetectorConfig,
    exec: &E,
) -> Result<Vec<SubjectRecords>> {
    let jobs: Vec<&String> = db.records.iter().collect();
    let loaded = exec.map(jobs, |r| -> Result<RecordBeats> {
        let rec = db.load(r, leads)?;
        let leads = leads
            .iter()
            .filter(|l| rec.channel_index(l).is_some())
            .filter_map(|l| series_or_warn(&rec, l, cfg))
            .collect();
        Ok(RecordBeats {
            record: r.clone(),
            leads,
        })
    });
    let mut by_record: HashMap<String, RecordBeats> = HashMap::new();
    for rb in loaded {
        let rb = rb?;
        by_record.insert(rb.record.clone(), rb);
    }
    let subjects: Vec<SubjectRecords> = db
        .subjects()
        .into_iter()
        .map(|(subject, records)| SubjectRecords {
            subject,
            records: records.iter().filter_map(|r| by_record.remove(r)).collect(),
        })
        .collect();
    info!(
        "{} records from {} subjects",
        db.records.len(),
        subjects.len()
    );
    Ok(subjects)
}

/// First beats and half-hour slots of every record, read in pieces from
/// disk. One record per subject; later records of a subject are ignored.
pub fn holter_input<E: Executor>(
    db: &Database,
    lead: Option<&str>,
    fragment_len: usize,
    cfg: &DetectorConfig,
    exec: &E,
) -> Result<Vec<HolterSubject>> {
    let jobs: Vec<(String, String)> = db
        .subjects()
        .into_iter()
        .map(|(s, records)| {
            if records.len() > 1 {
                warn!("{s}: {} records, using {}", records.len(), records[0]);
            }
            (s, records[0].clone())
        })
        .collect();
    exec.map(jobs, |(subject, r)| {
        let path = db.path(&r);
        let channel = FileChannel::open(&path, lead)?;
        let name = channel.name.clone();
        extract_holter(&subject, &r, &name, &channel, fragment_len, cfg).in_file(&path)
    })
    .into_iter()
    .collect()
}

/// Pre- and post-dose beat series per subject, from the manifest phases.
/// With `arm` set, only post-dose records of that arm are kept.
pub fn drug_input<E: Executor>(
    db: &Database,
    lead: Option<&str>,
    arm: Option<&str>,
    cfg: &DetectorConfig,
    exec: &E,
) -> Result<Vec<DrugSubject>> {
    if !db.has_manifest() {
        return Err(Error::bad_file(
            &db.root.join(MANIFEST),
            "the drug protocol needs a manifest with a phase column",
        ));
    }
    let wanted = |r: &String| -> Option<(String, Phase)> {
        let e = db.entry(r)?;
        let phase = e.phase?;
        if phase == Phase::Post {
            if let Some(arm) = arm {
                let same = e
                    .arm
                    .as_deref()
                    .is_some_and(|a| a.eq_ignore_ascii_case(arm));
                if !same {
                    return None;
                }
            }
        }
        Some((r.clone(), phase))
    };
    let jobs: Vec<(String, Phase)> = db.records.iter().filter_map(wanted).collect();
    let loaded = exec.map(
        jobs,
        |(r, phase)| -> Result<(String, Phase, Option<BeatSeries>)> {
            let rec = db.load(&r, &[])?;
            let lead = match lead {
                Some(l) => l.to_string(),
                None => rec.channel_names.first().cloned().unwrap_or_default(),
            };
            Ok((r, phase, series_or_warn(&rec, &lead, cfg)))
        },
    );
    let mut out: Vec<DrugSubject> = Vec::new();
    for item in loaded {
        let (r, phase, series) = item?;
        let subject = db.subject_of(&r);
        let idx = match out.iter().position(|s| s.subject == subject) {
            Some(i) => i,
            None => {
                out.push(DrugSubject {
                    subject,
                    pre: Vec::new(),
                    post: Vec::new(),
                });
                out.len() - 1
            }
        };
        if let Some(s) = series {
            match phase {
                Phase::Pre => out[idx].pre.push(s),
                Phase::Post => out[idx].post.push(s),
            }
        }
    }
    Ok(out)
}
