//! Evaluation protocols: lead sweep, Holter drift and drug effect.
//!
//! Protocols consume beat series that were already extracted from records
//! (see [`extract_beats`] and [`excerpt_beats`]), build train/validation
//! datasets, and evaluate every method on every condition. Each
//! (method, condition) cell is an independent job whose seed is derived
//! from the master seed and the cell's names, so the order or parallelism
//! of execution never changes a result.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, ClassifierSpec, Params};
use crate::detect::{
    detect_r_peaks, segment_beats, DetectorConfig, DEFAULT_POST_SPAN_MS, DEFAULT_PRE_SPAN_MS,
};
use crate::features::{
    apply_standardizer, fit_standardizer, labelled_fragment, Dataset, FeatureVector,
    DEFAULT_FRAGMENT_LEN,
};
use crate::fiducials::{beat_features, locate_fiducials, BeatFeatures};
use crate::seed::{self, hash_str};
use crate::stats::{self, CorrelationResult, PermutationConfig, RowSummary};
use crate::synth::SynthSubject;
use crate::wfdb::SignalRecord;
use crate::{Error, Result};

/// The twelve conventional leads, in report order.
pub const CONVENTIONAL_LEADS: [&str; 12] = [
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6",
];

/// Length of one Holter validation slot.
pub const SLOT_SECONDS: f64 = 1800.0;

/// Runs independent jobs, returning results in job order.
pub trait Executor {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        jobs.into_iter().map(f).collect()
    }
}

/// Per-beat features of one lead of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatSeries {
    pub record: String,
    pub lead: String,
    /// R sample index of each beat in the source record.
    pub r_indices: Vec<usize>,
    pub beats: Vec<BeatFeatures>,
}

impl BeatSeries {
    pub fn len(&self) -> usize {
        self.beats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beats.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub r_indices: Vec<usize>,
    pub beats: Vec<BeatFeatures>,
    /// Detected peaks, including those that yielded no features.
    pub detected: usize,
    /// Peaks too close to either end, or whose fiducials failed.
    pub dropped: usize,
}

/// Detects beats in one channel and computes their nine features.
pub fn extract_beats(channel: &[f64], fs: f64, cfg: &DetectorConfig) -> Result<Extraction> {
    let peaks = detect_r_peaks(channel, fs, cfg)?;
    let seg = segment_beats(
        channel,
        fs,
        &peaks,
        DEFAULT_PRE_SPAN_MS,
        DEFAULT_POST_SPAN_MS,
    );
    let mut out = Extraction {
        r_indices: Vec::with_capacity(seg.beats.len()),
        beats: Vec::with_capacity(seg.beats.len()),
        detected: peaks.len(),
        dropped: seg.dropped,
    };
    for b in &seg.beats {
        match locate_fiducials(b, fs) {
            Ok(f) => {
                out.r_indices.push(b.r_index);
                out.beats.push(beat_features(&f));
            }
            Err(_) => out.dropped += 1,
        }
    }
    Ok(out)
}

/// Beat series for one lead of a record (lead names match case-insensitively).
pub fn beat_series(record: &SignalRecord, lead: &str, cfg: &DetectorConfig) -> Result<BeatSeries> {
    let channel = record.channel(lead).ok_or_else(|| {
        Error::InvalidRecord(format!(
            "{}: no lead named {lead}",
            record.header.record_name
        ))
    })?;
    let e = extract_beats(channel, record.sampling_rate(), cfg)?;
    Ok(BeatSeries {
        record: record.header.record_name.clone(),
        lead: lead.to_string(),
        r_indices: e.r_indices,
        beats: e.beats,
    })
}

/// Random access to one channel of a possibly very long recording.
pub trait ChannelSource {
    fn sampling_rate(&self) -> f64;
    fn len(&self) -> usize;
    /// Samples `start..end` in mV; `end` is clamped to `len()`.
    fn read(&self, start: usize, end: usize) -> Result<Vec<f64>>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct SliceSource<'a> {
    pub samples: &'a [f64],
    pub fs: f64,
}

impl ChannelSource for SliceSource<'_> {
    fn sampling_rate(&self) -> f64 {
        self.fs
    }

    fn len(&self) -> usize {
        self.samples.len()
    }

    fn read(&self, start: usize, end: usize) -> Result<Vec<f64>> {
        let end = end.min(self.samples.len());
        Ok(self.samples.get(start..end).unwrap_or(&[]).to_vec())
    }
}

impl ChannelSource for SynthSubject {
    fn sampling_rate(&self) -> f64 {
        SynthSubject::sampling_rate(self)
    }

    fn len(&self) -> usize {
        self.n_samples
    }

    fn read(&self, start: usize, end: usize) -> Result<Vec<f64>> {
        Ok(self.render(start, end))
    }
}

/// Beats whose R lies at or after sample `from`, detected on a short
/// excerpt starting one second earlier. The excerpt starts at 60 s and
/// doubles until `min_beats` beats are found, the recording ends, or one
/// slot length has been read.
pub fn excerpt_beats<S: ChannelSource + ?Sized>(
    source: &S,
    from: usize,
    min_beats: usize,
    cfg: &DetectorConfig,
) -> Result<(Vec<usize>, Vec<BeatFeatures>)> {
    let fs = source.sampling_rate();
    let len = source.len();
    let lead_in = fs.round() as usize;
    let start = from.saturating_sub(lead_in);
    let max_span = (SLOT_SECONDS * fs) as usize;
    let mut span = (60.0 * fs) as usize;
    loop {
        let end = (from + span).min(len);
        if end <= from {
            return Ok((Vec::new(), Vec::new()));
        }
        let x = source.read(start, end)?;
        let usable = x.len() as f64 >= 2.0 * fs;
        let mut r = Vec::new();
        let mut beats = Vec::new();
        if usable {
            let e = extract_beats(&x, fs, cfg)?;
            for (ri, b) in e.r_indices.into_iter().zip(e.beats) {
                if start + ri >= from {
                    r.push(start + ri);
                    beats.push(b);
                }
            }
        }
        if beats.len() >= min_beats || end == len || span >= max_span {
            return Ok((r, beats));
        }
        span *= 2;
    }
}

/// A long recording reduced to its first beats and the beats after each
/// half-hour boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolterSubject {
    pub subject: String,
    pub train: BeatSeries,
    pub slots: Vec<BeatSeries>,
}

pub fn extract_holter<S: ChannelSource + ?Sized>(
    subject: &str,
    record: &str,
    lead: &str,
    source: &S,
    fragment_len: usize,
    cfg: &DetectorConfig,
) -> Result<HolterSubject> {
    let fs = source.sampling_rate();
    let series = |(r_indices, beats): (Vec<usize>, Vec<BeatFeatures>)| BeatSeries {
        record: record.to_string(),
        lead: lead.to_string(),
        r_indices,
        beats,
    };
    let train = series(excerpt_beats(source, 0, fragment_len, cfg)?);
    let slot = (SLOT_SECONDS * fs).round() as usize;
    let mut slots = Vec::new();
    let mut boundary = slot;
    while boundary < source.len() {
        slots.push(series(excerpt_beats(source, boundary, fragment_len, cfg)?));
        boundary += slot;
    }
    Ok(HolterSubject {
        subject: subject.to_string(),
        train,
        slots,
    })
}

/// Hours at the start of Holter slot `index`.
pub fn slot_hours(index: usize) -> f64 {
    (index + 1) as f64 * SLOT_SECONDS / 3600.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordBeats {
    pub record: String,
    pub leads: Vec<BeatSeries>,
}

impl RecordBeats {
    pub fn lead(&self, name: &str) -> Option<&BeatSeries> {
        self.leads
            .iter()
            .find(|s| s.lead.eq_ignore_ascii_case(name))
    }
}

/// A subject's records in chronological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecords {
    pub subject: String,
    pub records: Vec<RecordBeats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrugSubject {
    pub subject: String,
    pub pre: Vec<BeatSeries>,
    pub post: Vec<BeatSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub fragment_len: usize,
    pub standardize: bool,
    /// Randomly placed validation fragments per subject.
    pub validation_fragments: usize,
    pub seed: u64,
    pub permutations: usize,
    /// Free-form dataset identifier copied into report metadata.
    pub dataset: String,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            fragment_len: DEFAULT_FRAGMENT_LEN,
            standardize: true,
            validation_fragments: 1,
            seed: 0,
            permutations: stats::DEFAULT_PERMUTATIONS,
            dataset: String::new(),
        }
    }
}

impl ProtocolConfig {
    fn validate(&self) -> Result<()> {
        if self.fragment_len == 0 || self.validation_fragments == 0 {
            return Err(Error::InvalidConfig(
                "fragment length and validation fragment count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Implemented(ClassifierSpec),
    /// A method of the original comparison without an implementation here.
    NotImplemented(String),
}

impl Method {
    pub fn label(&self) -> &str {
        match self {
            Method::Implemented(s) => s.kind.label(),
            Method::NotImplemented(l) => l,
        }
    }

    pub fn kind(&self) -> Option<ClassifierKind> {
        match self {
            Method::Implemented(s) => Some(s.kind),
            Method::NotImplemented(_) => None,
        }
    }

    /// The full comparison in table order, optionally with placeholder rows
    /// for the methods that are not implemented.
    pub fn table(params: &Params, include_missing: bool) -> Vec<Method> {
        let imp = |kind| Method::Implemented(ClassifierSpec::new(kind).with_params(params.clone()));
        let missing =
            |i: usize| Method::NotImplemented(classifiers::NOT_IMPLEMENTED[i].to_string());
        let mut out = Vec::new();
        for kind in [
            ClassifierKind::Mlp,
            ClassifierKind::BernoulliNb,
            ClassifierKind::DecisionTree,
            ClassifierKind::ExtraTrees,
            ClassifierKind::Knn,
            ClassifierKind::Lda,
        ] {
            out.push(imp(kind));
        }
        if include_missing {
            out.push(missing(0));
        }
        for kind in [
            ClassifierKind::LogisticRegression,
            ClassifierKind::NearestCentroid,
            ClassifierKind::RandomForest,
            ClassifierKind::RidgeClassifier,
        ] {
            out.push(imp(kind));
        }
        if include_missing {
            out.push(missing(1));
            out.push(missing(2));
        }
        out.push(imp(ClassifierKind::GaussianNb));
        if include_missing {
            out.push(missing(3));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    LeadSweep,
    HolterDrift,
    DrugEffect,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::LeadSweep => "lead_sweep",
            Scheme::HolterDrift => "holter_drift",
            Scheme::DrugEffect => "drug",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Accuracy(f64),
    NotImplemented,
    Skipped(String),
}

impl Cell {
    pub fn accuracy(&self) -> Option<f64> {
        match self {
            Cell::Accuracy(a) => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub kind: Option<ClassifierKind>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCorrelation {
    pub x: String,
    pub y: String,
    pub spearman: Option<CorrelationResult>,
    pub kendall: Option<CorrelationResult>,
    /// Why a coefficient is missing, if it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub dataset: String,
    pub fragment_len: usize,
    pub standardize: bool,
    pub validation_fragments: usize,
    pub subjects: Vec<String>,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scheme: Scheme,
    pub conditions: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub correlations: Vec<NamedCorrelation>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn summary_columns(&self) -> &'static [&'static str] {
        match self.scheme {
            Scheme::LeadSweep | Scheme::HolterDrift => &["MIN", "MAX-MIN"],
            Scheme::DrugEffect => &["A-B"],
        }
    }

    /// Values for [`summary_columns`](Self::summary_columns); `None` where
    /// no accuracy is available.
    pub fn summary(&self, row: &ReportRow) -> Vec<Option<f64>> {
        match self.scheme {
            Scheme::LeadSweep | Scheme::HolterDrift => {
                let acc: Vec<f64> = row.cells.iter().filter_map(Cell::accuracy).collect();
                match stats::summarize_row(&acc) {
                    Some(RowSummary { min, spread }) => alloc::vec![Some(min), Some(spread)],
                    None => alloc::vec![None, None],
                }
            }
            Scheme::DrugEffect => {
                let a = row.cells.first().and_then(Cell::accuracy);
                let b = row.cells.get(1).and_then(Cell::accuracy);
                alloc::vec![a.zip(b).map(|(a, b)| a - b)]
            }
        }
    }

    pub fn row(&self, kind: ClassifierKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.kind == Some(kind))
    }

    pub fn accuracy(&self, kind: ClassifierKind, condition: &str) -> Option<f64> {
        let c = self.conditions.iter().position(|x| x == condition)?;
        self.row(kind)?.cells.get(c)?.accuracy()
    }
}

/// A labelled fragment plus the beats it consumed.
struct Fragment {
    vector: FeatureVector,
    beats: Vec<(String, usize)>,
}

fn fragment(series: &BeatSeries, subject: &str, start: usize, len: usize) -> Result<Fragment> {
    let vector = labelled_fragment(
        &series.beats,
        start,
        len,
        subject,
        &series.record,
        &series.lead,
    )?;
    let beats = series.r_indices[start..start + len]
        .iter()
        .map(|&r| (series.record.clone(), r))
        .collect();
    Ok(Fragment { vector, beats })
}

/// Picks `count` fragment positions `(series index, start)` uniformly:
/// first a series among those with a valid start, then a start within it.
/// Starts overlapping `exclude` (series index, beat range) are never drawn.
fn draw_fragments(
    series: &[&BeatSeries],
    exclude: Option<(usize, Range<usize>)>,
    len: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let starts: Vec<Vec<usize>> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.len() < len {
                return Vec::new();
            }
            (0..=s.len() - len)
                .filter(|&st| match &exclude {
                    Some((ei, r)) if *ei == i => st + len <= r.start || st >= r.end,
                    _ => true,
                })
                .collect()
        })
        .collect();
    let eligible: Vec<usize> = (0..series.len())
        .filter(|&i| !starts[i].is_empty())
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let i = eligible[rng.random_range(0..eligible.len())];
            let s = starts[i][rng.random_range(0..starts[i].len())];
            (i, s)
        })
        .collect()
}

/// Train and validation fragments for one condition.
#[derive(Default)]
struct Fold {
    train: Vec<Fragment>,
    validation: Vec<Fragment>,
}

struct Prepared {
    train: Dataset,
    validation: Dataset,
}

impl Fold {
    fn subjects(&self) -> BTreeSet<&str> {
        self.train
            .iter()
            .map(|f| f.vector.subject.as_str())
            .collect()
    }

    fn check_leakage(&self) -> Result<()> {
        let used: BTreeSet<&(String, usize)> = self.train.iter().flat_map(|f| &f.beats).collect();
        for f in &self.validation {
            if let Some((rec, r)) = f.beats.iter().find(|b| used.contains(b)) {
                return Err(Error::Leakage(format!(
                    "beat at sample {r} of {rec} is in both training and validation"
                )));
            }
        }
        Ok(())
    }

    fn prepare(&self, standardize: bool) -> Result<Prepared> {
        self.check_leakage()?;
        let train = Dataset::new(self.train.iter().map(|f| f.vector.clone()).collect())?;
        let validation = Dataset::new(self.validation.iter().map(|f| f.vector.clone()).collect())?;
        if standardize {
            let s = fit_standardizer(&train)?;
            Ok(Prepared {
                train: apply_standardizer(&s, &train)?,
                validation: apply_standardizer(&s, &validation)?,
            })
        } else {
            Ok(Prepared { train, validation })
        }
    }
}

fn cell_seed(cfg: &ProtocolConfig, scheme: Scheme, spec: &ClassifierSpec, condition: &str) -> u64 {
    seed::derive(
        cfg.seed,
        &[
            spec.seed,
            hash_str(scheme.name()),
            hash_str(spec.kind.name()),
            hash_str(condition),
        ],
    )
}

/// Fits and scores every implemented method on every prepared condition.
fn run_grid<E: Executor>(
    scheme: Scheme,
    methods: &[Method],
    conditions: &[String],
    prepared: &[core::result::Result<Prepared, String>],
    cfg: &ProtocolConfig,
    exec: &E,
) -> Result<Vec<ReportRow>> {
    let mut jobs = Vec::new();
    for (mi, m) in methods.iter().enumerate() {
        if let Method::Implemented(spec) = m {
            for (ci, p) in prepared.iter().enumerate() {
                if let Ok(p) = p {
                    let spec =
                        spec.clone()
                            .with_seed(cell_seed(cfg, scheme, spec, &conditions[ci]));
                    jobs.push((mi, ci, spec, p));
                }
            }
        }
    }
    let results = exec.map(jobs, |(mi, ci, spec, p)| {
        let acc = classifiers::fit(&spec, &p.train).and_then(|m| m.accuracy(&p.validation));
        (mi, ci, acc)
    });

    let mut rows: Vec<ReportRow> = methods
        .iter()
        .map(|m| ReportRow {
            method: m.label().to_string(),
            kind: m.kind(),
            cells: prepared
                .iter()
                .map(|p| match (m, p) {
                    (Method::NotImplemented(_), _) => Cell::NotImplemented,
                    (_, Err(why)) => Cell::Skipped(why.clone()),
                    (_, Ok(_)) => Cell::Skipped("not evaluated".into()),
                })
                .collect(),
        })
        .collect();
    for (mi, ci, acc) in results {
        rows[mi].cells[ci] = match acc {
            Ok(a) => Cell::Accuracy(a),
            Err(e @ Error::DegenerateTrainingSet(_)) => Cell::Skipped(e.to_string()),
            Err(e) => return Err(e),
        };
    }
    Ok(rows)
}

fn prepare_fold(
    fold: &Fold,
    cfg: &ProtocolConfig,
) -> Result<core::result::Result<Prepared, String>> {
    let n = fold.subjects().len();
    if n < 2 {
        return Ok(Err(format!("{n} usable subject(s), need at least 2")));
    }
    if fold.validation.is_empty() {
        return Ok(Err("no validation fragments".into()));
    }
    fold.prepare(cfg.standardize).map(Ok)
}

fn correlate(
    rows: &[(f64, f64)],
    x: &str,
    y: &str,
    cfg: &ProtocolConfig,
    salt: u64,
) -> NamedCorrelation {
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let perm = PermutationConfig {
        permutations: cfg.permutations,
        seed: seed::derive(cfg.seed, &[hash_str("correlation"), salt]),
    };
    let s = stats::spearman_with(&xs, &ys, &perm);
    let k = stats::kendall_with(&xs, &ys, &perm);
    let note = s.as_ref().err().or(k.as_ref().err()).map(|e| e.to_string());
    NamedCorrelation {
        x: x.to_string(),
        y: y.to_string(),
        spearman: s.ok(),
        kendall: k.ok(),
        note,
    }
}

fn metadata(
    cfg: &ProtocolConfig,
    subjects: BTreeSet<String>,
    dropped: Vec<String>,
) -> ReportMetadata {
    ReportMetadata {
        seed: cfg.seed,
        dataset: cfg.dataset.clone(),
        fragment_len: cfg.fragment_len,
        standardize: cfg.standardize,
        validation_fragments: cfg.validation_fragments,
        subjects: subjects.into_iter().collect(),
        dropped,
    }
}

/// Per-lead identification: train on the first fragment of each subject's
/// first record, validate on randomly placed fragments from any of the
/// subject's records that do not overlap the training beats.
pub fn lead_sweep<E: Executor>(
    subjects: &[SubjectRecords],
    leads: &[&str],
    methods: &[Method],
    cfg: &ProtocolConfig,
    exec: &E,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let len = cfg.fragment_len;
    let mut dropped = Vec::new();
    let mut used = BTreeSet::new();
    let mut prepared = Vec::with_capacity(leads.len());
    for lead in leads {
        let mut fold = Fold::default();
        for s in subjects {
            let Some(first) = s.records.first().and_then(|r| r.lead(lead)) else {
                dropped.push(format!(
                    "{} ({lead}): first record lacks the lead",
                    s.subject
                ));
                continue;
            };
            if first.len() < len {
                dropped.push(format!(
                    "{} ({lead}): {} beats in first record, need {len}",
                    s.subject,
                    first.len()
                ));
                continue;
            }
            let series: Vec<&BeatSeries> = s.records.iter().filter_map(|r| r.lead(lead)).collect();
            let mut rng = seed::rng(
                cfg.seed,
                &[
                    hash_str("lead_sweep"),
                    hash_str(&lead.to_ascii_lowercase()),
                    hash_str(&s.subject),
                ],
            );
            let picks = draw_fragments(
                &series,
                Some((0, 0..len)),
                len,
                cfg.validation_fragments,
                &mut rng,
            );
            if picks.is_empty() {
                dropped.push(format!(
                    "{} ({lead}): no beats left for validation",
                    s.subject
                ));
                continue;
            }
            fold.train.push(fragment(first, &s.subject, 0, len)?);
            for (i, st) in picks {
                fold.validation
                    .push(fragment(series[i], &s.subject, st, len)?);
            }
            used.insert(s.subject.clone());
        }
        prepared.push(prepare_fold(&fold, cfg)?);
    }
    let conditions: Vec<String> = leads.iter().map(|l| l.to_string()).collect();
    let rows = run_grid(
        Scheme::LeadSweep,
        methods,
        &conditions,
        &prepared,
        cfg,
        exec,
    )?;
    let mut report = ExperimentReport {
        scheme: Scheme::LeadSweep,
        conditions,
        rows,
        correlations: Vec::new(),
        metadata: metadata(cfg, used, dropped),
    };
    let pairs: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.cells.iter().all(|c| c.accuracy().is_some()))
        .filter_map(|r| match report.summary(r).as_slice() {
            [Some(min), Some(spread)] => Some((*min, *spread)),
            _ => None,
        })
        .collect();
    report
        .correlations
        .push(correlate(&pairs, "MIN", "MAX-MIN", cfg, 0));
    Ok(report)
}

/// Accuracy over time: train on the first beats of each recording,
/// validate on the first beats after every half-hour boundary.
pub fn holter_drift<E: Executor>(
    subjects: &[HolterSubject],
    methods: &[Method],
    cfg: &ProtocolConfig,
    exec: &E,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let len = cfg.fragment_len;
    let mut dropped = Vec::new();
    let mut train = Vec::new();
    let mut kept: Vec<&HolterSubject> = Vec::new();
    for s in subjects {
        if s.train.len() < len {
            dropped.push(format!(
                "{}: {} beats at the start of {}, need {len}",
                s.subject,
                s.train.len(),
                s.train.record
            ));
            continue;
        }
        train.push(fragment(&s.train, &s.subject, 0, len)?);
        kept.push(s);
    }
    let n_slots = kept.iter().map(|s| s.slots.len()).max().unwrap_or(0);
    let mut conditions = Vec::with_capacity(n_slots);
    let mut prepared = Vec::with_capacity(n_slots);
    for k in 0..n_slots {
        let label = format!("{:.1}h", slot_hours(k));
        let mut fold = Fold {
            train: train
                .iter()
                .map(|f| Fragment {
                    vector: f.vector.clone(),
                    beats: f.beats.clone(),
                })
                .collect(),
            validation: Vec::new(),
        };
        for s in &kept {
            match s.slots.get(k) {
                Some(slot) if slot.len() >= len => {
                    fold.validation.push(fragment(slot, &s.subject, 0, len)?)
                }
                Some(slot) => dropped.push(format!(
                    "{} ({label}): {} beats in slot, need {len}",
                    s.subject,
                    slot.len()
                )),
                None => {}
            }
        }
        prepared.push(prepare_fold(&fold, cfg)?);
        conditions.push(label);
    }
    let rows = run_grid(
        Scheme::HolterDrift,
        methods,
        &conditions,
        &prepared,
        cfg,
        exec,
    )?;
    Ok(ExperimentReport {
        scheme: Scheme::HolterDrift,
        conditions,
        rows,
        correlations: Vec::new(),
        metadata: metadata(
            cfg,
            kept.iter().map(|s| s.subject.clone()).collect(),
            dropped,
        ),
    })
}

/// Condition keys of the drug protocol.
pub const DRUG_CONDITIONS: [&str; 3] = ["A", "B", "C"];

/// Three evaluations per method: (A) train pre-dose, validate on a held
/// out pre-dose fragment; (B) same training set, validate post-dose;
/// (C) training enriched with the first post-dose fragment, validated on
/// the same held-out post-dose fragments as B.
pub fn drug_protocol<E: Executor>(
    subjects: &[DrugSubject],
    methods: &[Method],
    cfg: &ProtocolConfig,
    exec: &E,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let len = cfg.fragment_len;
    let mut dropped = Vec::new();
    let mut used = BTreeSet::new();
    let (mut a, mut b, mut c) = (Fold::default(), Fold::default(), Fold::default());
    for s in subjects {
        if s.pre.is_empty() || s.post.is_empty() {
            let arm = if s.pre.is_empty() {
                "pre-dose"
            } else {
                "post-dose"
            };
            dropped.push(format!("{}: no {arm} records", s.subject));
            continue;
        }
        if s.pre[0].len() < len || s.post[0].len() < len {
            dropped.push(format!(
                "{}: first pre/post records hold {}/{} beats, need {len}",
                s.subject,
                s.pre[0].len(),
                s.post[0].len()
            ));
            continue;
        }
        let pre: Vec<&BeatSeries> = s.pre.iter().collect();
        let post: Vec<&BeatSeries> = s.post.iter().collect();
        let mut rng_pre = seed::rng(cfg.seed, &[hash_str("drug"), hash_str(&s.subject), 0]);
        let mut rng_post = seed::rng(cfg.seed, &[hash_str("drug"), hash_str(&s.subject), 1]);
        let val_pre = draw_fragments(
            &pre,
            Some((0, 0..len)),
            len,
            cfg.validation_fragments,
            &mut rng_pre,
        );
        let val_post = draw_fragments(
            &post,
            Some((0, 0..len)),
            len,
            cfg.validation_fragments,
            &mut rng_post,
        );
        if val_pre.is_empty() || val_post.is_empty() {
            dropped.push(format!(
                "{}: too few beats for held-out fragments",
                s.subject
            ));
            continue;
        }
        let train_pre = fragment(pre[0], &s.subject, 0, len)?;
        let enrich = fragment(post[0], &s.subject, 0, len)?;
        for (i, st) in &val_pre {
            a.validation.push(fragment(pre[*i], &s.subject, *st, len)?);
        }
        for (i, st) in &val_post {
            b.validation.push(fragment(post[*i], &s.subject, *st, len)?);
            c.validation.push(fragment(post[*i], &s.subject, *st, len)?);
        }
        a.train.push(fragment(pre[0], &s.subject, 0, len)?);
        b.train.push(fragment(pre[0], &s.subject, 0, len)?);
        c.train.push(train_pre);
        c.train.push(enrich);
        used.insert(s.subject.clone());
    }
    let prepared = [
        prepare_fold(&a, cfg)?,
        prepare_fold(&b, cfg)?,
        prepare_fold(&c, cfg)?,
    ];
    let conditions: Vec<String> = DRUG_CONDITIONS.iter().map(|s| s.to_string()).collect();
    let rows = run_grid(
        Scheme::DrugEffect,
        methods,
        &conditions,
        &prepared,
        cfg,
        exec,
    )?;
    let column = |i: usize, j: usize| -> Vec<(f64, f64)> {
        rows.iter()
            .filter_map(|r| Some((r.cells[i].accuracy()?, r.cells[j].accuracy()?)))
            .collect()
    };
    let correlations = alloc::vec![
        correlate(&column(0, 1), "A", "B", cfg, 1),
        correlate(&column(0, 2), "A", "C", cfg, 2),
    ];
    Ok(ExperimentReport {
        scheme: Scheme::DrugEffect,
        conditions,
        rows,
        correlations,
        metadata: metadata(cfg, used, dropped),
    })
}
