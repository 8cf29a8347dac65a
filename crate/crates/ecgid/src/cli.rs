//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use ecgid_core::classifiers::{fit, ClassifierKind, ClassifierSpec, Params};
use ecgid_core::detect::DetectorConfig;
use ecgid_core::experiments::{
    drug_protocol, extract_beats, holter_drift, lead_sweep, ExperimentReport, Method,
    ProtocolConfig, CONVENTIONAL_LEADS,
};
use ecgid_core::features::{
    apply_standardizer, fit_standardizer, fragment_stream, labelled_fragment, Dataset,
    FeatureVector,
};
use ecgid_core::synth::SynthConfig;
use ecgid_core::wfdb::{SignalRecord, StorageFormat};
use log::{info, warn};

use crate::database::{self, Database};
use crate::dataset::{read_dataset, write_dataset};
use crate::error::{Error, InFile, Result};
use crate::exec::Pool;
use crate::model::{save_model, ModelFile};
use crate::record::{self, load_header};
use crate::report::{self, read_report};
use crate::synth::{write_synth, SynthOptions};

#[derive(Debug, Parser)]
#[command(
    name = "ecgid",
    version,
    about = "ECG subject identification from beat morphology"
)]
struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Log more to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a record's sampling rate, length and channels.
    Inspect {
        record: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Detect R peaks and print them as CSV.
    Detect(DetectArgs),
    /// Turn records into a dataset of labelled fragment vectors.
    Featurize(FeaturizeArgs),
    /// Train on one dataset, report accuracy on another.
    Eval(EvalArgs),
    /// Run one of the robustness experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Generate a synthetic database with ground truth.
    Synth(SynthArgs),
    /// Print a saved report CSV as Markdown or CSV.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
struct CsvArgs {
    /// Sampling rate of records stored as CSV (values in mV).
    #[arg(long, value_name = "HZ", default_value_t = 500.0)]
    csv_fs: f64,
}

#[derive(Debug, Args)]
struct DetectArgs {
    record: PathBuf,
    /// Lead name; defaults to the first channel.
    #[arg(long)]
    lead: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    /// Record paths; each record's directory name is its subject.
    records: Vec<PathBuf>,
    /// Database root instead of explicit records.
    #[arg(long, env = "ECGID_DB", conflicts_with = "records")]
    db: Option<PathBuf>,
    /// Lead name; defaults to each record's first channel.
    #[arg(long)]
    lead: Option<String>,
    /// Subject label for explicit records.
    #[arg(long)]
    subject: Option<String>,
    #[arg(long, default_value_t = 20)]
    fragment_len: usize,
    /// Beats between fragment starts; defaults to the fragment length.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// Comma-separated method names, or "all".
    #[arg(long, default_value = "all")]
    methods: String,
    /// Hyperparameter override such as knn.k=3; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Z-score features with training-set statistics.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    standardize: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    validate: PathBuf,
    #[command(flatten)]
    methods: MethodArgs,
    /// Write accuracies here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save each fitted model as <DIR>/<method>.json.
    #[arg(long, value_name = "DIR")]
    save_models: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Database root with a RECORDS index.
    #[arg(long, env = "ECGID_DB")]
    db: PathBuf,
    #[command(flatten)]
    methods: MethodArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write a Markdown table when set to markdown.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 20)]
    fragment_len: usize,
    /// Randomly placed validation fragments per subject.
    #[arg(long, default_value_t = 1)]
    validation_fragments: usize,
    /// Permutations for the correlation p-values.
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// Identification accuracy per lead.
    LeadSweep {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Comma-separated leads.
        #[arg(
            long,
            alias = "lead",
            default_value = "I,II,III,aVR,aVL,aVF,V1,V2,V3,V4,V5,V6"
        )]
        leads: String,
    },
    /// Accuracy in each half hour of long recordings.
    HolterDrift {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Lead name; defaults to each record's first channel.
        #[arg(long)]
        lead: Option<String>,
    },
    /// Accuracy before and after drug administration.
    Drug {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long)]
        lead: Option<String>,
        /// Keep only post-dose records of this arm.
        #[arg(long)]
        arm: Option<String>,
        /// Manifest CSV (record, subject, phase, arm); defaults to <db>/manifest.csv.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Storage {
    #[value(name = "16")]
    F16,
    #[value(name = "212")]
    F212,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    subjects: usize,
    /// Seconds per recording.
    #[arg(long, default_value_t = 120.0)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500.0)]
    fs: f64,
    /// Mean heart rate in bpm.
    #[arg(long, default_value_t = 70.0)]
    heart_rate: f64,
    /// Spread of subject heart rates in bpm.
    #[arg(long, default_value_t = 5.0)]
    heart_rate_spread: f64,
    #[arg(long, default_value_t = 0.02)]
    rr_jitter: f64,
    /// White noise RMS in mV.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Comma-separated channel names, all carrying the same signal.
    #[arg(long, default_value = "II")]
    leads: String,
    /// Post-dose sessions per subject.
    #[arg(long, default_value_t = 0)]
    post_sessions: u64,
    /// T-wave shift in ms for post-dose sessions.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t_shift: f64,
    /// T-wave amplitude factor for post-dose sessions.
    #[arg(long, default_value_t = 1.0)]
    t_scale: f64,
    /// Baseline ramp in mV per hour.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    drift: f64,
    /// Seconds before the ramp starts.
    #[arg(long, default_value_t = 0.0)]
    drift_onset: f64,
    #[arg(long, value_enum, default_value_t = Storage::F16)]
    storage: Storage,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("ECGID_LOG")
        .format_timestamp(None)
        .try_init();
    let args: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 1 {
                eprintln!("see 'ecgid --help' for usage");
            }
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, argv: &[String]) -> Result<()> {
    let pool = Pool::new(cli.jobs);
    match cli.command {
        Command::Inspect { record, csv } => inspect(&record, csv.csv_fs),
        Command::Detect(a) => detect(&a),
        Command::Featurize(a) => featurize(&a, &pool),
        Command::Eval(a) => eval(&a),
        Command::Experiment(e) => experiment(e, &pool, argv),
        Command::Synth(a) => synth(&a, &pool),
        Command::Report { file, format } => {
            let table = read_report(&file)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Markdown => table.to_markdown(""),
            };
            print_stdout(&text)
        }
    }
}

fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "csv")
}

fn load_any(path: &Path, csv_fs: f64) -> Result<SignalRecord> {
    if is_csv(path) {
        record::load_csv(path, csv_fs)
    } else {
        record::load_record(path)
    }
}

fn inspect(path: &Path, csv_fs: f64) -> Result<()> {
    let header = if is_csv(path) {
        load_any(path, csv_fs)?.header
    } else {
        load_header(path)?
    };
    let mut s = format!("record {}\n", header.record_name);
    s += &format!("fs={} Hz\n", header.sampling_rate);
    s += &format!(
        "samples={} ({:.3} s)\n",
        header.n_samples,
        header.n_samples as f64 / header.sampling_rate
    );
    s += &format!("channels={}\n", header.n_signals);
    s += "index\tname\tformat\tgain\tbaseline\tunits\tfile\n";
    for (i, sig) in header.signals.iter().enumerate() {
        s += &format!(
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            sig.description,
            sig.storage_format.code(),
            sig.gain,
            sig.baseline,
            sig.units,
            sig.file_name
        );
    }
    print_stdout(&s)
}

fn lead_or_first<'a>(
    rec: &'a SignalRecord,
    lead: Option<&str>,
    path: &Path,
) -> Result<(String, &'a [f64])> {
    match lead {
        Some(l) => rec
            .channel(l)
            .map(|c| (l.to_string(), c))
            .ok_or_else(|| Error::bad_file(path, format!("no lead named {l}"))),
        None => rec
            .channels
            .first()
            .map(|c| (rec.channel_names[0].clone(), c.as_slice()))
            .ok_or_else(|| Error::bad_file(path, "record has no channels")),
    }
}

fn detect(a: &DetectArgs) -> Result<()> {
    let rec = load_any(&a.record, a.csv.csv_fs)?;
    let (lead, channel) = lead_or_first(&rec, a.lead.as_deref(), &a.record)?;
    let e = extract_beats(channel, rec.sampling_rate(), &DetectorConfig::default())
        .in_file(&a.record)?;
    info!(
        "{lead}: {} peaks, {} beats with features",
        e.detected,
        e.beats.len()
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::csv(Path::new("<output>"), e);
    w.write_record(["beat", "r_index", "time_s"])
        .map_err(csv_err)?;
    for (i, r) in e.r_indices.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.to_string(),
            (*r as f64 / rec.sampling_rate()).to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::csv(Path::new("<output>"), e))?;
    match &a.out {
        Some(p) => record::write_file(p, &bytes),
        None => print_stdout(&String::from_utf8_lossy(&bytes)),
    }
}

fn fragments(
    rec: &SignalRecord,
    subject: &str,
    lead: Option<&str>,
    len: usize,
    stride: NonZeroUsize,
    path: &Path,
) -> Result<Vec<FeatureVector>> {
    let (lead, channel) = lead_or_first(rec, lead, path)?;
    let e =
        extract_beats(channel, rec.sampling_rate(), &DetectorConfig::default()).in_file(path)?;
    if e.beats.len() < len {
        warn!(
            "{}: {} usable beats, need {len}; record skipped",
            path.display(),
            e.beats.len()
        );
        return Ok(Vec::new());
    }
    let n = fragment_stream(&e.beats, len, stride).len();
    (0..n)
        .map(|k| {
            labelled_fragment(
                &e.beats,
                k * stride.get(),
                len,
                subject,
                &rec.header.record_name,
                &lead,
            )
            .in_file(path)
        })
        .collect()
}

fn featurize(a: &FeaturizeArgs, pool: &Pool) -> Result<()> {
    use ecgid_core::experiments::Executor;
    if a.fragment_len == 0 {
        return Err(Error::Usage("--fragment-len must be at least 1".into()));
    }
    let stride = NonZeroUsize::new(a.stride.unwrap_or(a.fragment_len))
        .ok_or_else(|| Error::Usage("--stride must be at least 1".into()))?;
    let jobs: Vec<(PathBuf, String, String)> = match &a.db {
        Some(root) => {
            let mut db = Database::open(root, None)?;
            db.csv_rate = a.csv.csv_fs;
            db.records
                .iter()
                .map(|r| (db.path(r), r.clone(), db.subject_of(r)))
                .collect()
        }
        None if a.records.is_empty() => {
            return Err(Error::Usage("give record paths or --db".into()));
        }
        None => a
            .records
            .iter()
            .map(|p| {
                let base = record::record_base(p);
                let name = base
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let subject = a.subject.clone().unwrap_or_else(|| {
                    base.parent()
                        .and_then(Path::file_name)
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_else(|| name.clone())
                });
                (p.clone(), name, subject)
            })
            .collect(),
    };
    let out = pool.map(
        jobs,
        |(path, name, subject)| -> Result<Vec<FeatureVector>> {
            let mut rec = load_any(&path, a.csv.csv_fs)?;
            rec.header.record_name = name;
            fragments(
                &rec,
                &subject,
                a.lead.as_deref(),
                a.fragment_len,
                stride,
                &path,
            )
        },
    );
    let mut vectors = Vec::new();
    for v in out {
        vectors.extend(v?);
    }
    let data = Dataset::new(vectors)?;
    info!(
        "{} fragments from {} subjects",
        data.len(),
        data.subjects().len()
    );
    write_dataset(&a.out, &data)
}

fn parse_params(raw: &[String]) -> Result<Params> {
    let mut p = Params::default();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--param '{kv}' is not KEY=VALUE")))?;
        p.set(k.trim(), v.trim())?;
    }
    Ok(p)
}

/// Methods in the order given, or the full table (with placeholder rows
/// for unimplemented methods when `placeholders` is set) for "all".
fn parse_methods(a: &MethodArgs, placeholders: bool) -> Result<Vec<Method>> {
    let params = parse_params(&a.params)?;
    let mut out: Vec<Method> = Vec::new();
    if a.methods.trim().eq_ignore_ascii_case("all") {
        out = Method::table(&params, placeholders);
    }
    let names = if out.is_empty() {
        a.methods.as_str()
    } else {
        ""
    };
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: ClassifierKind = name
            .parse()
            .map_err(|e: ecgid_core::Error| Error::Usage(e.to_string()))?;
        if out.iter().any(|m| m.kind() == Some(kind)) {
            continue;
        }
        out.push(Method::Implemented(
            ClassifierSpec::new(kind).with_params(params.clone()),
        ));
    }
    if out.is_empty() {
        return Err(Error::Usage("--methods lists no method".into()));
    }
    for m in &out {
        if let Method::Implemented(s) = m {
            s.params.validate(s.kind)?;
        }
    }
    Ok(out)
}

fn eval(a: &EvalArgs) -> Result<()> {
    let methods = parse_methods(&a.methods, false)?;
    let mut train = read_dataset(&a.train)?;
    let mut validate = read_dataset(&a.validate)?;
    let scaler = if a.methods.standardize {
        let s = fit_standardizer(&train).in_file(&a.train)?;
        train = apply_standardizer(&s, &train).in_file(&a.train)?;
        validate = apply_standardizer(&s, &validate).in_file(&a.validate)?;
        Some(s)
    } else {
        None
    };
    if let Some(dir) = &a.save_models {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::csv(Path::new("<output>"), e);
    w.write_record(["method", "accuracy"]).map_err(csv_err)?;
    for m in &methods {
        let Method::Implemented(spec) = m else {
            continue;
        };
        let spec = spec.clone().with_seed(a.methods.seed);
        let model = fit(&spec, &train).in_file(&a.train)?;
        let acc = model.accuracy(&validate).in_file(&a.validate)?;
        w.write_record([spec.kind.name().to_string(), acc.to_string()])
            .map_err(csv_err)?;
        if let Some(dir) = &a.save_models {
            save_model(
                &dir.join(format!("{}.json", spec.kind.name())),
                &ModelFile::new(model, scaler.clone()),
            )?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::csv(Path::new("<output>"), e))?;
    match &a.out {
        Some(p) => record::write_file(p, &bytes),
        None => print_stdout(&String::from_utf8_lossy(&bytes)),
    }
}

fn protocol_config(c: &ExperimentArgs) -> ProtocolConfig {
    let dataset =
        c.db.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| c.db.display().to_string());
    ProtocolConfig {
        fragment_len: c.fragment_len,
        standardize: c.methods.standardize,
        validation_fragments: c.validation_fragments,
        seed: c.methods.seed,
        permutations: c.permutations,
        dataset,
    }
}

fn open_db(c: &ExperimentArgs, manifest: Option<&Path>) -> Result<Database> {
    let mut db = Database::open(&c.db, manifest)?;
    db.csv_rate = c.csv.csv_fs;
    Ok(db)
}

fn experiment(e: Experiment, pool: &Pool, argv: &[String]) -> Result<()> {
    let det = DetectorConfig::default();
    let (report, common): (ExperimentReport, ExperimentArgs) = match e {
        Experiment::LeadSweep { common, leads } => {
            let leads: Vec<&str> = leads
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            if leads.is_empty() {
                return Err(Error::Usage("--leads lists no lead".into()));
            }
            if let Some(l) = leads
                .iter()
                .find(|l| !CONVENTIONAL_LEADS.iter().any(|c| c.eq_ignore_ascii_case(l)))
            {
                info!("{l} is not one of the twelve conventional leads");
            }
            let methods = parse_methods(&common.methods, true)?;
            let db = open_db(&common, None)?;
            let subjects = database::lead_sweep_input(&db, &leads, &det, pool)?;
            let r = lead_sweep(&subjects, &leads, &methods, &protocol_config(&common), pool)?;
            (r, common)
        }
        Experiment::HolterDrift { common, lead } => {
            let methods = parse_methods(&common.methods, true)?;
            let db = open_db(&common, None)?;
            let subjects =
                database::holter_input(&db, lead.as_deref(), common.fragment_len, &det, pool)?;
            let r = holter_drift(&subjects, &methods, &protocol_config(&common), pool)?;
            (r, common)
        }
        Experiment::Drug {
            common,
            lead,
            arm,
            manifest,
        } => {
            let methods = parse_methods(&common.methods, true)?;
            let db = open_db(&common, manifest.as_deref())?;
            let subjects = database::drug_input(&db, lead.as_deref(), arm.as_deref(), &det, pool)?;
            let r = drug_protocol(&subjects, &methods, &protocol_config(&common), pool)?;
            (r, common)
        }
    };
    for d in &report.metadata.dropped {
        warn!("dropped {d}");
    }
    let written = report::write_all(
        &common.out,
        &report,
        common.format == Format::Markdown,
        argv,
    )?;
    for p in written {
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn synth(a: &SynthArgs, pool: &Pool) -> Result<()> {
    let leads: Vec<String> = a
        .leads
        .split(',')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    let config = SynthConfig {
        n_subjects: a.subjects,
        duration_s: a.duration,
        fs: a.fs,
        heart_rate_bpm: a.heart_rate,
        heart_rate_spread_bpm: a.heart_rate_spread,
        rr_jitter: a.rr_jitter,
        noise_rms: a.noise,
        t_shift_ms: a.t_shift,
        t_scale: a.t_scale,
        drift_mv_per_hour: a.drift,
        drift_onset_s: a.drift_onset,
        leads,
        ..SynthConfig::default()
    };
    let opts = SynthOptions {
        config,
        post_sessions: a.post_sessions,
        format: match a.storage {
            Storage::F16 => StorageFormat::Fmt16,
            Storage::F212 => StorageFormat::Fmt212,
        },
    };
    let names = write_synth(&a.out, &opts, a.seed, pool)?;
    info!("wrote {} records to {}", names.len(), a.out.display());
    Ok(())
}
