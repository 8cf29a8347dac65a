use ecgid_core::classifiers::{ClassifierKind, ClassifierSpec, Params};
use ecgid_core::detect::DetectorConfig;
use ecgid_core::experiments::{
    beat_series, drug_protocol, extract_holter, holter_drift, lead_sweep, BeatSeries, Cell,
    DrugSubject, Method, ProtocolConfig, RecordBeats, Sequential, SubjectRecords,
    CONVENTIONAL_LEADS, DRUG_CONDITIONS,
};
use ecgid_core::synth::{synth_session, SynthConfig, SynthSubject};

fn implemented() -> Vec<Method> {
    Method::table(&Params::default(), false)
}

fn lead_names() -> Vec<String> {
    CONVENTIONAL_LEADS.iter().map(|s| s.to_string()).collect()
}

fn series_for(cfg: &SynthConfig, seed: u64, session: u64) -> Vec<(String, BeatSeries)> {
    synth_session(cfg, seed, session)
        .unwrap()
        .into_iter()
        .map(|r| {
            let s = beat_series(&r.record, "II", &DetectorConfig::default()).unwrap();
            (r.subject, s)
        })
        .collect()
}

#[test]
fn synthetic_identification() {
    let cfg = SynthConfig {
        n_subjects: 10,
        duration_s: 120.0,
        ..SynthConfig::default()
    };
    let subjects: Vec<SubjectRecords> = series_for(&cfg, 11, 0)
        .into_iter()
        .map(|(subject, s)| SubjectRecords {
            subject,
            records: vec![RecordBeats {
                record: s.record.clone(),
                leads: vec![s],
            }],
        })
        .collect();
    let pc = ProtocolConfig {
        seed: 5,
        validation_fragments: 3,
        ..ProtocolConfig::default()
    };
    let report = lead_sweep(&subjects, &["II"], &implemented(), &pc, &Sequential).unwrap();
    for row in &report.rows {
        eprintln!("{:40} {:?}", row.method, row.cells);
    }
    for kind in [
        ClassifierKind::NearestCentroid,
        ClassifierKind::Knn,
        ClassifierKind::LogisticRegression,
    ] {
        let acc = report.accuracy(kind, "II").unwrap();
        assert!(acc >= 0.95, "{kind}: {acc}");
    }
}

#[test]
fn lead_sweep_grid_on_cloned_leads() {
    let cfg = SynthConfig {
        n_subjects: 10,
        duration_s: 60.0,
        leads: lead_names(),
        ..SynthConfig::default()
    };
    let det = DetectorConfig::default();
    let subjects: Vec<SubjectRecords> = synth_session(&cfg, 3, 0)
        .unwrap()
        .into_iter()
        .map(|r| SubjectRecords {
            subject: r.subject.clone(),
            records: vec![RecordBeats {
                record: r.record.header.record_name.clone(),
                leads: CONVENTIONAL_LEADS
                    .iter()
                    .map(|l| beat_series(&r.record, l, &det).unwrap())
                    .collect(),
            }],
        })
        .collect();
    let methods = vec![
        Method::Implemented(ClassifierSpec::new(ClassifierKind::NearestCentroid)),
        Method::Implemented(ClassifierSpec::new(ClassifierKind::Knn)),
        Method::NotImplemented("support vector machine".into()),
    ];
    let report = lead_sweep(
        &subjects,
        &CONVENTIONAL_LEADS,
        &methods,
        &ProtocolConfig::default(),
        &Sequential,
    )
    .unwrap();
    assert_eq!(report.conditions.len(), 12);
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.summary_columns(), ["MIN", "MAX-MIN"]);
    for row in &report.rows[..2] {
        assert_eq!(row.cells.len(), 12);
        for c in &row.cells {
            assert!(c.accuracy().unwrap() >= 0.95, "{}: {:?}", row.method, c);
        }
    }
    assert!(report.rows[2]
        .cells
        .iter()
        .all(|c| *c == Cell::NotImplemented));
}

fn drug_subjects(post: &SynthConfig, pre: &SynthConfig, seed: u64) -> Vec<DrugSubject> {
    let pre_a = series_for(pre, seed, 0);
    let post_a = series_for(post, seed, 1);
    let post_b = series_for(post, seed, 2);
    pre_a
        .into_iter()
        .zip(post_a.into_iter().zip(post_b))
        .map(|((subject, p), (q1, q2))| DrugSubject {
            subject,
            pre: vec![p],
            post: vec![q1.1, q2.1],
        })
        .collect()
}

#[test]
fn drug_effect_direction() {
    let pre = SynthConfig {
        n_subjects: 20,
        duration_s: 60.0,
        ..SynthConfig::default()
    };
    let post = SynthConfig {
        t_shift_ms: 60.0,
        t_scale: 0.5,
        ..pre.clone()
    };
    let subjects = drug_subjects(&post, &pre, 21);
    let pc = ProtocolConfig {
        seed: 1,
        validation_fragments: 3,
        ..ProtocolConfig::default()
    };
    let report = drug_protocol(&subjects, &implemented(), &pc, &Sequential).unwrap();
    let mut lower = 0;
    let mut gain = 0.0;
    for row in &report.rows {
        let [a, b, c] = [0, 1, 2].map(|i| row.cells[i].accuracy().unwrap());
        eprintln!("{:40} A={a:.2} B={b:.2} C={c:.2}", row.method);
        if b < a {
            lower += 1;
        }
        gain += c - b;
    }
    assert_eq!(report.conditions, DRUG_CONDITIONS);
    let nc = report.row(ClassifierKind::NearestCentroid).unwrap();
    assert!(nc.cells[1].accuracy() < nc.cells[0].accuracy());
    assert!(nc.cells[2].accuracy() >= nc.cells[1].accuracy());
    assert!(
        lower as f64 >= 0.75 * report.rows.len() as f64,
        "{lower} of {}",
        report.rows.len()
    );
    assert!(gain >= 0.0);
}

#[test]
fn drug_null_effect() {
    let pre = SynthConfig {
        n_subjects: 10,
        duration_s: 60.0,
        ..SynthConfig::default()
    };
    let subjects = drug_subjects(&pre, &pre, 22);
    let methods = vec![Method::Implemented(ClassifierSpec::new(
        ClassifierKind::NearestCentroid,
    ))];
    let report = drug_protocol(
        &subjects,
        &methods,
        &ProtocolConfig {
            seed: 2,
            validation_fragments: 5,
            ..ProtocolConfig::default()
        },
        &Sequential,
    )
    .unwrap();
    let red = report.summary(&report.rows[0])[0].unwrap();
    assert!(red.abs() <= 0.03, "A-B = {red}");
}

#[test]
fn drug_subject_missing_arm_is_dropped() {
    let pre = SynthConfig {
        n_subjects: 3,
        duration_s: 60.0,
        ..SynthConfig::default()
    };
    let mut subjects = drug_subjects(&pre, &pre, 23);
    subjects[1].post.clear();
    let methods = vec![Method::Implemented(ClassifierSpec::new(
        ClassifierKind::NearestCentroid,
    ))];
    let report =
        drug_protocol(&subjects, &methods, &ProtocolConfig::default(), &Sequential).unwrap();
    assert_eq!(report.metadata.subjects.len(), 2);
    assert!(report.metadata.dropped[0].contains("post-dose"));
}

fn holter(cfg: &SynthConfig, seed: u64) -> Vec<ecgid_core::experiments::HolterSubject> {
    (0..cfg.n_subjects)
        .map(|i| {
            let s = SynthSubject::new(cfg, seed, i, 0).unwrap();
            extract_holter(
                &s.name(),
                &format!("{}_holter", s.name()),
                "II",
                &s,
                20,
                &DetectorConfig::default(),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn holter_stationary_subjects_do_not_drift() {
    let cfg = SynthConfig {
        n_subjects: 8,
        duration_s: 3.0 * 3600.0,
        ..SynthConfig::default()
    };
    let subjects = holter(&cfg, 31);
    let methods = vec![
        Method::Implemented(ClassifierSpec::new(ClassifierKind::NearestCentroid)),
        Method::Implemented(ClassifierSpec::new(ClassifierKind::Knn)),
    ];
    let report =
        holter_drift(&subjects, &methods, &ProtocolConfig::default(), &Sequential).unwrap();
    assert_eq!(report.conditions, ["0.5h", "1.0h", "1.5h", "2.0h", "2.5h"]);
    for row in &report.rows {
        let spread = report.summary(row)[1].unwrap();
        assert!(spread <= 0.02, "{}: {:?}", row.method, row.cells);
    }
}

#[test]
fn holter_short_record_has_no_slots() {
    let cfg = SynthConfig {
        n_subjects: 2,
        duration_s: 1700.0,
        ..SynthConfig::default()
    };
    let subjects = holter(&cfg, 32);
    assert!(subjects.iter().all(|s| s.slots.is_empty()));
}

#[test]
fn holter_baseline_drift_degrades_accuracy() {
    let cfg = SynthConfig {
        n_subjects: 10,
        duration_s: 4.0 * 3600.0,
        drift_onset_s: 3600.0,
        drift_mv_per_hour: 0.3,
        ..SynthConfig::default()
    };
    let subjects = holter(&cfg, 33);
    let methods = vec![
        Method::Implemented(ClassifierSpec::new(ClassifierKind::NearestCentroid)),
        Method::Implemented(ClassifierSpec::new(ClassifierKind::Knn)),
    ];
    let report =
        holter_drift(&subjects, &methods, &ProtocolConfig::default(), &Sequential).unwrap();
    for row in &report.rows {
        let acc: Vec<f64> = row.cells.iter().map(|c| c.accuracy().unwrap()).collect();
        eprintln!("{}: {acc:?}", row.method);
        // perturbed region starts at the 1.0h slot
        assert!(
            acc[1..].windows(2).all(|w| w[1] <= w[0]),
            "{}: {acc:?}",
            row.method
        );
        assert!(acc.last() < acc.first());
    }
}
