//! Feature datasets as CSV: `f000..fNNN, subject, record, lead, start_beat`.

use std::path::Path;

use ecgid_core::features::{Dataset, FeatureVector, FragmentSource};

use crate::error::{Error, InFile, Result};

const META: [&str; 4] = ["subject", "record", "lead", "start_beat"];

pub fn feature_column(i: usize) -> String {
    format!("f{i:03}")
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let d = data.dimension().unwrap_or(0);
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = (0..d)
        .map(feature_column)
        .chain(META.iter().map(|s| s.to_string()))
        .collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for v in data.vectors() {
        let row = v.values.iter().map(f64::to_string).chain([
            v.subject.clone(),
            v.source.record.clone(),
            v.source.lead.clone(),
            v.source.start_beat.to_string(),
        ]);
        w.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    let n = header.len();
    if n < META.len() || header.iter().skip(n - META.len()).ne(META) {
        return Err(Error::csv(
            path,
            format!("the last columns must be {}", META.join(",")),
        ));
    }
    let d = n - META.len();
    if let Some((i, h)) = header
        .iter()
        .take(d)
        .enumerate()
        .find(|(i, h)| *h != feature_column(*i))
    {
        return Err(Error::csv(
            path,
            format!("column {} is '{h}', expected {}", i + 1, feature_column(i)),
        ));
    }
    let mut vectors = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = row + 2;
        let values = rec
            .iter()
            .take(d)
            .map(|c| {
                c.parse::<f64>()
                    .map_err(|_| Error::csv(path, format!("line {line}: '{c}' is not numeric")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let start_beat = rec[n - 1].parse().map_err(|_| {
            Error::csv(
                path,
                format!("line {line}: bad start_beat '{}'", &rec[n - 1]),
            )
        })?;
        vectors.push(FeatureVector {
            values,
            subject: rec[d].to_string(),
            source: FragmentSource {
                record: rec[d + 1].to_string(),
                lead: rec[d + 2].to_string(),
                start_beat,
            },
        });
    }
    Dataset::new(vectors).in_file(path)
}
