//! Fragment vectors, labelled datasets and train-only standardisation.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::num::NonZeroUsize;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::fiducials::{BeatFeatures, FEATURES_PER_BEAT};
use crate::{Error, Result};

pub const DEFAULT_FRAGMENT_LEN: usize = 20;

/// Where a fragment came from: record, lead and index of its first beat.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FragmentSource {
    pub record: String,
    pub lead: String,
    pub start_beat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub subject: String,
    pub source: FragmentSource,
}

/// Concatenates the first `fragment_len` beats, beat-major.
pub fn build_fragment_vector(beats: &[BeatFeatures], fragment_len: usize) -> Result<Vec<f64>> {
    if fragment_len == 0 || beats.len() < fragment_len {
        return Err(Error::NotEnoughBeats {
            have: beats.len(),
            need: fragment_len.max(1),
        });
    }
    Ok(beats[..fragment_len]
        .iter()
        .flat_map(|b| b.0.iter().copied())
        .collect())
}

/// Fragments starting at beats 0, stride, 2*stride, ... that fit entirely.
pub fn fragment_stream(
    beats: &[BeatFeatures],
    fragment_len: usize,
    stride: NonZeroUsize,
) -> Vec<Vec<f64>> {
    if fragment_len == 0 || beats.len() < fragment_len {
        return Vec::new();
    }
    (0..=beats.len() - fragment_len)
        .step_by(stride.get())
        .map(|s| {
            beats[s..s + fragment_len]
                .iter()
                .flat_map(|b| b.0.iter().copied())
                .collect()
        })
        .collect()
}

pub fn fragment_dimension(fragment_len: usize) -> usize {
    fragment_len * FEATURES_PER_BEAT
}

/// Per-feature z-score parameters. A zero `scale` marks a constant feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn is_constant(&self, feature: usize) -> bool {
        self.scale[feature] == 0.0
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect())
    }
}

/// An ordered collection of equally sized, finite feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    vectors: Vec<FeatureVector>,
    scaler: Option<Standardizer>,
}

impl Dataset {
    pub fn new(vectors: Vec<FeatureVector>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            let dim = first.values.len();
            if let Some(v) = vectors.iter().find(|v| v.values.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.values.len(),
                });
            }
        }
        if vectors
            .iter()
            .flat_map(|v| &v.values)
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFiniteFeature);
        }
        Ok(Dataset {
            vectors,
            scaler: None,
        })
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<FeatureVector> {
        self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.vectors.first().map(|v| v.values.len())
    }

    pub fn subjects(&self) -> BTreeSet<&str> {
        self.vectors.iter().map(|v| v.subject.as_str()).collect()
    }

    /// The scaler that produced this dataset, if it was standardised.
    pub fn scaler(&self) -> Option<&Standardizer> {
        self.scaler.as_ref()
    }

    /// Appends `other`'s vectors. Both must be unscaled.
    pub fn merged(mut self, other: Dataset) -> Result<Self> {
        self.vectors.extend(other.vectors);
        Dataset::new(self.vectors)
    }
}

/// Fits z-score parameters on `train` (population standard deviation).
pub fn fit_standardizer(train: &Dataset) -> Result<Standardizer> {
    let dim = train.dimension().ok_or(Error::EmptyDataset)?;
    let n = train.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for v in train.vectors() {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = alloc::vec![0.0; dim];
    for v in train.vectors() {
        for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let scale = var
        .into_iter()
        .zip(&mean)
        .map(|(s, m)| {
            let sd = (s / n).sqrt();
            if sd <= 1e-12 * m.abs().max(1.0) {
                0.0
            } else {
                sd
            }
        })
        .collect();
    Ok(Standardizer { mean, scale })
}

pub fn apply_standardizer(scaler: &Standardizer, data: &Dataset) -> Result<Dataset> {
    let vectors = data
        .vectors()
        .iter()
        .map(|v| {
            Ok(FeatureVector {
                values: scaler.transform(&v.values)?,
                subject: v.subject.clone(),
                source: v.source.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Dataset::new(vectors)?;
    out.scaler = Some(scaler.clone());
    Ok(out)
}

/// Builds one labelled vector from beats `start..start + fragment_len`.
pub fn labelled_fragment(
    beats: &[BeatFeatures],
    start: usize,
    fragment_len: usize,
    subject: &str,
    record: &str,
    lead: &str,
) -> Result<FeatureVector> {
    let tail = beats.get(start..).unwrap_or(&[]);
    let values = build_fragment_vector(tail, fragment_len).map_err(|_| Error::NotEnoughBeats {
        have: beats.len(),
        need: start + fragment_len,
    })?;
    Ok(FeatureVector {
        values,
        subject: subject.into(),
        source: FragmentSource {
            record: record.into(),
            lead: lead.into(),
            start_beat: start,
        },
    })
}

impl core::fmt::Display for FragmentSource {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}@{}", self.record, self.lead, self.start_beat)
    }
}
