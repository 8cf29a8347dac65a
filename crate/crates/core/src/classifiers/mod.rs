//! Classical classifiers behind one fit / predict contract.
//!
//! Every classifier maps a feature vector to per-class scores; the
//! prediction is the highest-scoring class, ties going to the class that
//! sorts first. Fitting is single-threaded and fully determined by the
//! [`ClassifierSpec`] (including its seed) and the training data.

mod bayes;
mod centroid;
mod knn;
mod lda;
pub mod logistic;
pub mod mlp;
mod ridge;
pub mod tree;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::features::Dataset;
use crate::seed::Fnv64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    Mlp,
    BernoulliNb,
    DecisionTree,
    ExtraTrees,
    Knn,
    Lda,
    LogisticRegression,
    NearestCentroid,
    RandomForest,
    RidgeClassifier,
    GaussianNb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 11] = [
        ClassifierKind::Mlp,
        ClassifierKind::BernoulliNb,
        ClassifierKind::DecisionTree,
        ClassifierKind::ExtraTrees,
        ClassifierKind::Knn,
        ClassifierKind::Lda,
        ClassifierKind::LogisticRegression,
        ClassifierKind::NearestCentroid,
        ClassifierKind::RandomForest,
        ClassifierKind::RidgeClassifier,
        ClassifierKind::GaussianNb,
    ];

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::BernoulliNb => "bernoulli-nb",
            ClassifierKind::DecisionTree => "tree",
            ClassifierKind::ExtraTrees => "extra-trees",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Lda => "lda",
            ClassifierKind::LogisticRegression => "logreg",
            ClassifierKind::NearestCentroid => "centroid",
            ClassifierKind::RandomForest => "forest",
            ClassifierKind::RidgeClassifier => "ridge",
            ClassifierKind::GaussianNb => "gaussian-nb",
        }
    }

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "multi-layer perceptron",
            ClassifierKind::BernoulliNb => "naive Bayes classifier (Bernoulli)",
            ClassifierKind::DecisionTree => "decision tree classifier",
            ClassifierKind::ExtraTrees => "extra-trees classifier",
            ClassifierKind::Knn => "k-nearest neighbour votes",
            ClassifierKind::Lda => "linear discriminant analysis",
            ClassifierKind::LogisticRegression => "logistic regression classifier",
            ClassifierKind::NearestCentroid => "nearest centroid classifier",
            ClassifierKind::RandomForest => "random forest classifier",
            ClassifierKind::RidgeClassifier => "ridge regression classifier",
            ClassifierKind::GaussianNb => "naive Bayes classifier (Gaussian)",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = ClassifierKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidHyperparameter(format!(
                    "unknown method '{s}', expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Methods from the original comparison that this crate does not provide.
/// Reports carry them as explicit "not implemented" rows.
pub const NOT_IMPLEMENTED: [&str; 4] = [
    "linear support vector classifier",
    "Gaussian mixture model",
    "support vector machine",
    "ridge classifier with built-in cross-validation",
];

/// Tunables for every kind; each kind reads only its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub knn_k: usize,
    pub gnb_var_smoothing: f64,
    pub bnb_alpha: f64,
    /// `None` means `1 / n_train`.
    pub logreg_l2: Option<f64>,
    pub logreg_tol: f64,
    pub logreg_max_iter: usize,
    pub lda_shrinkage: f64,
    pub ridge_alpha: f64,
    pub tree_min_samples_split: usize,
    pub forest_trees: usize,
    /// `None` means `floor(sqrt(d))`.
    pub forest_max_features: Option<usize>,
    pub mlp_hidden: usize,
    pub mlp_learning_rate: f64,
    pub mlp_epochs: usize,
    pub mlp_batch_size: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            knn_k: 5,
            gnb_var_smoothing: 1e-9,
            bnb_alpha: 1.0,
            logreg_l2: None,
            logreg_tol: 1e-6,
            logreg_max_iter: 5000,
            lda_shrinkage: 0.1,
            ridge_alpha: 1.0,
            tree_min_samples_split: 2,
            forest_trees: 100,
            forest_max_features: None,
            mlp_hidden: 100,
            mlp_learning_rate: 1e-3,
            mlp_epochs: 200,
            mlp_batch_size: 200,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidHyperparameter(format!("{key}: cannot parse '{value}'")))
}

impl Params {
    pub const KEYS: [&'static str; 15] = [
        "knn.k",
        "gnb.var_smoothing",
        "bnb.alpha",
        "logreg.l2",
        "logreg.tol",
        "logreg.max_iter",
        "lda.shrinkage",
        "ridge.alpha",
        "tree.min_samples_split",
        "forest.trees",
        "forest.max_features",
        "mlp.hidden",
        "mlp.learning_rate",
        "mlp.epochs",
        "mlp.batch_size",
    ];

    /// Sets one parameter from a `group.name` key, as given on the CLI.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "knn.k" => self.knn_k = parse_value(key, value)?,
            "gnb.var_smoothing" => self.gnb_var_smoothing = parse_value(key, value)?,
            "bnb.alpha" => self.bnb_alpha = parse_value(key, value)?,
            "logreg.l2" => self.logreg_l2 = Some(parse_value(key, value)?),
            "logreg.tol" => self.logreg_tol = parse_value(key, value)?,
            "logreg.max_iter" => self.logreg_max_iter = parse_value(key, value)?,
            "lda.shrinkage" => self.lda_shrinkage = parse_value(key, value)?,
            "ridge.alpha" => self.ridge_alpha = parse_value(key, value)?,
            "tree.min_samples_split" => self.tree_min_samples_split = parse_value(key, value)?,
            "forest.trees" => self.forest_trees = parse_value(key, value)?,
            "forest.max_features" => self.forest_max_features = Some(parse_value(key, value)?),
            "mlp.hidden" => self.mlp_hidden = parse_value(key, value)?,
            "mlp.learning_rate" => self.mlp_learning_rate = parse_value(key, value)?,
            "mlp.epochs" => self.mlp_epochs = parse_value(key, value)?,
            "mlp.batch_size" => self.mlp_batch_size = parse_value(key, value)?,
            _ => {
                return Err(Error::InvalidHyperparameter(format!(
                    "unknown parameter '{key}', expected one of: {}",
                    Params::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self, kind: ClassifierKind) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidHyperparameter(msg.to_string()));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match kind {
            ClassifierKind::Knn if self.knn_k == 0 => bad("knn.k must be at least 1"),
            ClassifierKind::GaussianNb if !positive(self.gnb_var_smoothing) => {
                bad("gnb.var_smoothing must be positive")
            }
            ClassifierKind::BernoulliNb if !positive(self.bnb_alpha) => {
                bad("bnb.alpha must be positive")
            }
            ClassifierKind::LogisticRegression
                if self.logreg_l2.is_some_and(|l| !(l >= 0.0 && l.is_finite()))
                    || !positive(self.logreg_tol)
                    || self.logreg_max_iter == 0 =>
            {
                bad("logreg needs l2 >= 0, tol > 0 and max_iter >= 1")
            }
            ClassifierKind::Lda if !(0.0..=1.0).contains(&self.lda_shrinkage) => {
                bad("lda.shrinkage must lie in [0, 1]")
            }
            ClassifierKind::RidgeClassifier if !positive(self.ridge_alpha) => {
                bad("ridge.alpha must be positive")
            }
            ClassifierKind::DecisionTree
            | ClassifierKind::RandomForest
            | ClassifierKind::ExtraTrees
                if self.tree_min_samples_split < 2 =>
            {
                bad("tree.min_samples_split must be at least 2")
            }
            ClassifierKind::RandomForest | ClassifierKind::ExtraTrees
                if self.forest_trees == 0 || self.forest_max_features == Some(0) =>
            {
                bad("forest.trees and forest.max_features must be at least 1")
            }
            ClassifierKind::Mlp
                if self.mlp_hidden == 0
                    || !positive(self.mlp_learning_rate)
                    || self.mlp_epochs == 0
                    || self.mlp_batch_size == 0 =>
            {
                bad("mlp needs hidden, epochs, batch_size >= 1 and learning_rate > 0")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub params: Params,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            params: Params::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }
}

/// Dense training matrix with class indices into the sorted label list.
pub(crate) struct TrainingData {
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub n: usize,
    pub d: usize,
    pub n_classes: usize,
}

impl TrainingData {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = alloc::vec![0; self.n_classes];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }

    /// Per-class mean vectors, row-major `n_classes x d`.
    pub fn class_means(&self) -> Vec<f64> {
        let counts = self.class_counts();
        let mut m = alloc::vec![0.0; self.n_classes * self.d];
        for i in 0..self.n {
            let c = self.y[i];
            for (acc, v) in m[c * self.d..(c + 1) * self.d].iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        for (c, &cnt) in counts.iter().enumerate() {
            m[c * self.d..(c + 1) * self.d]
                .iter_mut()
                .for_each(|v| *v /= cnt as f64);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelState {
    Knn(knn::Knn),
    NearestCentroid(centroid::NearestCentroid),
    GaussianNb(bayes::GaussianNb),
    BernoulliNb(bayes::BernoulliNb),
    LogisticRegression(logistic::Logistic),
    Lda(lda::Lda),
    Ridge(ridge::Ridge),
    DecisionTree(tree::Tree),
    Forest(tree::Forest),
    Mlp(mlp::Mlp),
}

impl ModelState {
    fn scores(&self, x: &[f64], n_classes: usize) -> Vec<f64> {
        match self {
            ModelState::Knn(m) => m.scores(x, n_classes),
            ModelState::NearestCentroid(m) => m.scores(x),
            ModelState::GaussianNb(m) => m.scores(x),
            ModelState::BernoulliNb(m) => m.scores(x),
            ModelState::LogisticRegression(m) => m.logits(x),
            ModelState::Lda(m) => m.scores(x),
            ModelState::Ridge(m) => m.scores(x),
            ModelState::DecisionTree(t) => t.leaf(x).to_vec(),
            ModelState::Forest(f) => f.votes(x, n_classes),
            ModelState::Mlp(m) => m.logits(x),
        }
    }
}

/// A fitted classifier. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub classes: Vec<String>,
    pub dimension: usize,
    pub train_fingerprint: u64,
    pub state: ModelState,
}

fn fingerprint(spec: &ClassifierSpec, train: &Dataset) -> u64 {
    let mut h = Fnv64::default();
    h.write(spec.kind.name().as_bytes());
    h.write(&spec.seed.to_le_bytes());
    for v in train.vectors() {
        h.write(v.subject.as_bytes());
        h.write(&[0]);
        for x in &v.values {
            h.write_f64(*x);
        }
    }
    h.finish()
}

pub fn fit(spec: &ClassifierSpec, train: &Dataset) -> Result<TrainedModel> {
    spec.params.validate(spec.kind)?;
    let d = train
        .dimension()
        .ok_or_else(|| Error::DegenerateTrainingSet("no training vectors".into()))?;
    if d == 0 {
        return Err(Error::DegenerateTrainingSet(
            "zero-dimensional features".into(),
        ));
    }
    let classes: Vec<String> = train.subjects().into_iter().map(String::from).collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateTrainingSet(format!(
            "need at least two classes, found {}",
            classes.len()
        )));
    }
    let index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut x = Vec::with_capacity(train.len() * d);
    let mut y = Vec::with_capacity(train.len());
    for v in train.vectors() {
        if v.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
        x.extend_from_slice(&v.values);
        y.push(index[v.subject.as_str()]);
    }
    let data = TrainingData {
        x,
        y,
        n: train.len(),
        d,
        n_classes: classes.len(),
    };
    let p = &spec.params;
    let state = match spec.kind {
        ClassifierKind::Knn => ModelState::Knn(knn::Knn::fit(&data, p.knn_k)),
        ClassifierKind::NearestCentroid => {
            ModelState::NearestCentroid(centroid::NearestCentroid::fit(&data))
        }
        ClassifierKind::GaussianNb => {
            ModelState::GaussianNb(bayes::GaussianNb::fit(&data, p.gnb_var_smoothing))
        }
        ClassifierKind::BernoulliNb => {
            ModelState::BernoulliNb(bayes::BernoulliNb::fit(&data, p.bnb_alpha))
        }
        ClassifierKind::LogisticRegression => {
            ModelState::LogisticRegression(logistic::Logistic::fit(
                &data,
                p.logreg_l2.unwrap_or(1.0 / data.n as f64),
                p.logreg_tol,
                p.logreg_max_iter,
            ))
        }
        ClassifierKind::Lda => ModelState::Lda(lda::Lda::fit(&data, p.lda_shrinkage)?),
        ClassifierKind::RidgeClassifier => {
            ModelState::Ridge(ridge::Ridge::fit(&data, p.ridge_alpha)?)
        }
        ClassifierKind::DecisionTree => {
            ModelState::DecisionTree(tree::Tree::fit(&data, p.tree_min_samples_split, spec.seed))
        }
        ClassifierKind::RandomForest | ClassifierKind::ExtraTrees => {
            ModelState::Forest(tree::Forest::fit(
                &data,
                spec.kind == ClassifierKind::ExtraTrees,
                p.forest_trees,
                p.forest_max_features,
                p.tree_min_samples_split,
                spec.seed,
            ))
        }
        ClassifierKind::Mlp => ModelState::Mlp(mlp::Mlp::fit(
            &data,
            &mlp::MlpConfig {
                hidden: p.mlp_hidden,
                learning_rate: p.mlp_learning_rate,
                epochs: p.mlp_epochs,
                batch_size: p.mlp_batch_size,
            },
            spec.seed,
        )),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        classes,
        dimension: d,
        train_fingerprint: fingerprint(spec, train),
        state,
    })
}

/// Index of the first maximum; NaN scores never win.
pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] || scores[best].is_nan() {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl TrainedModel {
    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn decision_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.state.scores(x, self.classes.len()))
    }

    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.decision_scores(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict_index(x)?])
    }

    /// Class probabilities for the softmax models, `None` for the rest.
    pub fn probabilities(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_dim(x)?;
        Ok(match &self.state {
            ModelState::LogisticRegression(m) => Some(softmax(&m.logits(x))),
            ModelState::Mlp(m) => Some(softmax(&m.logits(x))),
            _ => None,
        })
    }

    /// Fraction of `data` predicted correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0usize;
        for v in data.vectors() {
            if self.predict(&v.values)? == v.subject {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureVector, FragmentSource};
    use alloc::vec;
    use alloc::vec::Vec;

    pub(crate) fn dataset(rows: &[(&[f64], &str)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .enumerate()
                .map(|(i, (x, s))| FeatureVector {
                    values: x.to_vec(),
                    subject: s.to_string(),
                    source: FragmentSource {
                        record: format!("r{i}"),
                        lead: "II".into(),
                        start_beat: 0,
                    },
                })
                .collect(),
        )
        .unwrap()
    }

    fn xor() -> Dataset {
        dataset(&[
            (&[0.0, 0.0], "A"),
            (&[1.0, 1.0], "A"),
            (&[0.0, 1.0], "B"),
            (&[1.0, 0.0], "B"),
        ])
    }

    #[test]
    fn centroid_midpoint() {
        let d = dataset(&[(&[-1.0], "A"), (&[1.0], "B")]);
        let m = fit(&ClassifierSpec::new(ClassifierKind::NearestCentroid), &d).unwrap();
        assert_eq!(m.predict(&[0.3]).unwrap(), "B");
        assert_eq!(m.predict(&[-0.3]).unwrap(), "A");
        // exact tie goes to the first class
        assert_eq!(m.predict(&[0.0]).unwrap(), "A");
    }

    #[test]
    fn knn_recovers_training_labels() {
        let d = dataset(&[
            (&[0.0, 0.0], "a"),
            (&[5.0, 1.0], "b"),
            (&[1.0, 4.0], "c"),
            (&[3.0, 3.0], "a"),
        ]);
        let spec = ClassifierSpec {
            params: Params {
                knn_k: 1,
                ..Params::default()
            },
            ..ClassifierSpec::new(ClassifierKind::Knn)
        };
        let m = fit(&spec, &d).unwrap();
        assert_eq!(m.accuracy(&d).unwrap(), 1.0);
    }

    #[test]
    fn tree_separates_xor() {
        let d = xor();
        let m = fit(&ClassifierSpec::new(ClassifierKind::DecisionTree), &d).unwrap();
        assert_eq!(m.accuracy(&d).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_counts() {
        let train = dataset(&[(&[-1.0], "A"), (&[1.0], "B")]);
        let m = fit(
            &ClassifierSpec::new(ClassifierKind::NearestCentroid),
            &train,
        )
        .unwrap();
        let wrong = dataset(&[(&[-1.0], "B"), (&[1.0], "A")]);
        assert_eq!(m.accuracy(&wrong).unwrap(), 0.0);
        let half = dataset(&[(&[-1.0], "A"), (&[1.0], "B"), (&[-2.0], "B"), (&[2.0], "A")]);
        assert_eq!(m.accuracy(&half).unwrap(), 0.5);
        assert_eq!(
            m.accuracy(&Dataset::new(vec![]).unwrap()),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn fit_errors() {
        let one = dataset(&[(&[1.0], "A"), (&[2.0], "A")]);
        for kind in ClassifierKind::ALL {
            assert!(matches!(
                fit(&ClassifierSpec::new(kind), &one),
                Err(Error::DegenerateTrainingSet(_))
            ));
        }
        assert!(matches!(
            fit(
                &ClassifierSpec::new(ClassifierKind::Knn),
                &Dataset::new(vec![]).unwrap()
            ),
            Err(Error::DegenerateTrainingSet(_))
        ));
        let d = dataset(&[(&[-1.0], "A"), (&[1.0], "B")]);
        let m = fit(&ClassifierSpec::new(ClassifierKind::Knn), &d).unwrap();
        assert!(matches!(
            m.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_hyperparameters() {
        let d = dataset(&[(&[-1.0], "A"), (&[1.0], "B")]);
        let mut p = Params::default();
        p.knn_k = 0;
        let spec = ClassifierSpec::new(ClassifierKind::Knn).with_params(p);
        assert!(matches!(
            fit(&spec, &d),
            Err(Error::InvalidHyperparameter(_))
        ));
        let mut p = Params::default();
        assert!(p.set("forest.trees", "0").is_ok());
        assert!(ClassifierSpec::new(ClassifierKind::RandomForest)
            .with_params(p.clone())
            .params
            .validate(ClassifierKind::RandomForest)
            .is_err());
        assert!(p.set("nope", "1").is_err());
        assert!(p.set("knn.k", "x").is_err());
        assert!("svm".parse::<ClassifierKind>().is_err());
        assert_eq!(
            "KNN".parse::<ClassifierKind>().unwrap(),
            ClassifierKind::Knn
        );
    }

    #[test]
    fn every_kind_fits_separated_blobs() {
        let mut rows: Vec<(Vec<f64>, &str)> = Vec::new();
        for i in 0..6 {
            let e = i as f64 * 0.05;
            rows.push((vec![2.0 + e, 0.1 * e, -0.1 * e], "a"));
            rows.push((vec![0.1 * e, 2.0 + e, 0.1 * e], "b"));
            rows.push((vec![-0.1 * e, 0.1 * e, 2.0 + e], "c"));
        }
        let refs: Vec<(&[f64], &str)> = rows.iter().map(|(x, s)| (x.as_slice(), *s)).collect();
        let d = dataset(&refs);
        for kind in ClassifierKind::ALL {
            let mut p = Params::default();
            p.mlp_epochs = 400;
            p.mlp_learning_rate = 1e-2;
            let m = fit(&ClassifierSpec::new(kind).with_params(p).with_seed(9), &d).unwrap();
            let acc = m.accuracy(&d).unwrap();
            assert!(acc >= 0.85, "{kind}: {acc}");
            for v in d.vectors() {
                let idx = m.predict_index(&v.values).unwrap();
                let scores = m.decision_scores(&v.values).unwrap();
                assert_eq!(idx, argmax_first(&scores));
                assert!(idx < m.classes.len());
            }
        }
    }

    #[test]
    fn fingerprint_tracks_data() {
        let a = dataset(&[(&[-1.0], "A"), (&[1.0], "B")]);
        let b = dataset(&[(&[-1.0], "A"), (&[1.5], "B")]);
        let spec = ClassifierSpec::new(ClassifierKind::NearestCentroid);
        assert_ne!(
            fit(&spec, &a).unwrap().train_fingerprint,
            fit(&spec, &b).unwrap().train_fingerprint
        );
    }
}
