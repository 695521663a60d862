//! Predictive models exposing P_f(y | x) for a binary outcome and f(x) for
//! a continuous one.

pub mod linear;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{check_value, ColumnKind, DataTable, Instance};
use crate::discovery::ParentSet;
use crate::rng::{derive_seed, rng_from_seed, below};
use crate::special::sigmoid;

pub use linear::{
    fit_linear, fit_logistic, log_loss, log_loss_gradient, LinearFit, LogisticFit, LogisticParams,
    GRADIENT_TOL,
};
pub use tree::{fit_tree, Tree, TreeNode, TreeParams};

pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TREES: usize = 500;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{model} cannot be trained on a {outcome} outcome")]
    IncompatibleOutcome { model: ModelKind, outcome: String },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("training needs at least one feature")]
    NoFeatures,
    #[error("training needs at least two rows, got {0}")]
    TooFewRows(usize),
    #[error("instance has no value for feature `{0}`")]
    MissingFeature(String),
    #[error("invalid value for feature `{feature}`: {reason}")]
    InvalidValue { feature: String, reason: String },
    #[error("the model predicts a {actual} outcome")]
    WrongOutcomeKind { actual: OutcomeKind },
    #[error("exceedance probabilities need a tree or forest trained with leaf values kept")]
    ExceedanceUnavailable,
    #[error("model file schema version {found} is newer than supported version {supported}")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error("malformed model file: {0}")]
    Corrupt(String),
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[serde(alias = "lr")]
    LinearRegression,
    #[serde(alias = "logreg")]
    LogisticRegression,
    #[serde(alias = "dt")]
    DecisionTree,
    #[serde(alias = "rf")]
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::LinearRegression,
        ModelKind::LogisticRegression,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
    ];

    /// Short name used on the command line and in reports.
    pub fn short(self) -> &'static str {
        match self {
            ModelKind::LinearRegression => "lr",
            ModelKind::LogisticRegression => "logreg",
            ModelKind::DecisionTree => "dt",
            ModelKind::RandomForest => "rf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::LinearRegression => "linear_regression",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.short() == s || k.to_string() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Binary,
    Continuous,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Binary => "binary",
            OutcomeKind::Continuous => "continuous",
        })
    }
}

/// Hyperparameters; unset fields take the kind's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_leaf: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trees: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_penalty: Option<f64>,
    /// Laplace smoothing of leaf class frequencies (default on).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace: Option<bool>,
    /// Keep leaf outcome values so exceedance probabilities can be read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep_leaf_values: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hyperparams: Hyperparams::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trees(mut self, n: usize) -> Self {
        self.hyperparams.n_trees = Some(n);
        self
    }

    pub fn with_min_leaf(mut self, n: usize) -> Self {
        self.hyperparams.min_leaf = Some(n);
        self
    }

    /// Rejects parameters that do not apply to the kind and out-of-range
    /// values.
    pub fn validate(&self) -> Result<()> {
        let h = &self.hyperparams;
        let bad = |m: String| Err(ModelError::InvalidSpec(m));
        let set: [(&str, bool); 9] = [
            ("max_depth", h.max_depth.is_some()),
            ("min_leaf", h.min_leaf.is_some()),
            ("n_trees", h.n_trees.is_some()),
            ("max_features", h.max_features.is_some()),
            ("learning_rate", h.learning_rate.is_some()),
            ("max_iters", h.max_iters.is_some()),
            ("l2_penalty", h.l2_penalty.is_some()),
            ("laplace", h.laplace.is_some()),
            ("keep_leaf_values", h.keep_leaf_values.is_some()),
        ];
        let allowed: &[&str] = match self.kind {
            ModelKind::LinearRegression => &["l2_penalty"],
            ModelKind::LogisticRegression => &["learning_rate", "max_iters", "l2_penalty"],
            ModelKind::DecisionTree => &["max_depth", "min_leaf", "max_features", "laplace", "keep_leaf_values"],
            ModelKind::RandomForest => &[
                "max_depth",
                "min_leaf",
                "n_trees",
                "max_features",
                "laplace",
                "keep_leaf_values",
            ],
        };
        for (name, present) in set {
            if present && !allowed.contains(&name) {
                return bad(format!("`{name}` does not apply to {}", self.kind));
            }
        }
        for (name, v) in [
            ("max_depth", h.max_depth),
            ("min_leaf", h.min_leaf),
            ("n_trees", h.n_trees),
            ("max_features", h.max_features),
            ("max_iters", h.max_iters),
        ] {
            if v == Some(0) {
                return bad(format!("`{name}` must be positive"));
            }
        }
        if let Some(r) = h.learning_rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("`learning_rate` {r} outside (0, 1]"));
            }
        }
        if let Some(l) = h.l2_penalty {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("`l2_penalty` {l} must be a non-negative number"));
            }
        }
        Ok(())
    }

    fn tree_params(&self, classification: bool, m: usize) -> TreeParams {
        let h = &self.hyperparams;
        let default_features = match self.kind {
            ModelKind::RandomForest => Some((m as f64).sqrt().ceil() as usize),
            _ => None,
        };
        TreeParams {
            classification,
            max_depth: h.max_depth,
            min_leaf: h.min_leaf.unwrap_or(1),
            max_features: h.max_features.or(default_features),
            laplace: h.laplace.unwrap_or(true),
            keep_leaf_values: h.keep_leaf_values.unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedParams {
    /// Prediction that ignores the features.
    Constant { value: f64 },
    Linear { intercept: f64, coefficients: Vec<f64> },
    Logistic { intercept: f64, coefficients: Vec<f64> },
    Tree { tree: Tree },
    Forest { trees: Vec<Tree> },
}

/// Name, kind and observed range of a training column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub name: String,
    pub kind: ColumnKind,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub n_train: usize,
    #[serde(default)]
    pub loss_trace: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Every feature of the training table, used or not.
    #[serde(default)]
    pub schema: Vec<FeatureInfo>,
    /// Discovery result when the features were chosen by parent discovery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discovery: Option<ParentSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<ColumnKind>,
    pub outcome: String,
    pub outcome_kind: OutcomeKind,
    pub parameters: FittedParams,
    pub metadata: TrainingMetadata,
}

fn outcome_kind(table: &DataTable) -> std::result::Result<OutcomeKind, String> {
    match table.outcome_column().kind() {
        ColumnKind::Binary => Ok(OutcomeKind::Binary),
        ColumnKind::Continuous => Ok(OutcomeKind::Continuous),
        ColumnKind::Categorical { .. } => Err("categorical".into()),
    }
}

fn schema_of(table: &DataTable) -> Vec<FeatureInfo> {
    table
        .columns()
        .iter()
        .filter(|c| c.name() != table.outcome())
        .map(|c| FeatureInfo {
            name: c.name().to_string(),
            kind: c.kind().clone(),
            min: c.values().iter().copied().fold(f64::INFINITY, f64::min),
            max: c.values().iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect()
}

/// Fits `spec` on every feature of `table`.
pub fn train(spec: &ModelSpec, table: &DataTable) -> Result<TrainedModel> {
    spec.validate()?;
    let features = table.feature_names();
    if features.is_empty() {
        return Err(ModelError::NoFeatures);
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(ModelError::TooFewRows(n));
    }
    let outcome = outcome_kind(table).map_err(|o| ModelError::IncompatibleOutcome {
        model: spec.kind,
        outcome: o,
    })?;
    let incompatible = |o: OutcomeKind| ModelError::IncompatibleOutcome {
        model: spec.kind,
        outcome: o.to_string(),
    };
    let x: Vec<Vec<f64>> = features
        .iter()
        .map(|f| table.column(f).map(|c| c.values().to_vec()))
        .collect::<std::result::Result<_, _>>()
        .expect("feature names come from the table");
    let y = table.outcome_column().values();
    let h = &spec.hyperparams;
    let mut warnings = Vec::new();
    let mut loss_trace = Vec::new();
    let binary: Vec<bool> = features
        .iter()
        .map(|f| table.column(f).map(|c| *c.kind() == ColumnKind::Binary).unwrap_or(false))
        .collect();
    let parameters = match spec.kind {
        ModelKind::LinearRegression => {
            if outcome != OutcomeKind::Continuous {
                return Err(incompatible(outcome));
            }
            let fit = fit_linear(&x, y, h.l2_penalty.unwrap_or(0.0));
            if let Some(l) = fit.ridge {
                warnings.push(format!("singular design: ridge {l:e} added"));
            }
            FittedParams::Linear {
                intercept: fit.intercept,
                coefficients: fit.coefficients,
            }
        }
        ModelKind::LogisticRegression => {
            if outcome != OutcomeKind::Binary {
                return Err(incompatible(outcome));
            }
            let fit = fit_logistic(
                &x,
                y,
                LogisticParams {
                    l2: h.l2_penalty.unwrap_or(1e-6),
                    max_iters: h.max_iters.unwrap_or(100),
                    step: h.learning_rate.unwrap_or(1.0),
                },
            );
            if !fit.converged {
                warnings.push(format!(
                    "logistic regression stopped with gradient norm {:e}",
                    fit.gradient_norm
                ));
            }
            loss_trace = fit.loss_trace;
            FittedParams::Logistic {
                intercept: fit.weights[0],
                coefficients: fit.weights[1..].to_vec(),
            }
        }
        ModelKind::DecisionTree => {
            let params = spec.tree_params(outcome == OutcomeKind::Binary, x.len());
            let rows: Vec<usize> = (0..n).collect();
            let tree = fit_tree(&x, y, &rows, &binary, params, rng_from_seed(spec.seed));
            FittedParams::Tree { tree }
        }
        ModelKind::RandomForest => {
            let params = spec.tree_params(outcome == OutcomeKind::Binary, x.len());
            let n_trees = h.n_trees.unwrap_or(DEFAULT_TREES);
            let trees: Vec<Tree> = (0..n_trees)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_from_seed(derive_seed(spec.seed, t as u64));
                    let rows: Vec<usize> = (0..n).map(|_| below(&mut rng, n)).collect();
                    fit_tree(&x, y, &rows, &binary, params, rng)
                })
                .collect();
            FittedParams::Forest { trees }
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: features.iter().map(|f| f.to_string()).collect(),
        feature_kinds: features
            .iter()
            .map(|f| table.column(f).expect("known").kind().clone())
            .collect(),
        outcome: table.outcome().to_string(),
        outcome_kind: outcome,
        parameters,
        metadata: TrainingMetadata {
            n_train: n,
            loss_trace,
            warnings,
            schema: schema_of(table),
            discovery: None,
        },
    })
}

/// The best constant model: outcome mean (or smoothed class frequency).
pub fn train_constant(spec: &ModelSpec, table: &DataTable) -> Result<TrainedModel> {
    let outcome = outcome_kind(table).map_err(|o| ModelError::IncompatibleOutcome {
        model: spec.kind,
        outcome: o,
    })?;
    let y = table.outcome_column().values();
    let value = y.iter().sum::<f64>() / y.len() as f64;
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: Vec::new(),
        feature_kinds: Vec::new(),
        outcome: table.outcome().to_string(),
        outcome_kind: outcome,
        parameters: FittedParams::Constant { value },
        metadata: TrainingMetadata {
            n_train: y.len(),
            loss_trace: Vec::new(),
            warnings: vec!["no features: constant prediction".into()],
            schema: schema_of(table),
            discovery: None,
        },
    })
}

#[derive(Serialize)]
struct FileOut<'a> {
    schema_version: u32,
    #[serde(flatten)]
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct FileIn {
    #[allow(dead_code)]
    schema_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    /// Feature vector in model order; values are checked against kinds.
    pub fn row(&self, instance: &Instance) -> Result<Vec<f64>> {
        self.feature_names
            .iter()
            .zip(&self.feature_kinds)
            .map(|(name, kind)| {
                let v = instance
                    .get(name)
                    .ok_or_else(|| ModelError::MissingFeature(name.clone()))?;
                check_value(name, kind, v).map_err(|e| ModelError::InvalidValue {
                    feature: name.clone(),
                    reason: e.to_string(),
                })?;
                Ok(v)
            })
            .collect()
    }

    /// Model output for a feature vector in model order: P(Y = 1) for a
    /// binary outcome, the predicted value otherwise.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let linear = |b0: f64, b: &[f64]| b0 + b.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
        match &self.parameters {
            FittedParams::Constant { value } => *value,
            FittedParams::Linear {
                intercept,
                coefficients,
            } => linear(*intercept, coefficients),
            FittedParams::Logistic {
                intercept,
                coefficients,
            } => sigmoid(linear(*intercept, coefficients)),
            FittedParams::Tree { tree } => tree.predict(x),
            FittedParams::Forest { trees } => {
                trees.iter().map(|t| t.predict(x)).sum::<f64>() / trees.len() as f64
            }
        }
    }

    pub fn predict(&self, instance: &Instance) -> Result<f64> {
        Ok(self.predict_row(&self.row(instance)?))
    }

    /// P_f(Y = 1 | x).
    pub fn predict_proba(&self, instance: &Instance) -> Result<f64> {
        if self.outcome_kind != OutcomeKind::Binary {
            return Err(ModelError::WrongOutcomeKind {
                actual: self.outcome_kind,
            });
        }
        self.predict(instance)
    }

    /// f(x) for a continuous outcome.
    pub fn predict_value(&self, instance: &Instance) -> Result<f64> {
        if self.outcome_kind != OutcomeKind::Continuous {
            return Err(ModelError::WrongOutcomeKind {
                actual: self.outcome_kind,
            });
        }
        self.predict(instance)
    }

    /// P(Y > threshold | x) read from kept leaf values.
    pub fn predict_exceedance(&self, instance: &Instance, threshold: f64) -> Result<f64> {
        let x = self.row(instance)?;
        self.exceedance_row(&x, threshold)
    }

    pub fn exceedance_row(&self, x: &[f64], threshold: f64) -> Result<f64> {
        match &self.parameters {
            FittedParams::Tree { tree } => tree
                .exceedance(x, threshold)
                .ok_or(ModelError::ExceedanceUnavailable),
            FittedParams::Forest { trees } => {
                let mut sum = 0.0;
                for t in trees {
                    sum += t
                        .exceedance(x, threshold)
                        .ok_or(ModelError::ExceedanceUnavailable)?;
                }
                Ok(sum / trees.len() as f64)
            }
            _ => Err(ModelError::ExceedanceUnavailable),
        }
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FileOut {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self,
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| ModelError::Corrupt("missing schema_version".into()))?;
        if version > u64::from(MODEL_SCHEMA_VERSION) {
            return Err(ModelError::SchemaVersionMismatch {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: MODEL_SCHEMA_VERSION,
            });
        }
        let file: FileIn =
            serde_json::from_value(value).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        Ok(file.model)
    }

    /// Short content hash of the serialized model.
    pub fn content_id(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model.to_json())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    TrainedModel::from_json(&std::fs::read_to_string(path)?)
}

/// SHA-256 of a tree's serialized structure, hex encoded.
pub fn tree_hash(tree: &Tree) -> String {
    let json = serde_json::to_string(tree).expect("tree serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn line_table() -> DataTable {
        DataTable::new(
            vec![
                Column::continuous("x", vec![0.0, 1.0, 2.0]).unwrap(),
                Column::continuous("y", vec![1.0, 2.5, 4.0]).unwrap(),
            ],
            "y",
        )
        .unwrap()
    }

    fn binary_table() -> DataTable {
        let x: Vec<f64> = (0..40).map(|i| f64::from(i % 2)).collect();
        let y: Vec<f64> = (0..40).map(|i| f64::from(u8::from(i % 2 == 1 && i % 5 != 0 || i % 7 == 0))).collect();
        DataTable::new(
            vec![
                Column::binary("x", x).unwrap(),
                Column::binary("y", y).unwrap(),
            ],
            "y",
        )
        .unwrap()
    }

    #[test]
    fn linear_fit_and_predict() {
        let m = train(&ModelSpec::new(ModelKind::LinearRegression), &line_table()).unwrap();
        let v = m.predict_value(&Instance::new().with("x", 2.0)).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert!(matches!(
            m.predict_proba(&Instance::new().with("x", 2.0)),
            Err(ModelError::WrongOutcomeKind { .. })
        ));
        assert!(matches!(
            m.predict_value(&Instance::new()),
            Err(ModelError::MissingFeature(_))
        ));
    }

    #[test]
    fn incompatible_outcomes() {
        assert!(matches!(
            train(&ModelSpec::new(ModelKind::LogisticRegression), &line_table()),
            Err(ModelError::IncompatibleOutcome { .. })
        ));
        assert!(matches!(
            train(&ModelSpec::new(ModelKind::LinearRegression), &binary_table()),
            Err(ModelError::IncompatibleOutcome { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let mut s = ModelSpec::new(ModelKind::LinearRegression);
        s.hyperparams.n_trees = Some(5);
        assert!(s.validate().is_err());
        let mut s = ModelSpec::new(ModelKind::RandomForest);
        s.hyperparams.n_trees = Some(0);
        assert!(s.validate().is_err());
        let mut s = ModelSpec::new(ModelKind::LogisticRegression);
        s.hyperparams.learning_rate = Some(1.5);
        assert!(s.validate().is_err());
        s.hyperparams.learning_rate = Some(0.5);
        assert!(s.validate().is_ok());
        assert_eq!("rf".parse::<ModelKind>().unwrap(), ModelKind::RandomForest);
        assert_eq!("decision_tree".parse::<ModelKind>().unwrap(), ModelKind::DecisionTree);
        assert!("mlp".parse::<ModelKind>().is_err());
    }

    #[test]
    fn forest_is_mean_of_trees() {
        let t = binary_table();
        let m = train(&ModelSpec::new(ModelKind::RandomForest).with_trees(7).with_seed(3), &t).unwrap();
        let FittedParams::Forest { trees } = &m.parameters else {
            panic!("forest expected")
        };
        for x in [0.0, 1.0] {
            let mean = trees.iter().map(|tr| tr.predict(&[x])).sum::<f64>() / 7.0;
            assert_eq!(m.predict_row(&[x]), mean);
            let p = m.predict_proba(&Instance::new().with("x", x)).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
        let single = train(&ModelSpec::new(ModelKind::RandomForest).with_trees(1), &t).unwrap();
        let FittedParams::Forest { trees } = &single.parameters else {
            panic!("forest expected")
        };
        assert_eq!(single.predict_row(&[1.0]), trees[0].predict(&[1.0]));
    }

    #[test]
    fn json_round_trip() {
        let t = binary_table();
        for kind in [ModelKind::LogisticRegression, ModelKind::DecisionTree, ModelKind::RandomForest] {
            let m = train(&ModelSpec::new(kind).with_seed(1), &t).unwrap();
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
            for x in [0.0, 1.0] {
                assert_eq!(back.predict_row(&[x]).to_bits(), m.predict_row(&[x]).to_bits());
            }
        }
        let m = train(&ModelSpec::new(ModelKind::LogisticRegression), &t).unwrap();
        let future = m.to_json().replace("\"schema_version\":1", "\"schema_version\":7");
        assert!(matches!(
            TrainedModel::from_json(&future),
            Err(ModelError::SchemaVersionMismatch { found: 7, .. })
        ));
        assert!(matches!(TrainedModel::from_json("[]"), Err(ModelError::Corrupt(_))));
    }

    #[test]
    fn constant_model() {
        let m = train_constant(&ModelSpec::new(ModelKind::LinearRegression), &line_table()).unwrap();
        assert_eq!(m.predict(&Instance::new()).unwrap(), 2.5);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let m = train(&ModelSpec::new(ModelKind::DecisionTree), &binary_table()).unwrap();
        assert!(matches!(
            m.predict(&Instance::new().with("x", 0.5)),
            Err(ModelError::InvalidValue { .. })
        ));
    }
}
