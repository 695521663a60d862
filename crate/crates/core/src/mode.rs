//! The MODE pipeline: discover the parents of the outcome, fit a model on
//! them, and read controlled direct effects off the model's predictions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, ColumnKind, DataError, DataTable, Instance};
use crate::discovery::{find_parents, DiscoveryError, DEFAULT_ALPHA, DEFAULT_MAX_COND};
use crate::models::{train, train_constant, ModelError, ModelSpec, OutcomeKind, TrainedModel};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const EXCLUDED_REASON: &str = "excluded by discovery";

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("instance has no value for '{0}'")]
    MissingFeatureValue(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub type Result<T> = std::result::Result<T, ModeError>;

/// How entries are ordered in a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// Largest effect toward the class of interest (or larger Y) first.
    #[default]
    Signed,
    Absolute,
}

/// Effect of moving one feature from its current value to a treated value,
/// the other model features held at the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdeEstimate {
    pub feature: String,
    #[serde(rename = "control")]
    pub control_value: f64,
    #[serde(rename = "treated")]
    pub treated_value: f64,
    pub cde: f64,
    pub rank: usize,
}

/// A feature dropped by discovery; its direct effect is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedFeature {
    pub feature: String,
    pub cde: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfReport {
    pub model_ref: String,
    pub instance: Instance,
    pub outcome: String,
    #[serde(rename = "prediction")]
    pub predicted: f64,
    /// Label whose probability is reported; `None` for a continuous outcome.
    pub class_of_interest: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceedance_threshold: Option<f64>,
    pub ranking: RankBy,
    #[serde(rename = "entries")]
    pub top_k: Vec<CdeEstimate>,
    /// Features the model uses.
    pub parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<ExcludedFeature>,
    pub warnings: Vec<String>,
}

impl WhatIfReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfOptions {
    pub k: usize,
    pub delta: f64,
    /// Per-feature step for continuous features.
    #[serde(default)]
    pub delta_overrides: BTreeMap<String, f64>,
    pub class_of_interest: u8,
    #[serde(default)]
    pub rank_by: RankBy,
    /// List features outside the model with a zero effect.
    #[serde(default)]
    pub include_excluded: bool,
    /// Report P(Y > c) instead of the predicted value for a continuous outcome.
    #[serde(default)]
    pub exceedance_threshold: Option<f64>,
}

impl Default for WhatIfOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            delta: DEFAULT_DELTA,
            delta_overrides: BTreeMap::new(),
            class_of_interest: 1,
            rank_by: RankBy::Signed,
            include_excluded: false,
            exceedance_threshold: None,
        }
    }
}

impl WhatIfOptions {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_class(mut self, class: u8) -> Self {
        self.class_of_interest = class;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(ModeError::InvalidArgument("k must be at least 1".into()));
        }
        if self.class_of_interest > 1 {
            return Err(ModeError::InvalidArgument(format!(
                "class of interest {} is not a binary label",
                self.class_of_interest
            )));
        }
        for (name, d) in std::iter::once(("delta", &self.delta)).chain(
            self.delta_overrides
                .iter()
                .map(|(k, v)| (k.as_str(), v)),
        ) {
            if !d.is_finite() {
                return Err(ModeError::InvalidArgument(format!("{name}: delta must be finite")));
            }
        }
        if let Some(c) = self.exceedance_threshold {
            if !c.is_finite() {
                return Err(ModeError::InvalidArgument("threshold must be finite".into()));
            }
        }
        Ok(())
    }

    fn delta_for(&self, feature: &str) -> f64 {
        self.delta_overrides.get(feature).copied().unwrap_or(self.delta)
    }
}

/// The quantity whose change is the effect: P(class) for a binary outcome,
/// f(x) or P(Y > c) for a continuous one.
struct Target<'a> {
    model: &'a TrainedModel,
    class: u8,
    threshold: Option<f64>,
}

impl<'a> Target<'a> {
    fn new(model: &'a TrainedModel, class: u8, threshold: Option<f64>) -> Result<Self> {
        if threshold.is_some() && model.outcome_kind != OutcomeKind::Continuous {
            return Err(ModeError::InvalidArgument(
                "exceedance reporting needs a continuous outcome".into(),
            ));
        }
        Ok(Self {
            model,
            class,
            threshold,
        })
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(c) = self.threshold {
            return Ok(self.model.exceedance_row(x, c)?);
        }
        let p = self.model.predict_row(x);
        Ok(match (self.model.outcome_kind, self.class) {
            (OutcomeKind::Binary, 0) => 1.0 - p,
            _ => p,
        })
    }

    fn class_label(&self) -> Option<u8> {
        match self.model.outcome_kind {
            OutcomeKind::Binary => Some(self.class),
            OutcomeKind::Continuous => None,
        }
    }
}

fn model_row(model: &TrainedModel, instance: &Instance) -> Result<Vec<f64>> {
    for name in &model.feature_names {
        if instance.get(name).is_none() {
            return Err(ModeError::MissingFeatureValue(name.clone()));
        }
    }
    for (name, _) in instance.iter() {
        let known = name == model.outcome
            || model.feature_index(name).is_some()
            || model.metadata.schema.iter().any(|f| f.name == name);
        if !known {
            return Err(ModeError::UnknownFeature(name.to_string()));
        }
    }
    Ok(model.row(instance)?)
}

fn estimate_at(
    target: &Target,
    x: &[f64],
    base: f64,
    j: usize,
    delta: f64,
) -> Result<Option<CdeEstimate>> {
    let model = target.model;
    let control = x[j];
    let treated = match model.feature_kinds[j] {
        ColumnKind::Binary => 1.0 - control,
        ColumnKind::Continuous => control + delta,
        ColumnKind::Categorical { .. } => return Ok(None),
    };
    let mut xt = x.to_vec();
    xt[j] = treated;
    let cde = target.eval(&xt)? - base;
    Ok(Some(CdeEstimate {
        feature: model.feature_names[j].clone(),
        control_value: control,
        treated_value: treated,
        cde,
        rank: 1,
    }))
}

/// CDE of `feature` at `instance`: the change in the model's output when
/// the feature alone moves to its treated value (the flipped label for a
/// binary feature, `x + delta` for a continuous one).
pub fn estimate_cde(
    model: &TrainedModel,
    instance: &Instance,
    feature: &str,
    delta: f64,
    class_of_interest: u8,
) -> Result<CdeEstimate> {
    let j = model
        .feature_index(feature)
        .ok_or_else(|| ModeError::UnknownFeature(feature.to_string()))?;
    if !delta.is_finite() {
        return Err(ModeError::InvalidArgument("delta must be finite".into()));
    }
    if class_of_interest > 1 {
        return Err(ModeError::InvalidArgument(format!(
            "class of interest {class_of_interest} is not a binary label"
        )));
    }
    let x = model_row(model, instance)?;
    let target = Target::new(model, class_of_interest, None)?;
    let base = target.eval(&x)?;
    estimate_at(&target, &x, base, j, delta)?.ok_or_else(|| {
        ModeError::InvalidArgument(format!("'{feature}' is categorical; one-hot encode it first"))
    })
}

/// Sorts estimates by the ranking rule, ties to the lower model column,
/// and assigns ranks 1..
fn rank(mut entries: Vec<(usize, CdeEstimate)>, rank_by: RankBy) -> Vec<CdeEstimate> {
    let key = |e: &CdeEstimate| match rank_by {
        RankBy::Signed => e.cde,
        RankBy::Absolute => e.cde.abs(),
    };
    entries.sort_by(|(ia, a), (ib, b)| key(b).total_cmp(&key(a)).then(ia.cmp(ib)));
    entries
        .into_iter()
        .enumerate()
        .map(|(r, (_, mut e))| {
            e.rank = r + 1;
            e
        })
        .collect()
}

/// Prediction and top-k CDE ranking for one instance.
pub fn whatif(model: &TrainedModel, instance: &Instance, opts: &WhatIfOptions) -> Result<WhatIfReport> {
    opts.validate()?;
    let x = model_row(model, instance)?;
    let target = Target::new(model, opts.class_of_interest, opts.exceedance_threshold)?;
    let base = target.eval(&x)?;
    let mut warnings = model.metadata.warnings.clone();
    let mut entries = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let name = &model.feature_names[j];
        match estimate_at(&target, &x, base, j, opts.delta_for(name))? {
            Some(e) => entries.push((j, e)),
            None => warnings.push(format!("'{name}' is categorical and was not ranked")),
        }
    }
    let mut top_k = rank(entries, opts.rank_by);
    top_k.truncate(opts.k);
    let excluded = if opts.include_excluded {
        model
            .metadata
            .schema
            .iter()
            .filter(|f| model.feature_index(&f.name).is_none())
            .map(|f| ExcludedFeature {
                feature: f.name.clone(),
                cde: 0.0,
                reason: EXCLUDED_REASON.into(),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(WhatIfReport {
        model_ref: model.content_id(),
        instance: instance.clone(),
        outcome: model.outcome.clone(),
        predicted: base,
        class_of_interest: target.class_label(),
        exceedance_threshold: opts.exceedance_threshold,
        ranking: opts.rank_by,
        top_k,
        parents: model.feature_names.clone(),
        excluded,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionResult {
    pub feature: String,
    pub old_value: f64,
    pub new_value: f64,
    pub old_prediction: f64,
    pub new_prediction: f64,
    pub report: WhatIfReport,
}

/// Sets `feature` to `new_value` and re-runs the what-if analysis at the
/// modified instance.
pub fn apply_intervention(
    model: &TrainedModel,
    instance: &Instance,
    feature: &str,
    new_value: f64,
    opts: &WhatIfOptions,
) -> Result<InterventionResult> {
    let j = model
        .feature_index(feature)
        .ok_or_else(|| ModeError::UnknownFeature(feature.to_string()))?;
    let old_value = instance
        .get(feature)
        .ok_or_else(|| ModeError::MissingFeatureValue(feature.to_string()))?;
    opts.validate()?;
    let target = Target::new(model, opts.class_of_interest, opts.exceedance_threshold)?;
    let old_prediction = target.eval(&model_row(model, instance)?)?;
    let modified = instance.clone().with(feature, new_value);
    dataset::check_value(feature, &model.feature_kinds[j], new_value).map_err(|e| {
        ModelError::InvalidValue {
            feature: feature.to_string(),
            reason: e.to_string(),
        }
    })?;
    let report = whatif(model, &modified, opts)?;
    Ok(InterventionResult {
        feature: feature.to_string(),
        old_value,
        new_value,
        old_prediction,
        new_prediction: report.predicted,
        report,
    })
}

/// Which features the model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The discovered parents of the outcome.
    #[default]
    ParentsOnly,
    AllVariables,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::ParentsOnly => "parents",
            Variant::AllVariables => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub alpha: f64,
    pub max_cond: usize,
    pub variant: Variant,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            max_cond: DEFAULT_MAX_COND,
            variant: Variant::ParentsOnly,
        }
    }
}

/// Discovers the parents of the outcome, projects the table onto them and
/// trains `spec`. Without parents the model is the best constant.
pub fn build_model(table: &DataTable, spec: &ModelSpec, opts: &BuildOptions) -> Result<TrainedModel> {
    if opts.variant == Variant::AllVariables {
        return Ok(train(spec, table)?);
    }
    let parents = find_parents(table, opts.alpha, opts.max_cond)?;
    let full_schema;
    let mut model = if parents.is_empty() {
        let mut m = train_constant(spec, table)?;
        m.metadata.warnings = vec!["no parents of the outcome found: constant prediction".into()];
        full_schema = m.metadata.schema.clone();
        m
    } else {
        let mut cols: Vec<&str> = parents.parents.iter().map(String::as_str).collect();
        cols.push(table.outcome());
        let projected = dataset::project(table, &cols)?;
        full_schema = train_constant(spec, table)?.metadata.schema;
        train(spec, &projected)?
    };
    model.metadata.schema = full_schema;
    model.metadata.discovery = Some(parents);
    Ok(model)
}

/// Algorithm end to end: discover, project, train, predict and rank.
#[allow(clippy::too_many_arguments)]
pub fn run_mode(
    table: &DataTable,
    instance: &Instance,
    k: usize,
    delta: f64,
    alpha: f64,
    spec: &ModelSpec,
    class_of_interest: u8,
) -> Result<WhatIfReport> {
    let opts = WhatIfOptions::default()
        .with_k(k)
        .with_delta(delta)
        .with_class(class_of_interest);
    opts.validate()?;
    let model = build_model(
        table,
        spec,
        &BuildOptions {
            alpha,
            ..Default::default()
        },
    )?;
    whatif(&model, instance, &opts)
}
