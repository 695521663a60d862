//! The two synthetic experiments: CDE bias with and without parent
//! selection, and prediction error when an environment shifts a child of
//! the outcome.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{project, split, DataError, DataTable, Instance};
use crate::discovery::{find_parents, DEFAULT_ALPHA, DEFAULT_MAX_COND};
use crate::mode::{ModeError, Variant};
use crate::models::{train, train_constant, ModelError, ModelKind, ModelSpec, TrainedModel};
use crate::rng::derive_seed;
use crate::scm::{make_g1, make_g2, make_wine, true_cde, Scm, ScmError, Target};

pub const TREATMENT: &str = "X1";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScmId {
    G1,
    G2,
}

impl ScmId {
    pub fn build(self) -> Scm {
        match self {
            ScmId::G1 => make_g1(),
            ScmId::G2 => make_g2(),
        }
    }
}

impl FromStr for ScmId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "g1" => Ok(ScmId::G1),
            "g2" => Ok(ScmId::G2),
            other => Err(format!("unknown SCM '{other}' (expected g1 or g2)")),
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn model_label(kind: ModelKind) -> String {
    kind.short().to_uppercase()
}

fn columns_with_outcome<'a>(features: &[&'a str], outcome: &'a str) -> Vec<&'a str> {
    let mut cols = features.to_vec();
    cols.push(outcome);
    cols
}

/// Trains on `features` of `table`, falling back to a constant model when
/// the list is empty.
fn fit_on(spec: &ModelSpec, table: &DataTable, features: &[&str]) -> Result<TrainedModel> {
    let projected = project(table, &columns_with_outcome(features, table.outcome()))?;
    Ok(if features.is_empty() {
        train_constant(spec, &projected)?
    } else {
        train(spec, &projected)?
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub scm: ScmId,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub specs: Vec<ModelSpec>,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_cond")]
    pub max_cond: usize,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_max_cond() -> usize {
    DEFAULT_MAX_COND
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            scm: ScmId::G1,
            sizes: vec![2000, 20000],
            reps: 30,
            specs: vec![
                ModelSpec::new(ModelKind::LinearRegression),
                ModelSpec::new(ModelKind::DecisionTree),
                ModelSpec::new(ModelKind::RandomForest),
            ],
            seed: 0,
            alpha: DEFAULT_ALPHA,
            max_cond: DEFAULT_MAX_COND,
        }
    }
}

impl BiasConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(BenchError::InvalidConfig("reps must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(BenchError::InvalidConfig("sizes must be positive".into()));
        }
        if self.specs.is_empty() {
            return Err(BenchError::InvalidConfig("no model specs".into()));
        }
        for s in &self.specs {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub model: String,
    pub n: usize,
    pub variant: Variant,
    pub mean_abs_bias: f64,
    pub std_abs_bias: f64,
    pub reps: usize,
}

/// Seed of the dataset for one (size, replicate) cell.
pub fn bias_data_seed(seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), rep as u64)
}

struct Groups<'a> {
    features: Vec<&'a str>,
    /// Distinct rows (as bit patterns) with their counts.
    counts: BTreeMap<Vec<u64>, usize>,
    n: usize,
}

fn group_rows(table: &DataTable) -> Result<Groups<'_>> {
    let features = table.feature_names();
    let cols: Vec<&[f64]> = features
        .iter()
        .map(|f| table.column(f).map(|c| c.values()))
        .collect::<std::result::Result<_, _>>()?;
    let mut counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for r in 0..table.n_rows() {
        let key: Vec<u64> = cols.iter().map(|c| c[r].to_bits()).collect();
        *counts.entry(key).or_default() += 1;
    }
    Ok(Groups {
        features,
        counts,
        n: table.n_rows(),
    })
}

/// Model CDE of the binary `feature` (0 → 1) at each row context, or zero
/// when the model does not use the feature.
fn row_estimates<'a>(
    model: &'a TrainedModel,
    groups: &'a Groups,
    feature: &str,
) -> impl Iterator<Item = (&'a Vec<u64>, usize, f64)> + 'a {
    let model_cols: Vec<usize> = model
        .feature_names
        .iter()
        .map(|f| {
            groups
                .features
                .iter()
                .position(|g| g == f)
                .expect("model features come from the table")
        })
        .collect();
    let t = model.feature_index(feature);
    groups.counts.iter().map(move |(key, &count)| {
        let estimate = match t {
            Some(j) => {
                let mut x: Vec<f64> = model_cols.iter().map(|&c| f64::from_bits(key[c])).collect();
                x[j] = 0.0;
                let c = model.predict_row(&x);
                x[j] = 1.0;
                model.predict_row(&x) - c
            }
            None => 0.0,
        };
        (key, count, estimate)
    })
}

/// Support-weighted mean over the rows of `table` of the model's CDE of a
/// binary feature.
pub fn average_cde(model: &TrainedModel, table: &DataTable, feature: &str) -> Result<f64> {
    let groups = group_rows(table)?;
    let total: f64 = row_estimates(model, &groups, feature)
        .map(|(_, count, e)| count as f64 * e)
        .sum();
    Ok(total / groups.n as f64)
}

/// Support-weighted mean of |model CDE − true CDE| of a binary feature
/// over the rows of `table`. A model without the feature estimates zero.
pub fn cde_bias(scm: &Scm, model: &TrainedModel, table: &DataTable, feature: &str) -> Result<f64> {
    let groups = group_rows(table)?;
    let fi = groups
        .features
        .iter()
        .position(|f| *f == feature)
        .ok_or_else(|| BenchError::InvalidConfig(format!("table has no {feature}")))?;
    let mut total = 0.0;
    let mut truth_cache: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for (key, count, estimate) in row_estimates(model, &groups, feature) {
        let mut ctx_key = key.clone();
        ctx_key[fi] = 0;
        let truth = match truth_cache.get(&ctx_key) {
            Some(v) => *v,
            None => {
                let context: Instance = groups
                    .features
                    .iter()
                    .zip(key)
                    .filter(|(f, _)| **f != feature)
                    .map(|(f, b)| (f.to_string(), f64::from_bits(*b)))
                    .collect();
                let e = true_cde(scm, feature, &context, 1.0, 0.0, Target::Mean, 100_000, 0)?;
                truth_cache.insert(ctx_key, e.value);
                e.value
            }
        };
        total += count as f64 * (estimate - truth).abs();
    }
    Ok(total / groups.n as f64)
}

/// Absolute CDE bias for X1 per (spec, size, variant), aggregated over
/// replicates. Rows are ordered by spec, then size, parents-only first.
pub fn bias_experiment(config: &BiasConfig) -> Result<Vec<BiasRow>> {
    config.validate()?;
    let scm = config.scm.build();
    let jobs: Vec<(usize, usize)> = (0..config.sizes.len())
        .flat_map(|s| (0..config.reps).map(move |r| (s, r)))
        .collect();
    // per job: biases[spec][variant]
    let results: Vec<Vec<[f64; 2]>> = jobs
        .par_iter()
        .map(|&(s, rep)| -> Result<Vec<[f64; 2]>> {
            let n = config.sizes[s];
            let data_seed = bias_data_seed(config.seed, n, rep);
            let table = scm.sample(n, data_seed);
            let all = table.feature_names();
            let parents = find_parents(&table, config.alpha, config.max_cond)
                .map_err(ModeError::from)?;
            let pa: Vec<&str> = parents.parents.iter().map(String::as_str).collect();
            config
                .specs
                .iter()
                .enumerate()
                .map(|(i, spec)| {
                    let spec = spec.clone().with_seed(derive_seed(data_seed, i as u64));
                    let po = fit_on(&spec, &table, &pa)?;
                    let av = fit_on(&spec, &table, &all)?;
                    Ok([
                        cde_bias(&scm, &po, &table, TREATMENT)?,
                        cde_bias(&scm, &av, &table, TREATMENT)?,
                    ])
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, spec) in config.specs.iter().enumerate() {
        for (s, &n) in config.sizes.iter().enumerate() {
            for (v, variant) in [Variant::ParentsOnly, Variant::AllVariables].into_iter().enumerate() {
                let values: Vec<f64> = jobs
                    .iter()
                    .zip(&results)
                    .filter(|((js, _), _)| *js == s)
                    .map(|(_, r)| r[i][v])
                    .collect();
                let (mean, std) = mean_std(&values);
                rows.push(BiasRow {
                    model: model_label(spec.kind),
                    n,
                    variant,
                    mean_abs_bias: mean,
                    std_abs_bias: std,
                    reps: config.reps,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvPair {
    pub train: u8,
    pub test: u8,
}

impl EnvPair {
    /// Same-environment pairs first.
    pub const ALL: [EnvPair; 4] = [
        EnvPair { train: 0, test: 0 },
        EnvPair { train: 1, test: 1 },
        EnvPair { train: 0, test: 1 },
        EnvPair { train: 1, test: 0 },
    ];

    pub fn is_shifted(self) -> bool {
        self.train != self.test
    }
}

impl std::fmt::Display for EnvPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}->{}", self.train, self.test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustConfig {
    pub n: usize,
    pub reps: usize,
    pub specs: Vec<ModelSpec>,
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.7
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            reps: 30,
            specs: vec![
                ModelSpec::new(ModelKind::LinearRegression),
                ModelSpec::new(ModelKind::DecisionTree).with_min_leaf(20),
                ModelSpec::new(ModelKind::RandomForest)
                    .with_trees(100)
                    .with_min_leaf(5),
            ],
            seed: 0,
            train_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRow {
    pub model: String,
    pub variant: Variant,
    pub env_pair: EnvPair,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub reps: usize,
}

pub const WINE_PARENTS: [&str; 3] = ["X1", "X2", "X3"];
pub const WINE_ALL: [&str; 4] = ["X1", "X2", "X3", "P"];

fn mse(model: &TrainedModel, table: &DataTable) -> Result<f64> {
    let cols: Vec<&[f64]> = model
        .feature_names
        .iter()
        .map(|f| table.column(f).map(|c| c.values()))
        .collect::<std::result::Result<_, _>>()?;
    let y = table.outcome_column().values();
    let mut x = vec![0.0; cols.len()];
    let mut sum = 0.0;
    for (r, yr) in y.iter().enumerate() {
        for (xj, c) in x.iter_mut().zip(&cols) {
            *xj = c[r];
        }
        let e = model.predict_row(&x) - yr;
        sum += e * e;
    }
    Ok(sum / y.len() as f64)
}

/// Test error of Y predictions when training and test data come from the
/// same or from different environments of the wine model. Rows are ordered
/// by spec, then variant (parents-only first), then environment pair.
pub fn robustness_experiment(config: &RobustConfig) -> Result<Vec<RobustRow>> {
    if config.reps == 0 {
        return Err(BenchError::InvalidConfig("reps must be at least 1".into()));
    }
    if config.n < 100 {
        return Err(BenchError::InvalidConfig("n must be at least 100".into()));
    }
    if config.specs.is_empty() {
        return Err(BenchError::InvalidConfig("no model specs".into()));
    }
    for s in &config.specs {
        s.validate()?;
    }
    let scms = [make_wine(0), make_wine(1)];
    // per rep: mse[spec][variant][pair]
    let results: Vec<Vec<[[f64; 4]; 2]>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<[[f64; 4]; 2]>> {
            let rep_seed = derive_seed(config.seed, rep as u64);
            let mut parts = Vec::with_capacity(2);
            for (env, scm) in scms.iter().enumerate() {
                let data = scm.sample(config.n, derive_seed(rep_seed, env as u64));
                parts.push(split(
                    &data,
                    config.train_fraction,
                    derive_seed(rep_seed, 100 + env as u64),
                )?);
            }
            let mut out = Vec::with_capacity(config.specs.len());
            for (i, spec) in config.specs.iter().enumerate() {
                let mut cell = [[0.0; 4]; 2];
                for (v, features) in [&WINE_PARENTS[..], &WINE_ALL[..]].into_iter().enumerate() {
                    let models = [0usize, 1]
                        .map(|env| {
                            let s = spec
                                .clone()
                                .with_seed(derive_seed(rep_seed, (1000 + 10 * i + env) as u64));
                            fit_on(&s, &parts[env].0, features)
                        });
                    let [m0, m1] = models;
                    let models = [m0?, m1?];
                    for (p, pair) in EnvPair::ALL.iter().enumerate() {
                        cell[v][p] =
                            mse(&models[pair.train as usize], &parts[pair.test as usize].1)?;
                    }
                }
                out.push(cell);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, spec) in config.specs.iter().enumerate() {
        for (v, variant) in [Variant::ParentsOnly, Variant::AllVariables].into_iter().enumerate() {
            for (p, pair) in EnvPair::ALL.iter().enumerate() {
                let mses: Vec<f64> = results.iter().map(|r| r[i][v][p]).collect();
                let rmses: Vec<f64> = mses.iter().map(|m| m.sqrt()).collect();
                let (mse_mean, mse_std) = mean_std(&mses);
                let (rmse_mean, rmse_std) = mean_std(&rmses);
                rows.push(RobustRow {
                    model: model_label(spec.kind),
                    variant,
                    env_pair: *pair,
                    mse_mean,
                    mse_std,
                    rmse_mean,
                    rmse_std,
                    reps: config.reps,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format '{other}'")),
        }
    }
}

fn variant_label(v: Variant) -> &'static str {
    match v {
        Variant::ParentsOnly => "parents",
        Variant::AllVariables => "all variables",
    }
}

/// Bias table. `scale` multiplies the displayed markdown values (100 gives
/// the "×10⁻²" reading); CSV always holds raw values.
pub fn render_bias(rows: &[BiasRow], format: ReportFormat, scale: f64) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("model,n,variant,mean_abs_bias,std_abs_bias,reps\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.model, r.n, r.variant, r.mean_abs_bias, r.std_abs_bias, r.reps
                );
            }
        }
        ReportFormat::Markdown => {
            if scale != 1.0 {
                let _ = writeln!(out, "Values multiplied by {scale}.\n");
            }
            out.push_str("| Model | n | Inputs | Mean abs bias | Std |\n");
            out.push_str("|---|---:|---|---:|---:|\n");
            let mut last: Option<(&str, usize)> = None;
            for r in rows {
                let head = (r.model.as_str(), r.n);
                let (m, n) = if last == Some(head) {
                    (String::new(), String::new())
                } else {
                    (r.model.clone(), r.n.to_string())
                };
                last = Some(head);
                let cell = |v: f64| {
                    let s = format!("{:.4}", v * scale);
                    if r.variant == Variant::ParentsOnly {
                        format!("**{s}**")
                    } else {
                        s
                    }
                };
                let _ = writeln!(
                    out,
                    "| {m} | {n} | {} | {} | {} |",
                    variant_label(r.variant),
                    cell(r.mean_abs_bias),
                    cell(r.std_abs_bias)
                );
            }
        }
    }
    out
}

/// Robustness table: one line per (model, inputs), one column per
/// environment pair, cells `MSE mean ± std`, followed by the same for RMSE.
pub fn render_robust(rows: &[RobustRow], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("model,variant,env_pair,mse_mean,mse_std,rmse_mean,rmse_std,reps\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.model,
                    r.variant,
                    r.env_pair,
                    r.mse_mean,
                    r.mse_std,
                    r.rmse_mean,
                    r.rmse_std,
                    r.reps
                );
            }
        }
        ReportFormat::Markdown => {
            let mut groups: Vec<(&str, Variant)> = Vec::new();
            for r in rows {
                if !groups.contains(&(r.model.as_str(), r.variant)) {
                    groups.push((r.model.as_str(), r.variant));
                }
            }
            for (title, pick) in [
                ("MSE", (|r: &RobustRow| (r.mse_mean, r.mse_std)) as fn(&RobustRow) -> (f64, f64)),
                ("RMSE", |r: &RobustRow| (r.rmse_mean, r.rmse_std)),
            ] {
                let _ = writeln!(out, "{title}\n");
                out.push_str("| Model | Inputs |");
                for p in EnvPair::ALL {
                    let _ = write!(out, " {} → {} |", p.train, p.test);
                }
                out.push_str("\n|---|---|---:|---:|---:|---:|\n");
                for (model, variant) in &groups {
                    let _ = write!(out, "| {model} | {} |", variant_label(*variant));
                    for p in EnvPair::ALL {
                        match rows
                            .iter()
                            .find(|r| r.model == *model && r.variant == *variant && r.env_pair == p)
                        {
                            Some(r) => {
                                let (m, s) = pick(r);
                                let _ = write!(out, " {m:.3} ± {s:.3} |");
                            }
                            None => out.push_str(" |"),
                        }
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_report(path: impl AsRef<Path>, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_csv, SchemaHint};

    fn small_bias() -> BiasConfig {
        BiasConfig {
            sizes: vec![300],
            reps: 2,
            specs: vec![
                ModelSpec::new(ModelKind::LinearRegression),
                ModelSpec::new(ModelKind::RandomForest).with_trees(5),
            ],
            ..Default::default()
        }
    }

    #[test]
    fn bias_rows_are_deterministic() {
        let a = bias_experiment(&small_bias()).unwrap();
        let b = bias_experiment(&small_bias()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|r| r.mean_abs_bias >= 0.0 && r.reps == 2));
        assert_eq!(
            render_bias(&a, ReportFormat::Csv, 1.0),
            render_bias(&b, ReportFormat::Csv, 1.0)
        );
    }

    #[test]
    fn exact_model_has_zero_bias() {
        let scm = make_g1();
        let table = scm.sample(200, 3);
        let mut m = fit_on(&ModelSpec::new(ModelKind::LinearRegression), &table, &["X1", "X2"])
            .unwrap();
        m.parameters = crate::models::FittedParams::Linear {
            intercept: 0.0,
            coefficients: vec![1.5, 0.3],
        };
        assert!(cde_bias(&scm, &m, &table, TREATMENT).unwrap() < 1e-12);
        let without = fit_on(&ModelSpec::new(ModelKind::LinearRegression), &table, &["X2"]).unwrap();
        assert_eq!(cde_bias(&scm, &without, &table, TREATMENT).unwrap(), 1.5);
    }

    #[test]
    fn bias_markdown_layout() {
        let rows = bias_experiment(&BiasConfig {
            reps: 1,
            ..small_bias()
        })
        .unwrap();
        let md = render_bias(&rows, ReportFormat::Markdown, 1.0);
        let body: Vec<&str> = md.lines().skip(2).collect();
        assert_eq!(body.len(), 4);
        assert!(body[0].starts_with("| LR | 300 | parents |"));
        assert!(body[1].starts_with("|  |  | all variables |"));
    }

    #[test]
    fn bias_csv_loads_as_a_table() {
        let rows = bias_experiment(&BiasConfig {
            reps: 1,
            ..small_bias()
        })
        .unwrap();
        let csv = render_bias(&rows, ReportFormat::Csv, 1.0);
        let t = read_csv(csv.as_bytes(), "mean_abs_bias", &SchemaHint::new()).unwrap();
        assert_eq!(t.n_rows(), rows.len());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(t.outcome_column().values()[i], r.mean_abs_bias);
        }
    }

    #[test]
    fn robustness_is_deterministic_and_ordered() {
        let cfg = RobustConfig {
            n: 400,
            reps: 2,
            specs: vec![ModelSpec::new(ModelKind::LinearRegression)],
            ..Default::default()
        };
        let a = robustness_experiment(&cfg).unwrap();
        assert_eq!(a, robustness_experiment(&cfg).unwrap());
        assert_eq!(a.len(), 8);
        assert_eq!(a[0].variant, Variant::ParentsOnly);
        assert_eq!(a[4].variant, Variant::AllVariables);
        assert_eq!(a[2].env_pair, EnvPair { train: 0, test: 1 });
        for r in &a {
            assert!((r.rmse_mean - r.mse_mean.sqrt()).abs() < 0.5 * r.mse_mean.sqrt());
        }
        let csv = render_robust(&a, ReportFormat::Csv);
        let t = read_csv(csv.as_bytes(), "mse_mean", &SchemaHint::new()).unwrap();
        assert_eq!(t.n_rows(), 8);
        let md = render_robust(&a, ReportFormat::Markdown);
        assert!(md.contains("| LR | parents |"));
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(
            bias_experiment(&BiasConfig {
                reps: 0,
                ..Default::default()
            }),
            Err(BenchError::InvalidConfig(_))
        ));
        assert!(matches!(
            robustness_experiment(&RobustConfig {
                n: 50,
                ..Default::default()
            }),
            Err(BenchError::InvalidConfig(_))
        ));
    }
}
