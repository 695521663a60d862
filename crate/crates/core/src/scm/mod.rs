//! Structural causal models: representation, sampling, do-interventions
//! and graph queries.
//!
//! Nodes are listed in topological order (every parent is declared before
//! its children). Each node draws from its own ChaCha8 stream, one uniform
//! per row, so intervening on one node leaves the noise of every other node
//! untouched. Effects computed from paired samples therefore use common
//! random numbers.

mod generators;
mod graph;
mod oracle;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citest::{CiError, CiMethod, CiResult};
use crate::dataset::{Column, ColumnKind, DataTable};
use crate::discovery::IndependenceOracle;
use crate::rng::{rng_stream, uniform_open};
use crate::special::{normal_quantile, sigmoid};

pub use generators::{make_confounded_pair, make_mediated_pair, make_g1, make_g2, make_wine};
pub use graph::Dag;
pub use oracle::{
    exact_joint, interventional_expectation, interventional_mean, interventional_prob,
    total_variation, true_cate, true_cde, truncated_factorization, Effect, Joint, McEstimate,
    Target,
};

pub const SCM_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScmError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("invalid intervention on `{node}`: {reason}")]
    InvalidIntervention { node: String, reason: String },
    #[error("no sampled row matches the conditioning event")]
    EmptySupport,
    #[error("context is missing observed feature `{0}`")]
    MissingContext(String),
    #[error("node `{0}` is not binary; exact enumeration needs an all-binary model")]
    NotDiscrete(String),
    #[error("model file schema version {found} is newer than supported version {supported}")]
    SchemaVersionMismatch { found: u32, supported: u32 },
    #[error("malformed model file: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ScmError>;

/// A product of parent values with a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<String>,
}

impl Term {
    pub fn new(coefficient: f64, factors: &[&str]) -> Self {
        Self {
            coefficient,
            factors: factors.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mechanism {
    /// intercept + Σ coefficient·parent + noise_sd·N(0,1)
    LinearGaussian {
        intercept: f64,
        coefficients: Vec<f64>,
        noise_sd: f64,
    },
    /// Bernoulli(sigmoid(intercept + Σ coefficient·Π factors))
    LogisticBernoulli { intercept: f64, terms: Vec<Term> },
    BernoulliConst { p: f64 },
    GaussianConst { mean: f64, sd: f64 },
}

impl Mechanism {
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            Mechanism::LogisticBernoulli { .. } | Mechanism::BernoulliConst { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub mechanism: Mechanism,
    #[serde(default = "default_observed")]
    pub observed: bool,
}

fn default_observed() -> bool {
    true
}

impl Node {
    pub fn new(name: &str, parents: &[&str], mechanism: Mechanism, observed: bool) -> Self {
        Self {
            name: name.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            mechanism,
            observed,
        }
    }
}

/// Fixed values for a set of nodes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterventionSpec(pub BTreeMap<String, f64>);

impl InterventionSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: &str, value: f64) -> Self {
        self.0.insert(node.to_string(), value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// Logistic term with factors resolved to node indices.
#[derive(Debug, Clone, PartialEq)]
struct CompiledTerm {
    coefficient: f64,
    factors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    nodes: Vec<Node>,
    outcome: String,
    index: HashMap<String, usize>,
    parent_idx: Vec<Vec<usize>>,
    terms: Vec<Vec<CompiledTerm>>,
}

#[derive(Serialize, Deserialize)]
struct ScmFile {
    schema_version: u32,
    outcome: String,
    nodes: Vec<Node>,
}

impl Scm {
    pub fn new(nodes: Vec<Node>, outcome: impl Into<String>) -> Result<Self> {
        let outcome = outcome.into();
        let invalid = |m: String| Err(ScmError::Invalid(m));
        let mut index = HashMap::new();
        let mut parent_idx = Vec::with_capacity(nodes.len());
        let mut terms = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let mut pidx = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                match index.get(p) {
                    Some(&j) if !pidx.contains(&j) => pidx.push(j),
                    Some(_) => return invalid(format!("`{}` lists parent `{p}` twice", node.name)),
                    None => {
                        return invalid(format!(
                            "parent `{p}` of `{}` must be declared before it",
                            node.name
                        ))
                    }
                }
            }
            let mut compiled = Vec::new();
            match &node.mechanism {
                Mechanism::LinearGaussian {
                    intercept,
                    coefficients,
                    noise_sd,
                } => {
                    if coefficients.len() != pidx.len() {
                        return invalid(format!(
                            "`{}` has {} coefficients for {} parents",
                            node.name,
                            coefficients.len(),
                            pidx.len()
                        ));
                    }
                    if !(*noise_sd >= 0.0 && noise_sd.is_finite())
                        || !intercept.is_finite()
                        || coefficients.iter().any(|c| !c.is_finite())
                    {
                        return invalid(format!("`{}` has non-finite or negative parameters", node.name));
                    }
                }
                Mechanism::LogisticBernoulli { intercept, terms } => {
                    if !intercept.is_finite() {
                        return invalid(format!("`{}` has a non-finite intercept", node.name));
                    }
                    for t in terms {
                        if !t.coefficient.is_finite() {
                            return invalid(format!("`{}` has a non-finite coefficient", node.name));
                        }
                        let mut f = Vec::with_capacity(t.factors.len());
                        for name in &t.factors {
                            match index.get(name) {
                                Some(&j) if pidx.contains(&j) => f.push(j),
                                _ => {
                                    return invalid(format!(
                                        "term factor `{name}` of `{}` is not one of its parents",
                                        node.name
                                    ))
                                }
                            }
                        }
                        compiled.push(CompiledTerm {
                            coefficient: t.coefficient,
                            factors: f,
                        });
                    }
                }
                Mechanism::BernoulliConst { p } => {
                    if !(0.0..=1.0).contains(p) {
                        return invalid(format!("`{}` has probability {p} outside [0, 1]", node.name));
                    }
                }
                Mechanism::GaussianConst { mean, sd } => {
                    if !mean.is_finite() || !(*sd >= 0.0 && sd.is_finite()) {
                        return invalid(format!("`{}` has invalid mean or sd", node.name));
                    }
                }
            }
            if index.insert(node.name.clone(), i).is_some() {
                return invalid(format!("duplicate node `{}`", node.name));
            }
            parent_idx.push(pidx);
            terms.push(compiled);
        }
        match index.get(&outcome) {
            Some(&i) if nodes[i].observed => {}
            Some(_) => return invalid(format!("outcome `{outcome}` must be observed")),
            None => return Err(ScmError::UnknownNode(outcome)),
        }
        Ok(Self {
            nodes,
            outcome,
            index,
            parent_idx,
            terms,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    pub fn node(&self, name: &str) -> Result<&Node> {
        self.node_index(name).map(|i| &self.nodes[i])
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ScmError::UnknownNode(name.to_string()))
    }

    /// Observed node names in declaration order, outcome included.
    pub fn observed_names(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.observed)
            .map(|n| n.name.as_str())
            .collect()
    }

    /// Observed non-outcome nodes.
    pub fn feature_names(&self) -> Vec<&str> {
        self.observed_names()
            .into_iter()
            .filter(|n| *n != self.outcome)
            .collect()
    }

    pub fn parents_of(&self, name: &str) -> Result<&[String]> {
        Ok(&self.node(name)?.parents)
    }

    pub fn dag(&self) -> Dag {
        Dag::from_parents(self.parent_idx.clone()).expect("declaration order is topological")
    }

    /// `x ⟂ y | s` in the causal graph.
    pub fn d_separated(&self, x: &str, y: &str, s: &[&str]) -> Result<bool> {
        let xi = self.node_index(x)?;
        let yi = self.node_index(y)?;
        let si = s
            .iter()
            .map(|n| self.node_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.dag().d_separated(xi, yi, &si))
    }

    /// Replaces the mechanism of every intervened node by a constant and
    /// drops its parents.
    pub fn mutilate(&self, spec: &InterventionSpec) -> Result<Scm> {
        let mut nodes = self.nodes.clone();
        for (name, v) in spec.iter() {
            let i = self.node_index(name)?;
            let node = &mut nodes[i];
            let bad = |reason: &str| ScmError::InvalidIntervention {
                node: name.to_string(),
                reason: reason.to_string(),
            };
            if !v.is_finite() {
                return Err(bad("value must be finite"));
            }
            node.mechanism = if node.mechanism.is_binary() {
                if v != 0.0 && v != 1.0 {
                    return Err(bad("binary node takes 0 or 1"));
                }
                Mechanism::BernoulliConst { p: v }
            } else {
                Mechanism::GaussianConst { mean: v, sd: 0.0 }
            };
            node.parents.clear();
        }
        // Children may refer to an intervened node; order is unchanged so
        // validation still holds.
        Scm::new(nodes, self.outcome.clone())
    }

    /// Ancestral sample of every node; `out[node][row]`.
    pub fn sample_nodes(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let mut rng = rng_stream(seed, i as u64);
            let col: Vec<f64> = match &node.mechanism {
                Mechanism::BernoulliConst { p } => {
                    // p of exactly 0 or 1 needs no draw.
                    if *p == 0.0 || *p == 1.0 {
                        vec![*p; n]
                    } else {
                        (0..n)
                            .map(|_| f64::from(u8::from(uniform_open(&mut rng) < *p)))
                            .collect()
                    }
                }
                Mechanism::GaussianConst { mean, sd } => {
                    if *sd == 0.0 {
                        vec![*mean; n]
                    } else {
                        (0..n)
                            .map(|_| mean + sd * normal_quantile(uniform_open(&mut rng)))
                            .collect()
                    }
                }
                Mechanism::LinearGaussian {
                    intercept,
                    coefficients,
                    noise_sd,
                } => {
                    let pidx = &self.parent_idx[i];
                    (0..n)
                        .map(|r| {
                            let mut v = *intercept;
                            for (c, &p) in coefficients.iter().zip(pidx) {
                                v += c * out[p][r];
                            }
                            let e = normal_quantile(uniform_open(&mut rng));
                            v + noise_sd * e
                        })
                        .collect()
                }
                Mechanism::LogisticBernoulli { intercept, .. } => {
                    let terms = &self.terms[i];
                    (0..n)
                        .map(|r| {
                            let mut s = *intercept;
                            for t in terms {
                                s += t.coefficient * t.factors.iter().map(|&f| out[f][r]).product::<f64>();
                            }
                            f64::from(u8::from(uniform_open(&mut rng) < sigmoid(s)))
                        })
                        .collect()
                }
            };
            out.push(col);
        }
        out
    }

    /// Samples `n` rows and returns the observed columns.
    pub fn sample(&self, n: usize, seed: u64) -> DataTable {
        assert!(n >= 1, "sample size must be positive");
        let all = self.sample_nodes(n, seed);
        let columns = self
            .nodes
            .iter()
            .zip(all)
            .filter(|(node, _)| node.observed)
            .map(|(node, values)| {
                let kind = if node.mechanism.is_binary() {
                    ColumnKind::Binary
                } else {
                    ColumnKind::Continuous
                };
                Column::new(node.name.clone(), kind, values).expect("sampled values fit their kind")
            })
            .collect();
        DataTable::new(columns, self.outcome.clone()).expect("sampled table is well formed")
    }

    /// Probability that binary node `i` is 1 given already assigned values.
    fn bernoulli_p(&self, i: usize, values: &[f64]) -> Option<f64> {
        match &self.nodes[i].mechanism {
            Mechanism::BernoulliConst { p } => Some(*p),
            Mechanism::LogisticBernoulli { intercept, .. } => {
                let mut s = *intercept;
                for t in &self.terms[i] {
                    s += t.coefficient * t.factors.iter().map(|&f| values[f]).product::<f64>();
                }
                Some(sigmoid(s))
            }
            _ => None,
        }
    }

    /// Mean of the outcome mechanism given parent values, for linear nodes.
    fn linear_mean(&self, i: usize, values: &[f64]) -> Option<(f64, f64)> {
        match &self.nodes[i].mechanism {
            Mechanism::LinearGaussian {
                intercept,
                coefficients,
                noise_sd,
            } => {
                let m = intercept
                    + coefficients
                        .iter()
                        .zip(&self.parent_idx[i])
                        .map(|(c, &p)| c * values[p])
                        .sum::<f64>();
                Some((m, *noise_sd))
            }
            Mechanism::GaussianConst { mean, sd } => Some((*mean, *sd)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        let file = ScmFile {
            schema_version: SCM_SCHEMA_VERSION,
            outcome: self.outcome.clone(),
            nodes: self.nodes.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ScmError::Corrupt(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| ScmError::Corrupt("missing schema_version".into()))?;
        if version > u64::from(SCM_SCHEMA_VERSION) {
            return Err(ScmError::SchemaVersionMismatch {
                found: version as u32,
                supported: SCM_SCHEMA_VERSION,
            });
        }
        let file: ScmFile =
            serde_json::from_value(value).map_err(|e| ScmError::Corrupt(e.to_string()))?;
        Scm::new(file.nodes, file.outcome)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Exact independence answers read off the graph of an SCM.
pub struct DSeparationOracle<'a> {
    pub scm: &'a Scm,
}

impl IndependenceOracle for DSeparationOracle<'_> {
    fn test(&self, x: &str, y: &str, s: &[&str]) -> std::result::Result<CiResult, CiError> {
        let independent = self
            .scm
            .d_separated(x, y, s)
            .map_err(|e| CiError::UnknownColumn(e.to_string()))?;
        Ok(CiResult {
            statistic: if independent { 0.0 } else { 1.0 },
            dof: 0,
            p_value: if independent { 1.0 } else { 0.0 },
            independent,
            degenerate: false,
            method: CiMethod::DSeparation,
        })
    }
}
