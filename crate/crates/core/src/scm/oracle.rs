//! Ground-truth effects computed from an SCM: Monte Carlo over mutilated
//! models, closed forms for linear and logistic outcomes, and exact joint
//! enumeration for small all-binary models.

use serde::{Deserialize, Serialize};

use super::{InterventionSpec, Mechanism, Result, Scm, ScmError};
use crate::dataset::Instance;
use crate::special::normal_cdf;

/// Quantity of Y whose expectation is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "threshold", rename_all = "snake_case")]
pub enum Target {
    /// E[Y]; for a binary Y this is P(Y = 1).
    Mean,
    /// P(Y > threshold).
    Exceeds(f64),
}

impl Target {
    fn of(self, y: f64) -> f64 {
        match self {
            Target::Mean => y,
            Target::Exceeds(c) => f64::from(u8::from(y > c)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub value: f64,
    /// Zero for closed-form results.
    pub std_error: f64,
    pub exact: bool,
    pub support: usize,
}

fn mean_and_se(values: impl Iterator<Item = f64>) -> Option<(f64, f64, usize)> {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    if n == 0 {
        return None;
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    Some((mean, (var / n as f64).sqrt(), n))
}

fn condition_mask(scm: &Scm, nodes: &[Vec<f64>], condition: &Instance) -> Result<Vec<bool>> {
    let n = nodes.first().map_or(0, Vec::len);
    let mut mask = vec![true; n];
    for (name, v) in condition.iter() {
        let col = &nodes[scm.node_index(name)?];
        for (m, x) in mask.iter_mut().zip(col) {
            *m &= *x == v;
        }
    }
    Ok(mask)
}

/// E[target(Y) | do(spec), condition] by sampling the mutilated model and
/// keeping rows that match `condition` exactly.
pub fn interventional_expectation(
    scm: &Scm,
    spec: &InterventionSpec,
    condition: &Instance,
    target: Target,
    n_mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    let m = scm.mutilate(spec)?;
    let nodes = m.sample_nodes(n_mc.max(1), seed);
    let mask = condition_mask(&m, &nodes, condition)?;
    let y = &nodes[m.node_index(m.outcome())?];
    let (value, std_error, support) = mean_and_se(
        y.iter()
            .zip(&mask)
            .filter(|(_, keep)| **keep)
            .map(|(v, _)| target.of(*v)),
    )
    .ok_or(ScmError::EmptySupport)?;
    Ok(McEstimate {
        value,
        std_error,
        support,
    })
}

/// P(event(Y) | do(spec), condition).
pub fn interventional_prob(
    scm: &Scm,
    spec: &InterventionSpec,
    condition: &Instance,
    event: impl Fn(f64) -> bool,
    n_mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    let m = scm.mutilate(spec)?;
    let nodes = m.sample_nodes(n_mc.max(1), seed);
    let mask = condition_mask(&m, &nodes, condition)?;
    let y = &nodes[m.node_index(m.outcome())?];
    let (value, std_error, support) = mean_and_se(
        y.iter()
            .zip(&mask)
            .filter(|(_, keep)| **keep)
            .map(|(v, _)| f64::from(u8::from(event(*v)))),
    )
    .ok_or(ScmError::EmptySupport)?;
    Ok(McEstimate {
        value,
        std_error,
        support,
    })
}

/// E[Y | do(spec), condition].
pub fn interventional_mean(
    scm: &Scm,
    spec: &InterventionSpec,
    condition: &Instance,
    n_mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    interventional_expectation(scm, spec, condition, Target::Mean, n_mc, seed)
}

fn check_feature(scm: &Scm, feature: &str) -> Result<usize> {
    let i = scm.node_index(feature)?;
    if !scm.nodes[i].observed || feature == scm.outcome {
        return Err(ScmError::InvalidIntervention {
            node: feature.to_string(),
            reason: "treatment must be an observed feature".into(),
        });
    }
    Ok(i)
}

// Closed form of target(Y) under do(values on `fixed`), when the outcome
// mechanism allows it.
fn closed_form(scm: &Scm, fixed: &[Option<f64>], feature: usize, treated: f64, control: f64, target: Target) -> Option<f64> {
    let yi = scm.index[&scm.outcome];
    let parents = &scm.parent_idx[yi];
    let all_fixed = parents.iter().all(|&p| fixed[p].is_some());
    let at = |v: f64| {
        let mut values: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        values[feature] = v;
        values
    };
    match (&scm.nodes[yi].mechanism, target) {
        (Mechanism::LinearGaussian { coefficients, .. }, Target::Mean) => {
            // Unfixed parents must be unaffected by the treatment.
            let desc = scm.dag().descendants(feature);
            if parents.iter().any(|&p| fixed[p].is_none() && desc[p]) {
                return None;
            }
            Some(
                parents
                    .iter()
                    .position(|&p| p == feature)
                    .map_or(0.0, |k| coefficients[k] * (treated - control)),
            )
        }
        (Mechanism::LinearGaussian { .. }, Target::Exceeds(c)) if all_fixed => {
            let tail = |v: f64| {
                let (m, sd) = scm.linear_mean(yi, &at(v)).expect("linear outcome");
                if sd == 0.0 {
                    f64::from(u8::from(m > c))
                } else {
                    normal_cdf((m - c) / sd)
                }
            };
            Some(tail(treated) - tail(control))
        }
        (Mechanism::LogisticBernoulli { .. }, _) if all_fixed => {
            let prob = |v: f64| {
                let p = scm.bernoulli_p(yi, &at(v)).expect("binary outcome");
                match target {
                    Target::Mean => p,
                    Target::Exceeds(c) if c < 0.0 => 1.0,
                    Target::Exceeds(c) if c < 1.0 => p,
                    Target::Exceeds(_) => 0.0,
                }
            };
            Some(prob(treated) - prob(control))
        }
        _ => None,
    }
}

/// Controlled direct effect of `feature` on Y with every other observed
/// feature held at its `context` value by intervention.
pub fn true_cde(
    scm: &Scm,
    feature: &str,
    context: &Instance,
    treated: f64,
    control: f64,
    target: Target,
    n_mc: usize,
    seed: u64,
) -> Result<Effect> {
    let fi = check_feature(scm, feature)?;
    let mut fixed: Vec<Option<f64>> = vec![None; scm.nodes.len()];
    for (name, v) in context.iter() {
        if name != feature {
            fixed[scm.node_index(name)?] = Some(v);
        }
    }
    for name in scm.feature_names() {
        if name != feature && fixed[scm.index[name]].is_none() {
            return Err(ScmError::MissingContext(name.to_string()));
        }
    }
    fixed[fi] = Some(control);
    // validates values against node kinds
    let base: InterventionSpec = InterventionSpec(
        scm.nodes
            .iter()
            .zip(&fixed)
            .filter_map(|(n, f)| f.map(|v| (n.name.clone(), v)))
            .collect(),
    );
    scm.mutilate(&base.clone().with(feature, treated))?;
    scm.mutilate(&base)?;

    if let Some(value) = closed_form(scm, &fixed, fi, treated, control, target) {
        return Ok(Effect {
            value,
            std_error: 0.0,
            exact: true,
            support: 0,
        });
    }
    let n = n_mc.max(2);
    let treated_nodes = scm.mutilate(&base.clone().with(feature, treated))?.sample_nodes(n, seed);
    let control_nodes = scm.mutilate(&base)?.sample_nodes(n, seed);
    let yi = scm.index[&scm.outcome];
    let (value, std_error, support) = mean_and_se(
        treated_nodes[yi]
            .iter()
            .zip(&control_nodes[yi])
            .map(|(a, b)| target.of(*a) - target.of(*b)),
    )
    .ok_or(ScmError::EmptySupport)?;
    Ok(Effect {
        value,
        std_error,
        exact: false,
        support,
    })
}

/// Conditional average treatment effect: only `feature` is intervened on;
/// `condition` is observed in each interventional world.
pub fn true_cate(
    scm: &Scm,
    feature: &str,
    condition: &Instance,
    treated: f64,
    control: f64,
    target: Target,
    n_mc: usize,
    seed: u64,
) -> Result<Effect> {
    check_feature(scm, feature)?;
    let n = n_mc.max(1);
    let yi = scm.index[&scm.outcome];
    let world = |v: f64| -> Result<(f64, f64, usize)> {
        let m = scm.mutilate(&InterventionSpec::new().with(feature, v))?;
        let nodes = m.sample_nodes(n, seed);
        let mask = condition_mask(&m, &nodes, condition)?;
        mean_and_se(
            nodes[yi]
                .iter()
                .zip(&mask)
                .filter(|(_, k)| **k)
                .map(|(y, _)| target.of(*y)),
        )
        .ok_or(ScmError::EmptySupport)
    };
    let (m1, s1, k1) = world(treated)?;
    let (m0, s0, k0) = world(control)?;
    Ok(Effect {
        value: m1 - m0,
        std_error: (s1 * s1 + s0 * s0).sqrt(),
        exact: false,
        support: k1.min(k0),
    })
}

/// Probability table over all 2^k assignments of an all-binary model.
/// Bit `i` of the index is the value of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub names: Vec<String>,
    pub probs: Vec<f64>,
}

const MAX_ENUMERATED_NODES: usize = 20;

fn binary_nodes(scm: &Scm) -> Result<usize> {
    if let Some(n) = scm.nodes.iter().find(|n| !n.mechanism.is_binary()) {
        return Err(ScmError::NotDiscrete(n.name.clone()));
    }
    let k = scm.nodes.len();
    if k > MAX_ENUMERATED_NODES {
        return Err(ScmError::Invalid(format!("{k} nodes is too many to enumerate")));
    }
    Ok(k)
}

fn enumerate(scm: &Scm, factor: impl Fn(usize, f64, &[f64]) -> f64) -> Joint {
    let k = scm.nodes.len();
    let mut values = vec![0.0; k];
    let probs = (0..1usize << k)
        .map(|a| {
            for (i, v) in values.iter_mut().enumerate() {
                *v = ((a >> i) & 1) as f64;
            }
            (0..k).map(|i| factor(i, values[i], &values)).product()
        })
        .collect();
    Joint {
        names: scm.nodes.iter().map(|n| n.name.clone()).collect(),
        probs,
    }
}

/// Exact joint distribution by the chain rule in declaration order.
pub fn exact_joint(scm: &Scm) -> Result<Joint> {
    binary_nodes(scm)?;
    Ok(enumerate(scm, |i, v, values| {
        let p = scm.bernoulli_p(i, values).expect("binary node");
        if v == 1.0 {
            p
        } else {
            1.0 - p
        }
    }))
}

/// Interventional joint by the truncated factorization: the factors of
/// intervened nodes become indicators of the assigned value.
pub fn truncated_factorization(scm: &Scm, spec: &InterventionSpec) -> Result<Joint> {
    binary_nodes(scm)?;
    let k = scm.nodes.len();
    let mut assigned: Vec<Option<f64>> = vec![None; k];
    for (name, v) in spec.iter() {
        if v != 0.0 && v != 1.0 {
            return Err(ScmError::InvalidIntervention {
                node: name.to_string(),
                reason: "binary node takes 0 or 1".into(),
            });
        }
        assigned[scm.node_index(name)?] = Some(v);
    }
    Ok(enumerate(scm, |i, v, values| match assigned[i] {
        Some(a) => f64::from(u8::from(a == v)),
        None => {
            let p = scm.bernoulli_p(i, values).expect("binary node");
            if v == 1.0 {
                p
            } else {
                1.0 - p
            }
        }
    }))
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(a: &Joint, b: &Joint) -> f64 {
    assert_eq!(a.probs.len(), b.probs.len(), "joints over different supports");
    0.5 * a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
