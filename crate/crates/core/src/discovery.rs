//! Local discovery of the parents of the outcome.
//!
//! The search is PC-Select flavoured: a marginal screen keeps the features
//! that are dependent on Y, then backward elimination drops any candidate
//! that some small subset of the other candidates separates from Y. A last
//! pass tests each survivor given all other survivors, which covers parent
//! sets larger than `max_cond`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citest::{ci_test, CiError, CiResult};
use crate::dataset::DataTable;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MAX_COND: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error("the table has no feature columns")]
    EmptyFeatureSet,
    #[error("significance level {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Ci(#[from] CiError),
}

/// Anything that can answer `x ⟂ y | s`.
pub trait IndependenceOracle {
    fn test(&self, x: &str, y: &str, s: &[&str]) -> Result<CiResult, CiError>;
}

/// Statistical tests on a data table at a fixed significance level.
pub struct DataOracle<'a> {
    pub table: &'a DataTable,
    pub alpha: f64,
}

impl IndependenceOracle for DataOracle<'_> {
    fn test(&self, x: &str, y: &str, s: &[&str]) -> Result<CiResult, CiError> {
        ci_test(self.table, x, y, s, self.alpha)
    }
}

/// One executed independence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub feature: String,
    pub conditioning: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentSet {
    pub outcome: String,
    /// In feature order of the input.
    pub parents: Vec<String>,
    pub trace: Vec<TraceRecord>,
}

impl ParentSet {
    pub fn contains(&self, name: &str) -> bool {
        self.parents.iter().any(|p| p == name)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Number of CI tests run.
    pub fn n_tests(&self) -> usize {
        self.trace.len()
    }
}

/// Finds PA(Y) for the outcome of `table` using G / Fisher-z tests.
pub fn find_parents(
    table: &DataTable,
    alpha: f64,
    max_cond: usize,
) -> Result<ParentSet, DiscoveryError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DiscoveryError::InvalidAlpha(alpha));
    }
    let features = table.feature_names();
    let oracle = DataOracle { table, alpha };
    find_parents_with(&oracle, &features, table.outcome(), max_cond)
}

/// The search itself, against any independence oracle.
pub fn find_parents_with<O: IndependenceOracle + ?Sized>(
    oracle: &O,
    features: &[&str],
    outcome: &str,
    max_cond: usize,
) -> Result<ParentSet, DiscoveryError> {
    if features.is_empty() {
        return Err(DiscoveryError::EmptyFeatureSet);
    }
    let mut trace = Vec::new();
    let run = |feature: usize, cond: &[usize], trace: &mut Vec<TraceRecord>| {
        let s: Vec<&str> = cond.iter().map(|&j| features[j]).collect();
        let r = oracle.test(features[feature], outcome, &s)?;
        trace.push(TraceRecord {
            feature: features[feature].to_string(),
            conditioning: s.iter().map(|v| v.to_string()).collect(),
            statistic: r.statistic,
            p_value: r.p_value,
            independent: r.independent,
        });
        Ok::<bool, CiError>(r.independent)
    };

    // Marginal screen.
    let mut marginal = Vec::new();
    for i in 0..features.len() {
        let independent = run(i, &[], &mut trace)?;
        if !independent {
            marginal.push((i, trace.last().map(|t| t.statistic).unwrap_or(0.0)));
        }
    }
    marginal.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut alive: Vec<usize> = marginal.into_iter().map(|(i, _)| i).collect();

    // Backward elimination over small conditioning sets.
    let mut tested: HashSet<(usize, Vec<usize>)> = HashSet::new();
    loop {
        let mut changed = false;
        for size in 1..=max_cond {
            let mut pos = 0;
            while pos < alive.len() {
                let c = alive[pos];
                let others: Vec<usize> = alive.iter().copied().filter(|&j| j != c).collect();
                if others.len() < size {
                    pos += 1;
                    continue;
                }
                let mut removed = false;
                for subset in Combinations::new(others.len(), size) {
                    let mut cond: Vec<usize> = subset.iter().map(|&k| others[k]).collect();
                    let key = {
                        let mut k = cond.clone();
                        k.sort_unstable();
                        (c, k)
                    };
                    if !tested.insert(key) {
                        continue;
                    }
                    cond.sort_by_key(|j| alive.iter().position(|a| a == j));
                    if run(c, &cond, &mut trace)? {
                        removed = true;
                        break;
                    }
                }
                if removed {
                    alive.remove(pos);
                    changed = true;
                } else {
                    pos += 1;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Survivors tested against all other survivors when that set exceeds
    // the subset bound.
    let mut pos = 0;
    while pos < alive.len() {
        let c = alive[pos];
        let others: Vec<usize> = alive.iter().copied().filter(|&j| j != c).collect();
        if others.len() > max_cond && run(c, &others, &mut trace)? {
            alive.remove(pos);
        } else {
            pos += 1;
        }
    }

    alive.sort_unstable();
    Ok(ParentSet {
        outcome: outcome.to_string(),
        parents: alive.into_iter().map(|i| features[i].to_string()).collect(),
        trace,
    })
}

/// Upper bound on the number of CI tests for `m` features.
pub fn max_tests(m: usize, max_cond: usize) -> usize {
    let per: usize = (0..=max_cond.min(m.saturating_sub(1)))
        .map(|j| binomial(m - 1, j))
        .sum();
    m * (per + 1)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// k-subsets of 0..n in lexicographic order.
struct Combinations {
    idx: Vec<usize>,
    n: usize,
    first: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            idx: (0..k).collect(),
            n,
            first: true,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.idx.len();
        if k > self.n {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        None
    }
}

/// Oracle answering from a fixed table of independences, for tests.
#[derive(Debug, Default)]
pub struct TableOracle {
    independences: HashMap<(String, Vec<String>), bool>,
}

impl TableOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, x: &str, s: &[&str], independent: bool) {
        let mut s: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        s.sort();
        self.independences.insert((x.to_string(), s), independent);
    }
}

impl IndependenceOracle for TableOracle {
    fn test(&self, x: &str, _y: &str, s: &[&str]) -> Result<CiResult, CiError> {
        let mut key: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        key.sort();
        let independent = self
            .independences
            .get(&(x.to_string(), key))
            .copied()
            .unwrap_or(false);
        Ok(CiResult {
            statistic: if independent { 0.0 } else { 1.0 },
            dof: 0,
            p_value: if independent { 1.0 } else { 0.0 },
            independent,
            degenerate: false,
            method: crate::citest::CiMethod::DSeparation,
        })
    }
}
