//! Conditional independence tests.
//!
//! Discrete variables use the G (likelihood-ratio) test, stratified over the
//! joint values of the conditioning set. Continuous or mixed variables use
//! Fisher's z transform of the partial correlation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Column, DataTable};
use crate::linalg::{cholesky, cholesky_solve};
use crate::special::{chi_square_sf, normal_two_sided_p};

/// Strata with fewer observations than this are skipped by the G test.
pub const MIN_STRATUM_SIZE: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not discrete")]
    NonDiscreteColumn(String),
    #[error("sample of {n} rows too small for a conditioning set of {cond} variables")]
    SampleTooSmall { n: usize, cond: usize },
    #[error("invalid test arguments: {0}")]
    InvalidArguments(String),
    #[error("significance level {0} outside (0, 1)")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    GTest,
    FisherZ,
    /// Answer read off a known graph rather than data.
    DSeparation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    /// G statistic, or |z| for the Fisher test.
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub independent: bool,
    /// Set when the data cannot inform the test (all strata skipped,
    /// constant or collinear columns). Such tests report independence.
    pub degenerate: bool,
    pub method: CiMethod,
}

impl CiResult {
    fn degenerate(method: CiMethod) -> Self {
        Self {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            independent: true,
            degenerate: true,
            method,
        }
    }
}

struct Args<'a> {
    x: &'a Column,
    y: &'a Column,
    s: Vec<&'a Column>,
    n: usize,
}

fn resolve<'a>(
    table: &'a DataTable,
    x: &str,
    y: &str,
    s: &[&str],
    alpha: f64,
) -> Result<Args<'a>, CiError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CiError::InvalidAlpha(alpha));
    }
    if x == y {
        return Err(CiError::InvalidArguments(format!("`{x}` tested against itself")));
    }
    if s.contains(&x) || s.contains(&y) {
        return Err(CiError::InvalidArguments(
            "tested variables must not be in the conditioning set".into(),
        ));
    }
    let col = |name: &str| {
        table
            .column(name)
            .map_err(|_| CiError::UnknownColumn(name.to_string()))
    };
    // Canonical order so that swapping x and y is bit-identical.
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    Ok(Args {
        x: col(x)?,
        y: col(y)?,
        s: s.iter().map(|n| col(n)).collect::<Result<_, _>>()?,
        n: table.n_rows(),
    })
}

/// G test of `x ⟂ y | s` over discrete columns.
pub fn g_test(
    table: &DataTable,
    x: &str,
    y: &str,
    s: &[&str],
    alpha: f64,
) -> Result<CiResult, CiError> {
    let args = resolve(table, x, y, s, alpha)?;
    for c in std::iter::once(args.x).chain(std::iter::once(args.y)).chain(args.s.iter().copied()) {
        if !c.kind().is_discrete() {
            return Err(CiError::NonDiscreteColumn(c.name().to_string()));
        }
    }
    Ok(g_test_columns(&args, alpha))
}

fn g_test_columns(args: &Args<'_>, alpha: f64) -> CiResult {
    let kx = args.x.kind().cardinality().unwrap_or(2);
    let ky = args.y.kind().cardinality().unwrap_or(2);
    let cells = kx * ky;

    // Stratum id in mixed radix over the conditioning columns.
    let mut strata: HashMap<u64, usize> = HashMap::new();
    let mut counts: Vec<u32> = Vec::new();
    let xs = args.x.values();
    let ys = args.y.values();
    for row in 0..args.n {
        let mut key = 0u64;
        for c in &args.s {
            let k = c.kind().cardinality().unwrap_or(2) as u64;
            key = key * k + c.values()[row] as u64;
        }
        let next = strata.len();
        let slot = *strata.entry(key).or_insert_with(|| {
            counts.extend(std::iter::repeat_n(0, cells));
            next
        });
        counts[slot * cells + xs[row] as usize * ky + ys[row] as usize] += 1;
    }

    // Visit strata in key order so the sum is reproducible.
    let mut order: Vec<(u64, usize)> = strata.into_iter().collect();
    order.sort_unstable();

    let mut g = 0.0;
    let mut dof = 0usize;
    let mut row_tot = vec![0u32; kx];
    let mut col_tot = vec![0u32; ky];
    for (_, slot) in order {
        let table = &counts[slot * cells..(slot + 1) * cells];
        let total: u32 = table.iter().sum();
        if (total as usize) < MIN_STRATUM_SIZE {
            continue;
        }
        row_tot.iter_mut().for_each(|v| *v = 0);
        col_tot.iter_mut().for_each(|v| *v = 0);
        for a in 0..kx {
            for b in 0..ky {
                row_tot[a] += table[a * ky + b];
                col_tot[b] += table[a * ky + b];
            }
        }
        let rx = row_tot.iter().filter(|v| **v > 0).count();
        let ry = col_tot.iter().filter(|v| **v > 0).count();
        let local_dof = rx.saturating_sub(1) * ry.saturating_sub(1);
        if local_dof == 0 {
            continue;
        }
        dof += local_dof;
        let n = f64::from(total);
        for a in 0..kx {
            for b in 0..ky {
                let o = table[a * ky + b];
                if o > 0 {
                    let o = f64::from(o);
                    let e = f64::from(row_tot[a]) * f64::from(col_tot[b]) / n;
                    g += o * (o / e).ln();
                }
            }
        }
    }
    if dof == 0 {
        return CiResult::degenerate(CiMethod::GTest);
    }
    let statistic = (2.0 * g).max(0.0);
    let p_value = chi_square_sf(statistic, dof);
    CiResult {
        statistic,
        dof,
        p_value,
        independent: p_value > alpha,
        degenerate: false,
        method: CiMethod::GTest,
    }
}

/// Fisher-z test of zero partial correlation between `x` and `y` given `s`.
/// Binary and categorical columns enter as their numeric codes.
pub fn fisher_z_test(
    table: &DataTable,
    x: &str,
    y: &str,
    s: &[&str],
    alpha: f64,
) -> Result<CiResult, CiError> {
    let args = resolve(table, x, y, s, alpha)?;
    if args.n <= args.s.len() + 3 {
        return Err(CiError::SampleTooSmall {
            n: args.n,
            cond: args.s.len(),
        });
    }
    Ok(fisher_z_columns(&args, alpha))
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum();
    (c, ss)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fisher_z_columns(args: &Args<'_>, alpha: f64) -> CiResult {
    let (mut rx, ssx) = centered(args.x.values());
    let (mut ry, ssy) = centered(args.y.values());
    if ssx <= 0.0 || ssy <= 0.0 {
        return CiResult::degenerate(CiMethod::FisherZ);
    }
    let k = args.s.len();
    if k > 0 {
        let zs: Vec<Vec<f64>> = args.s.iter().map(|c| centered(c.values()).0).collect();
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&zs[i], &zs[j]);
                gram[i * k + j] = v;
                gram[j * k + i] = v;
            }
        }
        let Some(l) = cholesky(&gram, k, 1e-10) else {
            return CiResult::degenerate(CiMethod::FisherZ);
        };
        for r in [&mut rx, &mut ry] {
            let rhs: Vec<f64> = zs.iter().map(|z| dot(z, r)).collect();
            let beta = cholesky_solve(&l, k, &rhs);
            for (i, v) in r.iter_mut().enumerate() {
                *v -= zs.iter().zip(&beta).map(|(z, b)| z[i] * b).sum::<f64>();
            }
        }
    }
    let sx = dot(&rx, &rx);
    let sy = dot(&ry, &ry);
    // Residual variance vanishing relative to the raw variance means the
    // conditioning set determines the variable.
    if sx <= 1e-12 * ssx || sy <= 1e-12 * ssy {
        return CiResult::degenerate(CiMethod::FisherZ);
    }
    let r = dot(&rx, &ry) / (sx * sy).sqrt();
    let scale = ((args.n - k - 3) as f64).sqrt();
    if r.abs() >= 1.0 - 1e-15 {
        return CiResult {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
            independent: false,
            degenerate: false,
            method: CiMethod::FisherZ,
        };
    }
    let z = (0.5 * ((1.0 + r) / (1.0 - r)).ln() * scale).abs();
    let p_value = normal_two_sided_p(z);
    CiResult {
        statistic: z,
        dof: 0,
        p_value,
        independent: p_value > alpha,
        degenerate: false,
        method: CiMethod::FisherZ,
    }
}

/// Chooses the G test when every involved column is discrete, Fisher-z
/// otherwise.
pub fn ci_test(
    table: &DataTable,
    x: &str,
    y: &str,
    s: &[&str],
    alpha: f64,
) -> Result<CiResult, CiError> {
    let args = resolve(table, x, y, s, alpha)?;
    let all_discrete = args.x.kind().is_discrete()
        && args.y.kind().is_discrete()
        && args.s.iter().all(|c| c.kind().is_discrete());
    if all_discrete {
        Ok(g_test_columns(&args, alpha))
    } else {
        if args.n <= args.s.len() + 3 {
            return Err(CiError::SampleTooSmall {
                n: args.n,
                cond: args.s.len(),
            });
        }
        Ok(fisher_z_columns(&args, alpha))
    }
}
