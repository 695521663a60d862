//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, RngCore};

/// Random DAG on `n` nodes: node i may have parents among 0..i.
pub fn random_dag(rng: &mut impl RngCore, n: usize, edge_p: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| (0..i).filter(|_| rng.random_bool(edge_p)).collect())
        .collect()
}

fn descendants(parents: &[Vec<usize>], v: usize) -> Vec<bool> {
    let n = parents.len();
    let mut out = vec![false; n];
    out[v] = true;
    // nodes are topologically numbered in random_dag, but do not rely on it
    let mut changed = true;
    while changed {
        changed = false;
        for c in 0..n {
            if !out[c] && parents[c].iter().any(|&p| out[p]) {
                out[c] = true;
                changed = true;
            }
        }
    }
    out
}

/// d-separation by enumerating every simple path between `x` and `y`.
pub fn dsep_by_paths(parents: &[Vec<usize>], x: usize, y: usize, s: &[usize]) -> bool {
    let n = parents.len();
    let edge = |a: usize, b: usize| parents[b].contains(&a); // a -> b
    let adjacent = |a: usize, b: usize| edge(a, b) || edge(b, a);
    let in_s = |v: usize| s.contains(&v);
    let desc: Vec<Vec<bool>> = (0..n).map(|v| descendants(parents, v)).collect();
    let open = |path: &[usize]| {
        path.windows(3).all(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let collider = edge(a, b) && edge(c, b);
            if collider {
                (0..n).any(|d| desc[b][d] && in_s(d))
            } else {
                !in_s(b)
            }
        })
    };
    let mut path = vec![x];
    let mut on_path = vec![false; n];
    on_path[x] = true;
    fn walk(
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        y: usize,
        n: usize,
        adjacent: &dyn Fn(usize, usize) -> bool,
        open: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if last == y {
            return open(path);
        }
        for next in 0..n {
            if !on_path[next] && adjacent(last, next) {
                path.push(next);
                on_path[next] = true;
                let found = walk(path, on_path, y, n, adjacent, open);
                path.pop();
                on_path[next] = false;
                if found {
                    return true;
                }
            }
        }
        false
    }
    !walk(&mut path, &mut on_path, y, n, &adjacent, &open)
}

fn ln_gamma_half(k: usize) -> f64 {
    // Γ(k/2) from Γ(1) = 1 and Γ(1/2) = √π by Γ(a+1) = aΓ(a)
    let (mut a, mut acc) = if k % 2 == 0 {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while a < k as f64 / 2.0 - 1e-9 {
        acc += a.ln();
        a += 1.0;
    }
    acc
}

/// P(χ²_k > x) by composite Simpson integration of the density.
pub fn chi_square_tail_quadrature(x: f64, k: usize) -> f64 {
    let half = k as f64 / 2.0;
    let norm = half * 2f64.ln() + ln_gamma_half(k);
    let density = |t: f64| ((half - 1.0) * t.ln() - t / 2.0 - norm).exp();
    let upper = x + 200.0 + 10.0 * k as f64;
    let steps = 400_000usize;
    let h = (upper - x) / steps as f64;
    let mut sum = density(x) + density(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * density(x + i as f64 * h);
    }
    sum * h / 3.0
}

/// Central finite-difference gradient.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let mut up = w.to_vec();
            let mut down = w.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// A small all-binary logistic network described independently of the
/// library types.
#[derive(Debug, Clone)]
pub struct BinaryNet {
    pub parents: Vec<Vec<usize>>,
    pub intercepts: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl BinaryNet {
    pub fn random(rng: &mut impl RngCore, n: usize) -> Self {
        let parents = random_dag(rng, n, 0.5);
        let intercepts = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let weights = parents
            .iter()
            .map(|ps| ps.iter().map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        Self {
            parents,
            intercepts,
            weights,
        }
    }

    /// Joint probability of every assignment (bit i = node i) with the
    /// nodes in `fixed` set by intervention.
    pub fn joint(&self, fixed: &[(usize, f64)]) -> Vec<f64> {
        let n = self.parents.len();
        (0..1usize << n)
            .map(|a| {
                let bit = |i: usize| ((a >> i) & 1) as f64;
                (0..n)
                    .map(|i| {
                        if let Some((_, v)) = fixed.iter().find(|(j, _)| *j == i) {
                            return if bit(i) == *v { 1.0 } else { 0.0 };
                        }
                        let s = self.intercepts[i]
                            + self.parents[i]
                                .iter()
                                .zip(&self.weights[i])
                                .map(|(&p, w)| w * bit(p))
                                .sum::<f64>();
                        let p = 1.0 / (1.0 + (-s).exp());
                        if bit(i) == 1.0 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            })
            .collect()
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}
