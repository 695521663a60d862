//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.
//! With ACCEPTANCE_STRICT=1 the process exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mode_core::bench::{
    average_cde, bias_experiment, cde_bias, render_bias, render_robust, robustness_experiment,
    write_report, BiasConfig, BiasRow, ReportFormat, RobustConfig, RobustRow, ScmId,
};
use mode_core::discovery::find_parents;
use mode_core::mode::{build_model, BuildOptions, Variant};
use mode_core::models::linear::{fit_logistic, log_loss, log_loss_gradient, LogisticParams};
use mode_core::models::{train, ModelKind, ModelSpec};
use mode_core::rng::derive_seed;
use mode_core::scm::{
    exact_joint, make_confounded_pair, make_mediated_pair, make_g1, make_g2, total_variation,
    true_cde, truncated_factorization, Dag, Joint, InterventionSpec, Mechanism, Node, Scm, Target, Term,
};
use mode_core::special::chi_square_sf;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const REPS: usize = 30;
const PARENTS: [&str; 4] = ["X1", "X2", "X3", "X4"];

fn parent_recovery() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, scm) in [("G1", make_g1()), ("G2", make_g2())] {
        let exact = (0..REPS)
            .filter(|&rep| {
                let t = scm.sample(10_000, derive_seed(1, rep as u64));
                let p = find_parents(&t, 0.05, 3).expect("discovery runs");
                let mut found = p.parents.clone();
                found.sort();
                found == PARENTS
            })
            .count();
        pass &= exact >= 27;
        details.push(format!("{name} exact {exact}/{REPS}"));
    }
    outcome(pass, details.join(", "))
}

fn bias_cell(rows: &[BiasRow], model: &str, n: usize, v: Variant) -> f64 {
    rows.iter()
        .find(|r| r.model == model && r.n == n && r.variant == v)
        .expect("row present")
        .mean_abs_bias
}

fn bias_ordering() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_po = 0.0f64;
    for scm in [ScmId::G1, ScmId::G2] {
        let config = BiasConfig {
            scm,
            seed: 2,
            ..Default::default()
        };
        let rows = bias_experiment(&config).expect("bias experiment runs");
        eprintln!("{:?}\n{}", scm, render_bias(&rows, ReportFormat::Markdown, 1.0));
        for model in ["LR", "DT", "RF"] {
            for &n in &config.sizes {
                let po = bias_cell(&rows, model, n, Variant::ParentsOnly);
                let av = bias_cell(&rows, model, n, Variant::AllVariables);
                if po >= av {
                    failures.push(format!("{scm:?} {model} n={n}: parents {po:.4} >= all {av:.4}"));
                }
            }
            for v in [Variant::ParentsOnly, Variant::AllVariables] {
                let small = bias_cell(&rows, model, 2000, v);
                let large = bias_cell(&rows, model, 20000, v);
                if large >= small {
                    failures.push(format!(
                        "{scm:?} {model} {v}: n=20000 {large:.4} >= n=2000 {small:.4}"
                    ));
                }
            }
            let po = bias_cell(&rows, model, 20000, Variant::ParentsOnly);
            worst_po = worst_po.max(po);
            if po > 0.08 {
                failures.push(format!("{scm:?} {model}: parents bias {po:.4} > 0.08 at n=20000"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("all orderings hold; max parents bias at n=20000 {worst_po:.4}")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn robust_mean(rows: &[RobustRow], model: &str, v: Variant, shifted: bool) -> (f64, f64) {
    let cells: Vec<&RobustRow> = rows
        .iter()
        .filter(|r| r.model == model && r.variant == v && r.env_pair.is_shifted() == shifted)
        .collect();
    let k = cells.len() as f64;
    (
        cells.iter().map(|r| r.mse_mean).sum::<f64>() / k,
        cells.iter().map(|r| r.rmse_mean).sum::<f64>() / k,
    )
}

fn robustness() -> Outcome {
    let config = RobustConfig {
        seed: 3,
        ..Default::default()
    };
    let rows = robustness_experiment(&config).expect("robustness experiment runs");
    eprintln!("{}", render_robust(&rows, ReportFormat::Markdown));
    let mut failures = Vec::new();
    let (same, _) = robust_mean(&rows, "LR", Variant::AllVariables, false);
    let (changed, _) = robust_mean(&rows, "LR", Variant::AllVariables, true);
    if !(0.5..=0.75).contains(&same) {
        failures.push(format!("LR all same-env MSE {same:.3} outside [0.5, 0.75]"));
    }
    if !(1.2..=2.0).contains(&changed) {
        failures.push(format!("LR all changed-env MSE {changed:.3} outside [1.2, 2.0]"));
    }
    let mut ratios = Vec::new();
    for model in ["LR", "DT", "RF"] {
        let (s, _) = robust_mean(&rows, model, Variant::AllVariables, false);
        let (c, _) = robust_mean(&rows, model, Variant::AllVariables, true);
        let (ps, _) = robust_mean(&rows, model, Variant::ParentsOnly, false);
        let (pc, _) = robust_mean(&rows, model, Variant::ParentsOnly, true);
        if c / s < 2.0 {
            failures.push(format!("{model} all ratio {:.3} < 2", c / s));
        }
        if !(0.85..=1.15).contains(&(pc / ps)) {
            failures.push(format!("{model} parents ratio {:.3} outside [0.85, 1.15]", pc / ps));
        }
        ratios.push(format!("{model} {:.2}/{:.2}", c / s, pc / ps));
    }
    let detail = format!(
        "LR all MSE same {same:.3} changed {changed:.3}; ratio all/parents {}{}",
        ratios.join(", "),
        if failures.is_empty() {
            String::new()
        } else {
            format!("; {}", failures.join("; "))
        }
    );
    outcome(failures.is_empty(), detail)
}

/// Conditional means of Y per assignment of `cols`, keyed by bit pattern.
fn context_means(nodes: &[Vec<f64>], cols: &[usize], y: usize) -> Vec<(f64, usize)> {
    let mut sums = vec![(0.0, 0usize); 1 << cols.len()];
    for r in 0..nodes[y].len() {
        let key = cols
            .iter()
            .enumerate()
            .fold(0usize, |k, (b, &c)| k | ((nodes[c][r] as usize) << b));
        sums[key].0 += nodes[y][r];
        sums[key].1 += 1;
    }
    sums.into_iter()
        .map(|(s, n)| (if n > 0 { s / n as f64 } else { f64::NAN }, n))
        .collect()
}

fn exchangeability() -> Outcome {
    let scm = make_g1();
    let n = 1_000_000;
    let idx: Vec<usize> = PARENTS.iter().map(|p| scm.node_index(p).unwrap()).collect();
    let y = scm.node_index("Y").unwrap();
    let observational = context_means(&scm.sample_nodes(n, 4), &idx, y);
    let (mut worst, mut compared, mut assignments) = (0.0f64, 0usize, 0usize);
    for do_mask in 1usize..16 {
        let d: Vec<usize> = (0..4).filter(|b| do_mask >> b & 1 == 1).collect();
        for values in 0usize..1 << d.len() {
            assignments += 1;
            let mut spec = InterventionSpec::new();
            for (k, &b) in d.iter().enumerate() {
                spec = spec.with(PARENTS[b], (values >> k & 1) as f64);
            }
            let m = scm.mutilate(&spec).unwrap();
            let seed = derive_seed(4, (do_mask * 16 + values) as u64);
            let interventional = context_means(&m.sample_nodes(n, seed), &idx, y);
            for key in 0usize..16 {
                let agrees = d
                    .iter()
                    .enumerate()
                    .all(|(k, &b)| (key >> b & 1) == (values >> k & 1));
                if !agrees {
                    continue;
                }
                let (mi, ni) = interventional[key];
                let (mo, no) = observational[key];
                if ni >= 500 && no >= 500 {
                    compared += 1;
                    worst = worst.max((mi - mo).abs());
                }
            }
        }
    }
    outcome(
        worst <= 0.05,
        format!("{assignments} do-assignments, {compared} contexts, max |diff| {worst:.4}"),
    )
}

fn null_effect() -> Outcome {
    let scm = make_g1();
    let mut context = mode_core::dataset::Instance::new();
    for f in ["X1", "X2", "X3", "X4"] {
        context.set(f, 1.0);
    }
    let oracle = true_cde(&scm, "X5", &context, 1.0, 0.0, Target::Mean, 1000, 0).unwrap();
    let mut pass = oracle.exact && oracle.value == 0.0;
    let mut details = vec![format!("oracle {} (exact {})", oracle.value, oracle.exact)];
    for kind in [ModelKind::LinearRegression, ModelKind::DecisionTree, ModelKind::RandomForest] {
        let mut effects: Vec<f64> = (0..REPS)
            .map(|rep| {
                let seed = derive_seed(5, rep as u64);
                let t = scm.sample(20_000, seed);
                let m = train(&ModelSpec::new(kind).with_seed(seed), &t).unwrap();
                cde_bias(&scm, &m, &t, "X5").unwrap()
            })
            .collect();
        let med = median(&mut effects);
        pass &= med <= 0.15;
        details.push(format!("{} median |CDE_X5| {med:.4}", kind.short()));
    }
    outcome(pass, details.join(", "))
}

fn confounder_mediator() -> Outcome {
    let spec = ModelSpec::new(ModelKind::RandomForest);
    let estimates = |scm: &Scm, base: u64| -> Vec<f64> {
        (0..REPS)
            .map(|rep| {
                let seed = derive_seed(base, rep as u64);
                let t = scm.sample(10_000, seed);
                let m = build_model(&t, &spec.clone().with_seed(seed), &BuildOptions::default())
                    .unwrap();
                average_cde(&m, &t, "X1").unwrap()
            })
            .collect()
    };
    let a = estimates(&make_confounded_pair(), 61);
    let b = estimates(&make_mediated_pair(), 62);
    let (ma, sa) = mean_and_sd(&a);
    let (mb, sb) = mean_and_sd(&b);
    let pooled_se = ((sa * sa + sb * sb) / REPS as f64).sqrt();
    let diff = (ma - mb).abs();
    outcome(
        diff <= 2.0 * pooled_se,
        format!("confounder {ma:.4}, mediator {mb:.4}, |diff| {diff:.4}, 2 SE {:.4}", 2.0 * pooled_se),
    )
}

/// `joint` with its index bits reordered to follow `names`.
fn align(joint: &Joint, names: &[String]) -> Joint {
    let pos: Vec<usize> = names
        .iter()
        .map(|n| joint.names.iter().position(|m| m == n).unwrap())
        .collect();
    let mut probs = vec![0.0; joint.probs.len()];
    for (a, p) in probs.iter_mut().enumerate() {
        let src = pos
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &j)| acc | (((a >> i) & 1) << j));
        *p = joint.probs[src];
    }
    Joint {
        names: names.to_vec(),
        probs,
    }
}

fn random_scm(net: &BinaryNet) -> Scm {
    let names: Vec<String> = (0..net.parents.len()).map(|i| format!("V{i}")).collect();
    let nodes = (0..net.parents.len())
        .map(|i| {
            let ps: Vec<&str> = net.parents[i].iter().map(|&p| names[p].as_str()).collect();
            let terms = net.parents[i]
                .iter()
                .zip(&net.weights[i])
                .map(|(&p, &w)| Term::new(w, &[names[p].as_str()]))
                .collect();
            Node::new(
                &names[i],
                &ps,
                Mechanism::LogisticBernoulli {
                    intercept: net.intercepts[i],
                    terms,
                },
                true,
            )
        })
        .collect();
    Scm::new(nodes, names.last().unwrap().clone()).unwrap()
}

fn oracle_suites() -> Outcome {
    let mut failures = Vec::new();

    // byte-identical reports
    let dir = tempfile::tempdir().unwrap();
    let bias = BiasConfig {
        sizes: vec![500],
        reps: 3,
        specs: vec![
            ModelSpec::new(ModelKind::LinearRegression),
            ModelSpec::new(ModelKind::RandomForest).with_trees(10),
        ],
        seed: 7,
        ..Default::default()
    };
    let robust = RobustConfig {
        n: 500,
        reps: 3,
        seed: 7,
        ..Default::default()
    };
    let mut files = Vec::new();
    for run in 0..2 {
        let b = bias_experiment(&bias).unwrap();
        let r = robustness_experiment(&robust).unwrap();
        let mut bytes = Vec::new();
        for (name, text) in [
            ("bias.md", render_bias(&b, ReportFormat::Markdown, 1.0)),
            ("bias.csv", render_bias(&b, ReportFormat::Csv, 1.0)),
            ("robust.md", render_robust(&r, ReportFormat::Markdown)),
            ("robust.csv", render_robust(&r, ReportFormat::Csv)),
        ] {
            let path = dir.path().join(format!("{run}-{name}"));
            write_report(&path, &text).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        files.push(bytes);
    }
    if files[0] != files[1] {
        failures.push("reports differ between runs".to_string());
    }

    // d-separation against path enumeration
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut queries = 0;
    for _ in 0..1000 {
        let n = 2 + (rand::RngCore::next_u32(&mut rng) as usize % 5);
        let parents = random_dag(&mut rng, n, 0.4);
        let dag = Dag::from_parents(parents.clone()).unwrap();
        for x in 0..n {
            for y in x + 1..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0usize..1 << rest.len() {
                    let s: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    queries += 1;
                    if dag.d_separated(x, y, &s) != dsep_by_paths(&parents, x, y, &s) {
                        failures.push(format!("d-separation mismatch {parents:?} {x} {y} {s:?}"));
                    }
                }
            }
        }
    }

    // chi-square tail against quadrature
    let mut chi_err = 0.0f64;
    for k in [1usize, 2, 3, 4, 7, 10, 25] {
        for x in [0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0] {
            chi_err = chi_err.max((chi_square_sf(x, k) - chi_square_tail_quadrature(x, k)).abs());
        }
    }
    if chi_err > 1e-8 {
        failures.push(format!("chi-square tail error {chi_err:e}"));
    }

    // logistic gradient against finite differences at the fitted weights
    let g1 = make_g1();
    let t = g1.sample(2000, 72);
    let y_bin: Vec<f64> = t
        .outcome_column()
        .values()
        .iter()
        .map(|&v| f64::from(u8::from(v > 4.0)))
        .collect();
    let x: Vec<Vec<f64>> = ["X1", "X2", "X3", "X4", "X5"]
        .iter()
        .map(|f| t.column(f).unwrap().values().to_vec())
        .collect();
    let fit = fit_logistic(&x, &y_bin, LogisticParams::default());
    let mut grad_err = 0.0f64;
    let perturbed: Vec<f64> = fit.weights.iter().map(|w| w + 0.1).collect();
    for w in [&fit.weights, &perturbed] {
        let analytic = log_loss_gradient(&x, &y_bin, w, 1e-6);
        let numeric = finite_difference(|v| log_loss(&x, &y_bin, v, 1e-6), w, 1e-5);
        let scale = numeric.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in analytic.iter().zip(&numeric) {
            grad_err = grad_err.max((a - b).abs() / scale);
        }
    }
    if !fit.converged || grad_err > 1e-4 {
        failures.push(format!("logistic gradient error {grad_err:e} (converged {})", fit.converged));
    }

    // truncated factorization against an independent enumeration
    let mut tv_max = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for _ in 0..200 {
        let n = 2 + (rand::RngCore::next_u32(&mut rng) as usize % 5);
        let net = BinaryNet::random(&mut rng, n);
        let scm = random_scm(&net);
        let target = rand::RngCore::next_u32(&mut rng) as usize % n;
        let value = f64::from(rand::RngCore::next_u32(&mut rng) % 2);
        let spec = InterventionSpec::new().with(&format!("V{target}"), value);
        let lib = truncated_factorization(&scm, &spec).unwrap();
        let reference = net.joint(&[(target, value)]);
        let tv = 0.5 * lib.probs.iter().zip(&reference).map(|(a, b)| (a - b).abs()).sum::<f64>();
        tv_max = tv_max.max(tv);
        let observed = exact_joint(&scm).unwrap();
        let tv_obs = 0.5
            * observed
                .probs
                .iter()
                .zip(&net.joint(&[]))
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        tv_max = tv_max.max(tv_obs);
        let mutilated = exact_joint(&scm.mutilate(&spec).unwrap()).unwrap();
        tv_max = tv_max.max(total_variation(&lib, &mutilated));
    }
    let mediator = exact_joint(&make_mediated_pair()).unwrap();
    let confounder = align(&exact_joint(&make_confounded_pair()).unwrap(), &mediator.names);
    let fig = total_variation(&confounder, &mediator);
    tv_max = tv_max.max(fig);
    if tv_max > 1e-12 {
        failures.push(format!("truncated factorization TV {tv_max:e}"));
    }

    let detail = format!(
        "reports identical, {queries} d-separation queries, chi-square err {chi_err:.1e}, \
         gradient err {grad_err:.1e}, TV {tv_max:.1e}"
    );
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            detail
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("parent recovery", parent_recovery),
        ("bias ordering", bias_ordering),
        ("robustness", robustness),
        ("exchangeability", exchangeability),
        ("non-parent null effect", null_effect),
        ("confounder-mediator consistency", confounder_mediator),
        ("determinism and oracles", oracle_suites),
    ];
    let mut passed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if let Some(f) = &filter {
            let selected = match f.parse::<usize>() {
                Ok(k) => k == i + 1,
                Err(_) => name.contains(f.as_str()),
            };
            if !selected {
                continue;
            }
        }
        let start = Instant::now();
        let o = run();
        ran += 1;
        passed += usize::from(o.pass);
        println!(
            "criterion {} ({name}): {} [{:.1}s] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {passed}/{ran} passed");
    // failures are reported above; set ACCEPTANCE_STRICT=1 to turn them into a failing exit code
    if passed < ran && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
