mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mode_core::citest::ci_test;
use mode_core::dataset::{
    binarize_by_median, lower_median, one_hot_encode, read_csv, split, to_csv_string, Column,
    ColumnKind, DataTable, KindHint, SchemaHint,
};
use mode_core::discovery::{find_parents_with, max_tests};
use mode_core::scm::{Dag, DSeparationOracle, Mechanism, Node, Scm};

use common::{dsep_by_paths, random_dag};

fn table_strategy() -> impl Strategy<Value = DataTable> {
    (2usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..2, n),
            prop::collection::vec(-1e6f64..1e6, n),
            prop::collection::vec(0usize..3, n),
            prop::collection::vec(0u8..2, n),
        )
            .prop_map(|(b, c, g, y)| {
                let levels = ["red", "green", "blue"];
                let labels: Vec<&str> = g.iter().map(|&i| levels[i]).collect();
                DataTable::new(
                    vec![
                        Column::binary("b", b.iter().map(|&v| f64::from(v)).collect()).unwrap(),
                        Column::continuous("c", c).unwrap(),
                        Column::categorical("g", &labels).unwrap(),
                        Column::binary("y", y.iter().map(|&v| f64::from(v)).collect()).unwrap(),
                    ],
                    "y",
                )
                .unwrap()
            })
    })
}

fn hints() -> SchemaHint {
    let mut h = SchemaHint::new();
    h.insert("c".into(), KindHint::Continuous);
    h.insert("b".into(), KindHint::Binary);
    h
}

proptest! {
    #[test]
    fn csv_round_trip(t in table_strategy()) {
        let text = to_csv_string(&t);
        let back = read_csv(text.as_bytes(), "y", &hints()).unwrap();
        prop_assert_eq!(back.n_rows(), t.n_rows());
        for col in t.columns() {
            let other = back.column(col.name()).unwrap();
            prop_assert_eq!(other.values(), col.values());
            if let ColumnKind::Categorical { levels } = col.kind() {
                // levels are re-derived from the data; labels must survive
                let ColumnKind::Categorical { levels: l2 } = other.kind() else {
                    return Err(TestCaseError::fail("categorical column changed kind"));
                };
                for (a, b) in col.values().iter().zip(other.values()) {
                    prop_assert_eq!(&levels[*a as usize], &l2[*b as usize]);
                }
            } else {
                prop_assert_eq!(other.kind(), col.kind());
            }
        }
    }

    #[test]
    fn one_hot_rows_sum_to_one(t in table_strategy()) {
        let e = one_hot_encode(&t).unwrap();
        let dummies: Vec<&Column> =
            e.columns().iter().filter(|c| c.name().starts_with("g.")).collect();
        prop_assert!(!dummies.is_empty());
        for r in 0..e.n_rows() {
            let s: f64 = dummies.iter().map(|c| c.values()[r]).sum();
            prop_assert_eq!(s, 1.0);
        }
        prop_assert!(e.column("g").is_err());
    }

    #[test]
    fn median_split_is_balanced(t in table_strategy()) {
        let b = binarize_by_median(&t, &["c"]).unwrap();
        let m = lower_median(t.column("c").unwrap().values());
        let ones = b.column("c").unwrap().values().iter().filter(|v| **v == 1.0).count();
        let above = t.column("c").unwrap().values().iter().filter(|v| **v > m).count();
        prop_assert_eq!(ones, above);
        prop_assert!(ones <= t.n_rows() / 2);
    }

    #[test]
    fn split_partitions_rows(t in table_strategy(), frac in 0.05f64..0.95, seed in any::<u64>()) {
        let (a, b) = split(&t, frac, seed).unwrap();
        prop_assert_eq!(a.n_rows() + b.n_rows(), t.n_rows());
        prop_assert!(a.n_rows() >= 1 && b.n_rows() >= 1);
        let (a2, _) = split(&t, frac, seed).unwrap();
        prop_assert_eq!(a.column("c").unwrap().values(), a2.column("c").unwrap().values());
        let mut all: Vec<u64> = a.column("c").unwrap().values().iter()
            .chain(b.column("c").unwrap().values())
            .map(|v| v.to_bits())
            .collect();
        let mut orig: Vec<u64> = t.column("c").unwrap().values().iter().map(|v| v.to_bits()).collect();
        all.sort_unstable();
        orig.sort_unstable();
        prop_assert_eq!(all, orig);
    }

    #[test]
    fn ci_test_is_symmetric(t in table_strategy(), cond in any::<bool>()) {
        let s: Vec<&str> = if cond { vec!["g"] } else { vec![] };
        for (x, y) in [("b", "y"), ("c", "y"), ("b", "c")] {
            let a = ci_test(&t, x, y, &s, 0.05);
            let b = ci_test(&t, y, x, &s, 0.05);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn d_separation_matches_paths(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = random_dag(&mut rng, n, 0.4);
        let dag = Dag::from_parents(parents.clone()).unwrap();
        for x in 0..n {
            for y in (x + 1)..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0usize..1 << rest.len() {
                    let s: Vec<usize> = rest.iter().enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v).collect();
                    prop_assert_eq!(dag.d_separated(x, y, &s), dsep_by_paths(&parents, x, y, &s));
                    prop_assert_eq!(dag.d_separated(x, y, &s), dag.d_separated(y, x, &s));
                }
            }
        }
    }

    #[test]
    fn oracle_discovery_finds_exact_parents(seed in any::<u64>(), m in 1usize..6) {
        // m features then the outcome as a sink
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = random_dag(&mut rng, m + 1, 0.45);
        let names: Vec<String> = (0..m).map(|i| format!("V{i}")).chain(["Y".to_string()]).collect();
        let nodes = (0..=m).map(|i| {
            let ps: Vec<&str> = parents[i].iter().map(|&p| names[p].as_str()).collect();
            Node::new(&names[i], &ps, Mechanism::LinearGaussian {
                intercept: 0.0,
                coefficients: vec![1.0; ps.len()],
                noise_sd: 1.0,
            }, true)
        }).collect();
        let scm = Scm::new(nodes, "Y").unwrap();
        let features: Vec<&str> = names[..m].iter().map(String::as_str).collect();
        let found = find_parents_with(&DSeparationOracle { scm: &scm }, &features, "Y", 3).unwrap();
        let truth: Vec<String> = parents[m].iter().map(|&p| names[p].clone()).collect();
        prop_assert_eq!(&found.parents, &truth);
        prop_assert!(found.n_tests() <= max_tests(m, 3));
    }
}
