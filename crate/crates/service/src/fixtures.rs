//! Datasets that ship with the service so that models can be registered
//! without uploading data.

use mode_core::dataset::{binarize_by_median, DataTable};
use mode_core::scm::{make_g1, make_g2, make_wine, Scm};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Fixture {
    pub id: &'static str,
    pub description: &'static str,
    pub rows: usize,
    pub outcome: &'static str,
}

struct Spec {
    fixture: Fixture,
    scm: fn() -> Scm,
    seed: u64,
    binary_outcome: bool,
}

fn specs() -> Vec<Spec> {
    let spec = |id, description, rows, scm: fn() -> Scm, seed, binary_outcome| Spec {
        fixture: Fixture {
            id,
            description,
            rows,
            outcome: "Y",
        },
        scm,
        seed,
        binary_outcome,
    };
    vec![
        spec("g1-2k", "G1, five binary features, continuous Y", 2_000, make_g1, 101, false),
        spec("g1-10k", "G1, five binary features, continuous Y", 10_000, make_g1, 102, false),
        spec("g1-binary-10k", "G1 with Y split at its median", 10_000, make_g1, 103, true),
        spec("g2-10k", "G2, five binary features, continuous Y", 10_000, make_g2, 104, false),
        spec("wine0-10k", "wine model, environment 0", 10_000, || make_wine(0), 105, false),
        spec("wine1-10k", "wine model, environment 1", 10_000, || make_wine(1), 106, false),
    ]
}

pub fn list() -> Vec<Fixture> {
    specs().into_iter().map(|s| s.fixture).collect()
}

/// The fixture table, generated deterministically.
pub fn table(id: &str) -> Option<DataTable> {
    let s = specs().into_iter().find(|s| s.fixture.id == id)?;
    let t = (s.scm)().sample(s.fixture.rows, s.seed);
    Some(if s.binary_outcome {
        binarize_by_median(&t, &["Y"]).expect("Y is continuous")
    } else {
        t
    })
}
