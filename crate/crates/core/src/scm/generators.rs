//! Synthetic models used by the experiments.

use super::{Mechanism, Node, Scm, Term};

fn std_normal() -> Mechanism {
    Mechanism::GaussianConst { mean: 0.0, sd: 1.0 }
}

fn sigmoid_of(factors: &[&str]) -> Mechanism {
    Mechanism::LogisticBernoulli {
        intercept: 0.0,
        terms: vec![Term::new(1.0, factors)],
    }
}

fn g_outcome() -> Node {
    Node::new(
        "Y",
        &["X1", "X2", "X3", "X4"],
        Mechanism::LinearGaussian {
            intercept: 1.0,
            coefficients: vec![1.5; 4],
            noise_sd: 1.0,
        },
        true,
    )
}

/// U drives five binary features; Y = 1 + 1.5(X1+X2+X3+X4) + e.
pub fn make_g1() -> Scm {
    let mut nodes = vec![Node::new("U", &[], std_normal(), false)];
    for x in ["X1", "X2", "X3", "X4", "X5"] {
        nodes.push(Node::new(x, &["U"], sigmoid_of(&["U"]), true));
    }
    nodes.push(g_outcome());
    Scm::new(nodes, "Y").expect("valid model")
}

/// G1 with X2 ~ sigmoid(U·X1) and X3 ~ sigmoid(U·X2·X4).
pub fn make_g2() -> Scm {
    let nodes = vec![
        Node::new("U", &[], std_normal(), false),
        Node::new("X1", &["U"], sigmoid_of(&["U"]), true),
        Node::new("X2", &["U", "X1"], sigmoid_of(&["U", "X1"]), true),
        Node::new("X4", &["U"], sigmoid_of(&["U"]), true),
        Node::new("X3", &["U", "X2", "X4"], sigmoid_of(&["U", "X2", "X4"]), true),
        Node::new("X5", &["U"], sigmoid_of(&["U"]), true),
        g_outcome(),
    ];
    Scm::new(nodes, "Y").expect("valid model")
}

/// Three binary causes of Y and a child P of Y whose level depends on the
/// environment flag U2 (fixed to `env`).
pub fn make_wine(env: u8) -> Scm {
    assert!(env <= 1, "environment is 0 or 1");
    let mut nodes = vec![
        Node::new("U1", &[], std_normal(), false),
        Node::new("U2", &[], Mechanism::BernoulliConst { p: f64::from(env) }, false),
    ];
    for x in ["X1", "X2", "X3"] {
        nodes.push(Node::new(x, &["U1"], sigmoid_of(&["U1"]), true));
    }
    nodes.push(Node::new(
        "Y",
        &["X1", "X2", "X3"],
        Mechanism::LinearGaussian {
            intercept: 1.0,
            coefficients: vec![10.0; 3],
            noise_sd: 1.0,
        },
        true,
    ));
    nodes.push(Node::new(
        "P",
        &["Y", "U2"],
        Mechanism::LinearGaussian {
            intercept: 1.0,
            coefficients: vec![0.8, 2.0],
            noise_sd: 1.0,
        },
        true,
    ));
    Scm::new(nodes, "Y").expect("valid model")
}

fn pair_outcome() -> Node {
    Node::new(
        "Y",
        &["X1", "X2"],
        Mechanism::LogisticBernoulli {
            intercept: -1.0,
            terms: vec![Term::new(1.5, &["X1"]), Term::new(1.0, &["X2"])],
        },
        true,
    )
}

// Both pairs below have P(X1=1) = P(X2=1) = 1/2 and
// P(X1=1 | X2=x) = P(X2=1 | X1=x) = sigmoid(2x - 1), so the joints match.

/// X2 confounds X1 and Y: X2 → X1, X2 → Y, X1 → Y.
pub fn make_confounded_pair() -> Scm {
    let nodes = vec![
        Node::new("X2", &[], Mechanism::BernoulliConst { p: 0.5 }, true),
        Node::new(
            "X1",
            &["X2"],
            Mechanism::LogisticBernoulli {
                intercept: -1.0,
                terms: vec![Term::new(2.0, &["X2"])],
            },
            true,
        ),
        pair_outcome(),
    ];
    Scm::new(nodes, "Y").expect("valid model")
}

/// X2 mediates X1: X1 → X2, X1 → Y, X2 → Y.
pub fn make_mediated_pair() -> Scm {
    let nodes = vec![
        Node::new("X1", &[], Mechanism::BernoulliConst { p: 0.5 }, true),
        Node::new(
            "X2",
            &["X1"],
            Mechanism::LogisticBernoulli {
                intercept: -1.0,
                terms: vec![Term::new(2.0, &["X1"])],
            },
            true,
        ),
        pair_outcome(),
    ];
    Scm::new(nodes, "Y").expect("valid model")
}
