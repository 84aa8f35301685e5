#![allow(dead_code)]

use std::collections::BTreeMap;

use archprob::arch::{
    AnnotatedArchitecture, Component, ComponentKind, CptSpec, Edge, UncertaintyAnnotation,
    UncertaintyKind,
};
use archprob::bn::{row_keys, BayesianNetwork, Cpt, Evidence, State, Variable, VariableKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn examples_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn example(name: &str) -> String {
    std::fs::read_to_string(examples_dir().join(name)).unwrap()
}

fn p(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.01..0.99),
    }
}

fn rows(rng: &mut impl Rng, n_parents: usize) -> BTreeMap<String, f64> {
    row_keys(n_parents)
        .into_iter()
        .map(|k| (k, p(rng)))
        .collect()
}

/// Random DAG over `n` binary variables; parents always precede children in
/// the variable list but declaration order is shuffled.
pub fn random_network(rng: &mut impl Rng, n: usize, max_parents: usize) -> BayesianNetwork {
    let ids: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut variables = Vec::new();
    let mut cpts = Vec::new();
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(rng);
        let k = rng.gen_range(0..=max_parents.min(i));
        let parents: Vec<String> = candidates[..k].iter().map(|&j| ids[j].clone()).collect();
        let kind = if parents.is_empty() {
            *[
                VariableKind::Epistemic,
                VariableKind::Stochastic,
                VariableKind::Component,
            ]
            .choose(rng)
            .unwrap()
        } else {
            VariableKind::Component
        };
        cpts.push(Cpt {
            variable: ids[i].clone(),
            parents: parents.clone(),
            rows: rows(rng, k),
        });
        variables.push(Variable {
            id: ids[i].clone(),
            kind,
            parents,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    BayesianNetwork::new(
        "random",
        order.iter().map(|&i| variables[i].clone()).collect(),
        order.iter().map(|&i| cpts[i].clone()).collect(),
    )
}

/// Up to `max` observed variables other than `target`.
pub fn random_evidence(rng: &mut impl Rng, ids: &[String], target: &str, max: usize) -> Evidence {
    let mut pool: Vec<&String> = ids.iter().filter(|id| *id != target).collect();
    pool.shuffle(rng);
    let k = rng.gen_range(0..=max.min(pool.len()));
    let mut evidence = Evidence::new();
    for id in &pool[..k] {
        let state = if rng.gen_bool(0.5) {
            State::High
        } else {
            State::Low
        };
        evidence.insert(id.as_str(), state).unwrap();
    }
    evidence
}

const ODD_IDS: &[&str] = &[
    "a b",
    "é",
    "quote\"d",
    "back\\slash",
    "tab\tx",
    "ünï",
    "1x",
    "dash-y",
];

fn id(rng: &mut impl Rng, prefix: &str, i: usize) -> String {
    if rng.gen_range(0..6) == 0 {
        format!("{}{prefix}{i}", ODD_IDS.choose(rng).unwrap())
    } else {
        format!("{prefix}{i}")
    }
}

fn label(rng: &mut impl Rng) -> String {
    let pieces = [
        "Object detection",
        "x",
        "",
        "multi\nline",
        "#hash",
        "'single'",
        "\"dq\"",
        "\u{1F697}",
        "\u{7f}",
    ];
    (0..rng.gen_range(1..3))
        .map(|_| *pieces.choose(rng).unwrap())
        .collect()
}

/// Random valid architecture: sensors feed forward, ML components carry a
/// stochastic annotation each and share epistemic annotations at random.
pub fn random_architecture(rng: &mut impl Rng, n: usize) -> AnnotatedArchitecture {
    let mut components = Vec::new();
    for i in 0..n {
        let kind = if i == 0 {
            ComponentKind::Sensor
        } else {
            *[
                ComponentKind::Ml,
                ComponentKind::Ml,
                ComponentKind::Classical,
                ComponentKind::Voter,
                ComponentKind::Sensor,
            ]
            .choose(rng)
            .unwrap()
        };
        components.push(Component::new(id(rng, "C", i), kind, label(rng)));
    }
    let mut edges = Vec::new();
    for to in 1..n {
        if components[to].kind == ComponentKind::Sensor {
            continue;
        }
        for from in 0..to {
            if rng.gen_bool(0.3) {
                edges.push(Edge::new(
                    components[from].id.clone(),
                    components[to].id.clone(),
                ));
            }
        }
    }
    let ml: Vec<String> = components
        .iter()
        .filter(|c| c.kind == ComponentKind::Ml)
        .map(|c| c.id.clone())
        .collect();
    let mut uncertainties = Vec::new();
    for (i, target) in ml.iter().enumerate() {
        if rng.gen_bool(0.8) {
            uncertainties.push(UncertaintyAnnotation {
                id: id(rng, "SU_", i),
                kind: UncertaintyKind::Stochastic,
                attaches_to: vec![target.clone()],
            });
        }
    }
    if !ml.is_empty() {
        for j in 0..rng.gen_range(0..3) {
            let mut targets: Vec<String> =
                ml.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            if targets.is_empty() {
                targets.push(ml[0].clone());
            }
            uncertainties.push(UncertaintyAnnotation {
                id: id(rng, "EU_", j),
                kind: UncertaintyKind::Epistemic,
                attaches_to: targets,
            });
        }
    }
    let mut arch = AnnotatedArchitecture {
        name: format!("random {}", label(rng)),
        components,
        edges,
        uncertainties,
        cpts: BTreeMap::new(),
    };
    for u in arch.uncertainties.clone() {
        arch.cpts.insert(
            u.id,
            CptSpec {
                parents: vec![],
                rows: rows(rng, 0),
            },
        );
    }
    for c in arch.components.clone() {
        if c.kind == ComponentKind::Sensor && rng.gen_bool(0.5) {
            continue;
        }
        let parents = arch.expected_parents(&c.id);
        let r = rows(rng, parents.len());
        arch.cpts.insert(c.id, CptSpec { parents, rows: r });
    }
    arch
}

/// Components reachable from `start` by repeated edge following.
pub fn closure(arch: &AnnotatedArchitecture, start: &str) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    let mut stack = vec![start.to_string()];
    while let Some(v) = stack.pop() {
        for e in arch.edges.iter().filter(|e| e.from == v) {
            if out.insert(e.to.clone()) {
                stack.push(e.to.clone());
            }
        }
    }
    out
}

/// ML components that do not already feed a voter.
pub fn n_version_targets(arch: &AnnotatedArchitecture) -> Vec<String> {
    arch.components
        .iter()
        .filter(|c| c.kind == ComponentKind::Ml)
        .filter(|c| {
            !arch.edges.iter().any(|e| {
                e.from == c.id
                    && arch
                        .component(&e.to)
                        .is_some_and(|t| t.kind == ComponentKind::Voter)
            })
        })
        .map(|c| c.id.clone())
        .collect()
}
