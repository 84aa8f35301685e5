//! Exact inference: full enumeration and variable elimination.
//!
//! Both routes take a [`CompiledNetwork`], which only exists for networks that
//! passed validation. Enumeration is exponential and is kept as the reference
//! for the elimination path.

use std::collections::BTreeMap;

use super::factor::Factor;
use super::{CompiledNetwork, Evidence, State};
use crate::{Error, Result};

/// Enumeration refuses networks larger than this.
pub const MAX_ENUMERATION_VARIABLES: usize = 25;

/// Posterior over the two states of a variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution {
    pub low: f64,
    pub high: f64,
}

impl Distribution {
    pub fn get(&self, state: State) -> f64 {
        match state {
            State::Low => self.low,
            State::High => self.high,
        }
    }

    fn point(state: State) -> Self {
        match state {
            State::Low => Distribution {
                low: 1.0,
                high: 0.0,
            },
            State::High => Distribution {
                low: 0.0,
                high: 1.0,
            },
        }
    }
}

/// Product of every variable's CPT entry under a full assignment.
pub fn joint_probability(
    net: &CompiledNetwork,
    assignment: &BTreeMap<String, State>,
) -> Result<f64> {
    let missing: Vec<&str> = net
        .ids()
        .iter()
        .filter(|id| !assignment.contains_key(id.as_str()))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = assignment
        .keys()
        .filter(|id| net.index_of(id).is_err())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("assignment must cover every variable exactly once");
        if !missing.is_empty() {
            msg.push_str(&format!("; missing [{}]", missing.join(", ")));
        }
        if !extra.is_empty() {
            msg.push_str(&format!("; unknown [{}]", extra.join(", ")));
        }
        return Err(Error::usage(msg));
    }
    let states: Vec<State> = net.ids().iter().map(|id| assignment[id]).collect();
    Ok(joint_dense(net, &states))
}

fn joint_dense(net: &CompiledNetwork, states: &[State]) -> f64 {
    (0..net.len()).fold(1.0, |acc, v| acc * net.conditional(v, states[v], states))
}

/// `P(target | evidence)` by summing the joint over every consistent full assignment.
pub fn marginal_brute_force(
    net: &CompiledNetwork,
    target: &str,
    evidence: &Evidence,
) -> Result<Distribution> {
    let target = net.index_of(target)?;
    let observed = net.resolve_evidence(evidence)?;
    let n = net.len();
    if n > MAX_ENUMERATION_VARIABLES {
        return Err(Error::usage(format!(
            "enumeration supports at most {MAX_ENUMERATION_VARIABLES} variables, network has {n}"
        )));
    }

    let mut mass = [0.0f64; 2];
    let mut states = vec![State::Low; n];
    'assignments: for bits in 0u64..(1u64 << n) {
        for (v, slot) in states.iter_mut().enumerate() {
            *slot = State::from_index(((bits >> v) & 1) as usize);
        }
        for (v, obs) in observed.iter().enumerate() {
            if matches!(obs, Some(s) if *s != states[v]) {
                continue 'assignments;
            }
        }
        mass[states[target].index()] += joint_dense(net, &states);
    }
    let z = mass[0] + mass[1];
    if z == 0.0 {
        return Err(Error::ImpossibleEvidence(evidence.display()));
    }
    Ok(Distribution {
        low: mass[0] / z,
        high: mass[1] / z,
    })
}

/// `P(target | evidence)` by variable elimination.
///
/// Hidden variables are eliminated greedily: the one whose elimination yields
/// the smallest resulting scope goes first, ties broken by variable id.
pub fn marginal_ve(
    net: &CompiledNetwork,
    target: &str,
    evidence: &Evidence,
) -> Result<Distribution> {
    let target_idx = net.index_of(target)?;
    let observed = net.resolve_evidence(evidence)?;

    let mut factors = Vec::with_capacity(net.len());
    for v in 0..net.len() {
        let mut factor = cpt_factor(net, v)?;
        for (u, obs) in observed.iter().enumerate() {
            if let Some(state) = obs {
                if factor.contains(u) {
                    factor = factor.restrict(u, state.index())?;
                }
            }
        }
        factors.push(factor);
    }

    let mut hidden: Vec<usize> = (0..net.len())
        .filter(|&v| v != target_idx && observed[v].is_none())
        .collect();

    while !hidden.is_empty() {
        let (pick, _) = hidden
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, (resulting_scope(&factors, v), net.id(v))))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("hidden is non-empty");
        let var = hidden.remove(pick);

        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let mut combined = Factor::scalar(1.0);
        for f in &touching {
            combined = combined.product(f)?;
        }
        factors.push(combined.sum_out(var)?);
    }

    let mut joint = Factor::scalar(1.0);
    for f in &factors {
        joint = joint.product(f)?;
    }

    if let Some(state) = observed[target_idx] {
        // every factor is scalar here; its value is P(evidence)
        if joint.total() == 0.0 {
            return Err(Error::ImpossibleEvidence(evidence.display()));
        }
        return Ok(Distribution::point(state));
    }

    let low = joint.get(&[0]);
    let high = joint.get(&[1]);
    let z = low + high;
    if z == 0.0 {
        return Err(Error::ImpossibleEvidence(evidence.display()));
    }
    Ok(Distribution {
        low: low / z,
        high: high / z,
    })
}

/// Number of variables left in scope after eliminating `var`.
fn resulting_scope(factors: &[Factor], var: usize) -> usize {
    let mut scope: Vec<usize> = Vec::new();
    for f in factors.iter().filter(|f| f.contains(var)) {
        for &u in f.scope() {
            if u != var && !scope.contains(&u) {
                scope.push(u);
            }
        }
    }
    scope.len()
}

/// Factor over `[parents.., var]` holding `P(var | parents)`.
fn cpt_factor(net: &CompiledNetwork, var: usize) -> Result<Factor> {
    let mut scope = net.parents(var).to_vec();
    scope.push(var);
    let cards = vec![2; scope.len()];
    let values = net.table(var).iter().flat_map(|&p| [1.0 - p, p]).collect();
    Factor::new(scope, cards, values)
}
