//! Discrete Bayesian networks over binary LOW/HIGH variables.
//!
//! [`BayesianNetwork`] is the raw, possibly defective description (ids,
//! parent lists, CPT rows keyed by strings). It must pass [`validate_network`]
//! before it can be turned into a [`CompiledNetwork`], the dense indexed form
//! every inference routine operates on.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, EvidenceDisplay, Result};

pub mod factor;
pub mod infer;
pub(crate) mod validate;

pub use factor::Factor;
pub use infer::{joint_probability, marginal_brute_force, marginal_ve, Distribution};
pub use validate::{validate_network, Finding, ValidationReport};

/// Uncertainty level of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    #[serde(rename = "L")]
    Low,
    #[serde(rename = "H")]
    High,
}

impl State {
    pub const ALL: [State; 2] = [State::Low, State::High];

    pub fn index(self) -> usize {
        match self {
            State::Low => 0,
            State::High => 1,
        }
    }

    pub fn from_index(i: usize) -> State {
        if i == 0 {
            State::Low
        } else {
            State::High
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            State::Low => "L",
            State::High => "H",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(State::Low),
            "H" => Ok(State::High),
            other => Err(Error::usage(format!(
                "invalid state `{other}` (expected L or H)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Component,
    Epistemic,
    Stochastic,
    Monitor,
    Voter,
}

impl VariableKind {
    /// Root-cause kinds may not have parents.
    pub fn is_root_kind(self) -> bool {
        matches!(
            self,
            VariableKind::Epistemic | VariableKind::Stochastic | VariableKind::Monitor
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: String,
    pub kind: VariableKind,
    pub parents: Vec<String>,
}

impl Variable {
    pub fn new(id: impl Into<String>, kind: VariableKind, parents: &[&str]) -> Self {
        Variable {
            id: id.into(),
            kind,
            parents: parents.iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// Conditional probability table storing `P(variable = H | parent assignment)`.
///
/// Row keys are the parent states joined by commas in `parents` order
/// (`"H,L"`), and the empty string for roots.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub variable: String,
    pub parents: Vec<String>,
    pub rows: BTreeMap<String, f64>,
}

impl Cpt {
    pub fn new(variable: impl Into<String>, parents: &[&str], rows: &[(&str, f64)]) -> Self {
        Cpt {
            variable: variable.into(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            rows: rows.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn root(variable: impl Into<String>, p_high: f64) -> Self {
        Cpt {
            variable: variable.into(),
            parents: Vec::new(),
            rows: BTreeMap::from([(String::new(), p_high)]),
        }
    }
}

/// All row keys for `n` binary parents, in canonical order (all-L first, the
/// first parent is the most significant position).
pub fn row_keys(n: usize) -> Vec<String> {
    (0..1usize << n).map(|i| row_key(i, n)).collect()
}

/// Key of the `index`-th assignment of `n` binary parents.
pub fn row_key(index: usize, n: usize) -> String {
    (0..n)
        .map(|pos| State::from_index((index >> (n - 1 - pos)) & 1).symbol())
        .collect::<Vec<_>>()
        .join(",")
}

/// Inverse of [`row_key`]; `None` when the key is malformed or has the wrong arity.
pub fn row_index(key: &str, n: usize) -> Option<usize> {
    if n == 0 {
        return key.is_empty().then_some(0);
    }
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != n {
        return None;
    }
    let mut index = 0;
    for part in parts {
        let state = match part {
            "L" => State::Low,
            "H" => State::High,
            _ => return None,
        };
        index = (index << 1) | state.index();
    }
    Some(index)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BayesianNetwork {
    pub name: String,
    pub variables: Vec<Variable>,
    pub cpts: Vec<Cpt>,
}

impl BayesianNetwork {
    pub fn new(name: impl Into<String>, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Self {
        BayesianNetwork {
            name: name.into(),
            variables,
            cpts,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_network(self)
    }

    /// Validates and builds the indexed form used by inference.
    pub fn compile(&self) -> Result<CompiledNetwork> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        Ok(CompiledNetwork::from_valid(self))
    }
}

/// Observed states for a subset of variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evidence(BTreeMap<String, State>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    /// Builds evidence from pairs, rejecting duplicate ids.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, State)>,
        S: Into<String>,
    {
        let mut ev = Evidence::new();
        for (id, state) in pairs {
            ev.insert(id, state)?;
        }
        Ok(ev)
    }

    pub fn insert(&mut self, id: impl Into<String>, state: State) -> Result<()> {
        let id = id.into();
        if self.0.contains_key(&id) {
            return Err(Error::usage(format!("duplicate evidence for `{id}`")));
        }
        self.0.insert(id, state);
        Ok(())
    }

    /// Parses `id=L` / `id=H`.
    pub fn parse_item(item: &str) -> Result<(String, State)> {
        let (id, state) = item
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("evidence `{item}` must look like <id>=<L|H>")))?;
        if id.is_empty() {
            return Err(Error::usage(format!("evidence `{item}` has an empty id")));
        }
        Ok((id.to_string(), state.parse()?))
    }

    pub fn get(&self, id: &str) -> Option<State> {
        self.0.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, State)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub(crate) fn display(&self) -> EvidenceDisplay {
        EvidenceDisplay(self.to_string())
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        let items: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", items.join(", "))
    }
}

/// A validated network with integer variable indices and dense CPTs.
///
/// `tables[v][r]` is `P(v = H | parent assignment r)` where `r` is the
/// [`row_index`] of the assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNetwork {
    name: String,
    ids: Vec<String>,
    kinds: Vec<VariableKind>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
}

impl CompiledNetwork {
    fn from_valid(net: &BayesianNetwork) -> Self {
        let index: HashMap<String, usize> = net
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i))
            .collect();
        let parents: Vec<Vec<usize>> = net
            .variables
            .iter()
            .map(|v| v.parents.iter().map(|p| index[p]).collect())
            .collect();
        let cpt_by_var: HashMap<&str, &Cpt> =
            net.cpts.iter().map(|c| (c.variable.as_str(), c)).collect();
        let tables = net
            .variables
            .iter()
            .map(|v| {
                let cpt = cpt_by_var[v.id.as_str()];
                row_keys(v.parents.len())
                    .iter()
                    .map(|k| cpt.rows[k])
                    .collect()
            })
            .collect();
        CompiledNetwork {
            name: net.name.clone(),
            ids: net.variables.iter().map(|v| v.id.clone()).collect(),
            kinds: net.variables.iter().map(|v| v.kind).collect(),
            index,
            parents,
            tables,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, var: usize) -> &str {
        &self.ids[var]
    }

    pub fn kind(&self, var: usize) -> VariableKind {
        self.kinds[var]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(id.to_string()))
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    pub fn table(&self, var: usize) -> &[f64] {
        &self.tables[var]
    }

    /// `P(var = state | parents as given by the full assignment)`.
    pub(crate) fn conditional(&self, var: usize, state: State, assignment: &[State]) -> f64 {
        let row = self.parents[var]
            .iter()
            .fold(0, |acc, &p| (acc << 1) | assignment[p].index());
        let p_high = self.tables[var][row];
        match state {
            State::High => p_high,
            State::Low => 1.0 - p_high,
        }
    }

    /// Returns a copy with one CPT row replaced.
    pub fn with_p_high(&self, var: usize, row: usize, p_high: f64) -> Result<Self> {
        let mut copy = self.clone();
        copy.set_p_high(var, row, p_high)?;
        Ok(copy)
    }

    pub(crate) fn set_p_high(&mut self, var: usize, row: usize, p_high: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p_high) {
            return Err(Error::usage(format!(
                "probability {p_high} for `{}` is outside [0, 1]",
                self.ids[var]
            )));
        }
        let table = self
            .tables
            .get_mut(var)
            .ok_or_else(|| Error::usage(format!("variable index {var} out of range")))?;
        let slot = table.get_mut(row).ok_or_else(|| {
            Error::usage(format!("row {row} out of range for `{}`", self.ids[var]))
        })?;
        *slot = p_high;
        Ok(())
    }

    /// Converts back to the raw representation.
    pub fn to_network(&self) -> BayesianNetwork {
        let variables = (0..self.len())
            .map(|v| Variable {
                id: self.ids[v].clone(),
                kind: self.kinds[v],
                parents: self.parents[v]
                    .iter()
                    .map(|&p| self.ids[p].clone())
                    .collect(),
            })
            .collect();
        let cpts = (0..self.len())
            .map(|v| Cpt {
                variable: self.ids[v].clone(),
                parents: self.parents[v]
                    .iter()
                    .map(|&p| self.ids[p].clone())
                    .collect(),
                rows: row_keys(self.parents[v].len())
                    .into_iter()
                    .zip(self.tables[v].iter().copied())
                    .collect(),
            })
            .collect();
        BayesianNetwork::new(self.name.clone(), variables, cpts)
    }

    /// Resolves evidence ids to indices.
    pub(crate) fn resolve_evidence(&self, evidence: &Evidence) -> Result<Vec<Option<State>>> {
        let mut resolved = vec![None; self.len()];
        for (id, state) in evidence.iter() {
            resolved[self.index_of(id)?] = Some(state);
        }
        Ok(resolved)
    }
}
