//! Annotated software architectures and their compilation into Bayesian networks.
//!
//! Variable parents follow a fixed convention, since CPT row keys depend on
//! it: a component's parents are its uncertainty annotations in declaration
//! order, followed by its data-flow predecessors in edge declaration order.
//! Sensor components without a CPT (camera-style inputs) are not compiled
//! into the network; their outgoing edges are dropped. A sensor that does
//! carry a CPT becomes a root `monitor` variable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::bn::validate::check_rows;
use crate::bn::{
    row_keys, BayesianNetwork, CompiledNetwork, Cpt, Finding, ValidationReport, Variable,
    VariableKind,
};
use crate::graph::{descendants, find_cycles, topological_order};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Ml,
    Classical,
    Sensor,
    Voter,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Ml => "ml",
            ComponentKind::Classical => "classical",
            ComponentKind::Sensor => "sensor",
            ComponentKind::Voter => "voter",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ml" => Ok(ComponentKind::Ml),
            "classical" => Ok(ComponentKind::Classical),
            "sensor" => Ok(ComponentKind::Sensor),
            "voter" => Ok(ComponentKind::Voter),
            other => Err(format!(
                "unknown component kind `{other}` (expected ml, classical, sensor or voter)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertaintyKind {
    Epistemic,
    Stochastic,
}

impl UncertaintyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyKind::Epistemic => "epistemic",
            UncertaintyKind::Stochastic => "stochastic",
        }
    }
}

impl fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UncertaintyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "epistemic" => Ok(UncertaintyKind::Epistemic),
            "stochastic" => Ok(UncertaintyKind::Stochastic),
            other => Err(format!(
                "unknown uncertainty kind `{other}` (expected epistemic or stochastic)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    pub label: String,
}

impl Component {
    pub fn new(id: impl Into<String>, kind: ComponentKind, label: impl Into<String>) -> Self {
        Component {
            id: id.into(),
            kind,
            label: label.into(),
        }
    }
}

/// Data flows from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertaintyAnnotation {
    pub id: String,
    pub kind: UncertaintyKind,
    pub attaches_to: Vec<String>,
}

impl UncertaintyAnnotation {
    pub fn new(id: impl Into<String>, kind: UncertaintyKind, attaches_to: &[&str]) -> Self {
        UncertaintyAnnotation {
            id: id.into(),
            kind,
            attaches_to: attaches_to.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// CPT as written in an architecture document.
#[derive(Debug, Clone, PartialEq)]
pub struct CptSpec {
    pub parents: Vec<String>,
    pub rows: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotatedArchitecture {
    pub name: String,
    pub components: Vec<Component>,
    pub edges: Vec<Edge>,
    pub uncertainties: Vec<UncertaintyAnnotation>,
    pub cpts: BTreeMap<String, CptSpec>,
}

impl AnnotatedArchitecture {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Whether a component becomes a network variable.
    fn is_compiled(&self, component: &Component) -> bool {
        component.kind != ComponentKind::Sensor || self.cpts.contains_key(&component.id)
    }

    /// Network parents of `component` under the ordering convention.
    pub fn expected_parents(&self, component: &str) -> Vec<String> {
        let mut parents: Vec<String> = self
            .uncertainties
            .iter()
            .filter(|u| u.attaches_to.iter().any(|c| c == component))
            .map(|u| u.id.clone())
            .collect();
        for edge in self.edges.iter().filter(|e| e.to == component) {
            if self
                .component(&edge.from)
                .is_some_and(|c| self.is_compiled(c))
            {
                parents.push(edge.from.clone());
            }
        }
        parents
    }

    /// Checks every structural invariant, including CPT shape and ranges.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.components.is_empty() {
            report.push(Finding::NoComponents);
        }

        let mut ids: HashSet<&str> = HashSet::new();
        let all_ids = self
            .components
            .iter()
            .map(|c| c.id.as_str())
            .chain(self.uncertainties.iter().map(|u| u.id.as_str()));
        for id in all_ids {
            if id.is_empty() {
                report.push(Finding::EmptyId);
            } else if !ids.insert(id) {
                report.push(Finding::DuplicateId { id: id.to_string() });
            }
        }

        let comp_index: HashMap<&str, usize> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let mut seen_edges: HashSet<(&str, &str)> = HashSet::new();
        let mut adjacency = vec![Vec::new(); self.components.len()];
        for edge in &self.edges {
            let mut ok = true;
            for end in [&edge.from, &edge.to] {
                if !comp_index.contains_key(end.as_str()) {
                    report.push(Finding::UnknownEdgeEndpoint {
                        from: edge.from.clone(),
                        to: edge.to.clone(),
                        missing: end.clone(),
                    });
                    ok = false;
                }
            }
            if !seen_edges.insert((edge.from.as_str(), edge.to.as_str())) {
                report.push(Finding::DuplicateEdge {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                });
                ok = false;
            }
            if ok {
                adjacency[comp_index[edge.from.as_str()]].push(comp_index[edge.to.as_str()]);
            }
        }
        for cycle in find_cycles(&adjacency) {
            report.push(Finding::Cycle {
                path: cycle
                    .into_iter()
                    .map(|i| self.components[i].id.clone())
                    .collect(),
            });
        }

        for u in &self.uncertainties {
            if u.attaches_to.is_empty() {
                report.push(Finding::EmptyAnnotation {
                    annotation: u.id.clone(),
                });
            }
            if u.kind == UncertaintyKind::Stochastic && u.attaches_to.len() > 1 {
                report.push(Finding::StochasticSharedTarget {
                    annotation: u.id.clone(),
                    targets: u.attaches_to.clone(),
                });
            }
            let mut seen = HashSet::new();
            for target in &u.attaches_to {
                if !seen.insert(target.as_str()) {
                    report.push(Finding::DuplicateParent {
                        variable: target.clone(),
                        parent: u.id.clone(),
                    });
                }
                match self.component(target) {
                    None => report.push(Finding::UnknownAnnotationTarget {
                        annotation: u.id.clone(),
                        component: target.clone(),
                    }),
                    Some(c) if c.kind != ComponentKind::Ml => {
                        report.push(Finding::NonMlAnnotationTarget {
                            annotation: u.id.clone(),
                            component: target.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }

        for c in self
            .components
            .iter()
            .filter(|c| c.kind == ComponentKind::Sensor)
        {
            let inputs: Vec<String> = self
                .edges
                .iter()
                .filter(|e| e.to == c.id)
                .map(|e| e.from.clone())
                .collect();
            if !inputs.is_empty() {
                report.push(Finding::SensorWithInputs {
                    component: c.id.clone(),
                    inputs,
                });
            }
        }

        // CPT coverage, only meaningful once ids are sane
        let mut variables: Vec<&str> = Vec::new();
        variables.extend(self.uncertainties.iter().map(|u| u.id.as_str()));
        variables.extend(
            self.components
                .iter()
                .filter(|c| self.is_compiled(c))
                .map(|c| c.id.as_str()),
        );
        let var_set: HashSet<&str> = variables.iter().copied().collect();
        for var in &variables {
            let expected = if self.uncertainties.iter().any(|u| u.id == *var) {
                Vec::new()
            } else {
                self.expected_parents(var)
            };
            match self.cpts.get(*var) {
                None => report.push(Finding::MissingCpt {
                    variable: var.to_string(),
                    expected_rows: if expected.len() <= 16 {
                        row_keys(expected.len())
                    } else {
                        Vec::new()
                    },
                }),
                Some(cpt) if cpt.parents != expected => report.push(Finding::CptParentMismatch {
                    variable: var.to_string(),
                    declared: cpt.parents.clone(),
                    expected,
                }),
                Some(cpt) => report.extend(check_rows(var, expected.len(), &cpt.rows)),
            }
        }
        for var in self.cpts.keys() {
            if !var_set.contains(var.as_str()) {
                report.push(Finding::OrphanCpt {
                    variable: var.clone(),
                });
            }
        }
        report
    }

    /// Compiles into a network: annotations first (as roots), then compiled
    /// components, each in declaration order.
    pub fn to_network(&self) -> Result<BayesianNetwork> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        let mut variables = Vec::new();
        for u in &self.uncertainties {
            variables.push(Variable {
                id: u.id.clone(),
                kind: match u.kind {
                    UncertaintyKind::Epistemic => VariableKind::Epistemic,
                    UncertaintyKind::Stochastic => VariableKind::Stochastic,
                },
                parents: Vec::new(),
            });
        }
        for c in self.components.iter().filter(|c| self.is_compiled(c)) {
            variables.push(Variable {
                id: c.id.clone(),
                kind: match c.kind {
                    ComponentKind::Ml | ComponentKind::Classical => VariableKind::Component,
                    ComponentKind::Sensor => VariableKind::Monitor,
                    ComponentKind::Voter => VariableKind::Voter,
                },
                parents: self.expected_parents(&c.id),
            });
        }
        let cpts = variables
            .iter()
            .map(|v| {
                let spec = &self.cpts[&v.id];
                Cpt {
                    variable: v.id.clone(),
                    parents: spec.parents.clone(),
                    rows: spec.rows.clone(),
                }
            })
            .collect();
        let net = BayesianNetwork::new(self.name.clone(), variables, cpts);
        let report = net.validate();
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        Ok(net)
    }

    pub fn compile(&self) -> Result<CompiledNetwork> {
        self.to_network()?.compile()
    }

    /// Components downstream of `component` along data flow, in topological
    /// order (ties by declaration order). Empty means the change is isolated.
    pub fn change_impact(&self, component: &str) -> Result<Vec<String>> {
        let index: HashMap<&str, usize> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let start = *index
            .get(component)
            .ok_or_else(|| Error::UnknownComponent(component.to_string()))?;
        let mut adjacency = vec![Vec::new(); self.components.len()];
        for edge in &self.edges {
            if let (Some(&f), Some(&t)) =
                (index.get(edge.from.as_str()), index.get(edge.to.as_str()))
            {
                adjacency[f].push(t);
            }
        }
        let order = topological_order(&adjacency).ok_or_else(|| {
            let mut report = ValidationReport::default();
            for cycle in find_cycles(&adjacency) {
                report.push(Finding::Cycle {
                    path: cycle
                        .into_iter()
                        .map(|i| self.components[i].id.clone())
                        .collect(),
                });
            }
            Error::Invalid(report)
        })?;
        let reachable = descendants(&adjacency, start);
        Ok(order
            .into_iter()
            .filter(|&i| reachable[i] && i != start)
            .map(|i| self.components[i].id.clone())
            .collect())
    }
}
