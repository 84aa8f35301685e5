use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{row_index, row_keys, BayesianNetwork};
use crate::fmt_prob;
use crate::graph::find_cycles;

/// One structural defect in a network or architecture.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    /// Closed vertex path, e.g. `[A, B, A]`.
    Cycle {
        path: Vec<String>,
    },
    DanglingParent {
        variable: String,
        parent: String,
    },
    DuplicateParent {
        variable: String,
        parent: String,
    },
    DuplicateId {
        id: String,
    },
    EmptyId,
    RootHasParents {
        variable: String,
        parents: Vec<String>,
    },
    MissingCpt {
        variable: String,
        expected_rows: Vec<String>,
    },
    DuplicateCpt {
        variable: String,
    },
    OrphanCpt {
        variable: String,
    },
    CptParentMismatch {
        variable: String,
        declared: Vec<String>,
        expected: Vec<String>,
    },
    MissingCptRow {
        variable: String,
        row: String,
    },
    ExtraCptRow {
        variable: String,
        row: String,
    },
    ProbabilityOutOfRange {
        variable: String,
        row: String,
        value: f64,
    },
    NoComponents,
    UnknownEdgeEndpoint {
        from: String,
        to: String,
        missing: String,
    },
    DuplicateEdge {
        from: String,
        to: String,
    },
    EmptyAnnotation {
        annotation: String,
    },
    UnknownAnnotationTarget {
        annotation: String,
        component: String,
    },
    NonMlAnnotationTarget {
        annotation: String,
        component: String,
    },
    StochasticSharedTarget {
        annotation: String,
        targets: Vec<String>,
    },
    SensorWithInputs {
        component: String,
        inputs: Vec<String>,
    },
}

impl Finding {
    /// Stable machine-readable tag, identical to the JSON `kind` field.
    pub fn kind(&self) -> &'static str {
        match self {
            Finding::Cycle { .. } => "cycle",
            Finding::DanglingParent { .. } => "dangling_parent",
            Finding::DuplicateParent { .. } => "duplicate_parent",
            Finding::DuplicateId { .. } => "duplicate_id",
            Finding::EmptyId => "empty_id",
            Finding::RootHasParents { .. } => "root_has_parents",
            Finding::MissingCpt { .. } => "missing_cpt",
            Finding::DuplicateCpt { .. } => "duplicate_cpt",
            Finding::OrphanCpt { .. } => "orphan_cpt",
            Finding::CptParentMismatch { .. } => "cpt_parent_mismatch",
            Finding::MissingCptRow { .. } => "missing_cpt_row",
            Finding::ExtraCptRow { .. } => "extra_cpt_row",
            Finding::ProbabilityOutOfRange { .. } => "probability_out_of_range",
            Finding::NoComponents => "no_components",
            Finding::UnknownEdgeEndpoint { .. } => "unknown_edge_endpoint",
            Finding::DuplicateEdge { .. } => "duplicate_edge",
            Finding::EmptyAnnotation { .. } => "empty_annotation",
            Finding::UnknownAnnotationTarget { .. } => "unknown_annotation_target",
            Finding::NonMlAnnotationTarget { .. } => "non_ml_annotation_target",
            Finding::StochasticSharedTarget { .. } => "stochastic_shared_target",
            Finding::SensorWithInputs { .. } => "sensor_with_inputs",
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Cycle { path } => write!(f, "cycle: {}", path.join(" -> ")),
            Finding::DanglingParent { variable, parent } => {
                write!(f, "`{variable}` has unknown parent `{parent}`")
            }
            Finding::DuplicateParent { variable, parent } => {
                write!(f, "`{variable}` lists parent `{parent}` more than once")
            }
            Finding::DuplicateId { id } => write!(f, "duplicate id `{id}`"),
            Finding::EmptyId => f.write_str("empty id"),
            Finding::RootHasParents { variable, parents } => write!(
                f,
                "`{variable}` is an uncertainty source or monitor and must be a root, but has parents [{}]",
                parents.join(", ")
            ),
            Finding::MissingCpt {
                variable,
                expected_rows,
            } => {
                let rows: Vec<String> = expected_rows.iter().map(|r| format!("\"{r}\"")).collect();
                write!(f, "no CPT for `{variable}` (expected rows {})", rows.join(", "))
            }
            Finding::DuplicateCpt { variable } => write!(f, "more than one CPT for `{variable}`"),
            Finding::OrphanCpt { variable } => write!(f, "CPT for unknown variable `{variable}`"),
            Finding::CptParentMismatch {
                variable,
                declared,
                expected,
            } => write!(
                f,
                "CPT for `{variable}` declares parents [{}] but the model implies [{}]",
                declared.join(", "),
                expected.join(", ")
            ),
            Finding::MissingCptRow { variable, row } => {
                write!(f, "CPT for `{variable}` is missing row \"{row}\"")
            }
            Finding::ExtraCptRow { variable, row } => {
                write!(f, "CPT for `{variable}` has unexpected row \"{row}\"")
            }
            Finding::ProbabilityOutOfRange {
                variable,
                row,
                value,
            } => write!(
                f,
                "CPT for `{variable}` row \"{row}\" has probability {} outside [0, 1]",
                fmt_prob(*value)
            ),
            Finding::NoComponents => f.write_str("architecture has no components"),
            Finding::UnknownEdgeEndpoint { from, to, missing } => {
                write!(f, "edge {from} -> {to} references unknown component `{missing}`")
            }
            Finding::DuplicateEdge { from, to } => write!(f, "edge {from} -> {to} is declared twice"),
            Finding::EmptyAnnotation { annotation } => {
                write!(f, "uncertainty `{annotation}` is not attached to any component")
            }
            Finding::UnknownAnnotationTarget {
                annotation,
                component,
            } => write!(f, "uncertainty `{annotation}` attaches to unknown component `{component}`"),
            Finding::NonMlAnnotationTarget {
                annotation,
                component,
            } => write!(
                f,
                "uncertainty `{annotation}` attaches to `{component}`, which is not an ml component"
            ),
            Finding::StochasticSharedTarget {
                annotation,
                targets,
            } => write!(
                f,
                "stochastic uncertainty `{annotation}` must attach to exactly one component, got [{}]",
                targets.join(", ")
            ),
            Finding::SensorWithInputs { component, inputs } => write!(
                f,
                "sensor `{component}` has incoming data flow from [{}]",
                inputs.join(", ")
            ),
        }
    }
}

/// Result of validating a network or an architecture. Defects are data.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn push(&mut self, finding: Finding) {
        self.findings.push(finding);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }

    pub fn cycles(&self) -> impl Iterator<Item = &[String]> {
        self.findings.iter().filter_map(|f| match f {
            Finding::Cycle { path } => Some(path.as_slice()),
            _ => None,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("OK");
        }
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "- {finding}")?;
        }
        Ok(())
    }
}

pub fn validate_network(net: &BayesianNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, var) in net.variables.iter().enumerate() {
        if var.id.is_empty() {
            report.push(Finding::EmptyId);
        }
        if index.insert(var.id.as_str(), i).is_some() {
            report.push(Finding::DuplicateId { id: var.id.clone() });
        }
    }

    for var in &net.variables {
        let mut seen = HashSet::new();
        for parent in &var.parents {
            if !index.contains_key(parent.as_str()) {
                report.push(Finding::DanglingParent {
                    variable: var.id.clone(),
                    parent: parent.clone(),
                });
            }
            if !seen.insert(parent.as_str()) {
                report.push(Finding::DuplicateParent {
                    variable: var.id.clone(),
                    parent: parent.clone(),
                });
            }
        }
        if var.kind.is_root_kind() && !var.parents.is_empty() {
            report.push(Finding::RootHasParents {
                variable: var.id.clone(),
                parents: var.parents.clone(),
            });
        }
    }

    let mut cpt_seen: HashSet<&str> = HashSet::new();
    for cpt in &net.cpts {
        if !cpt_seen.insert(cpt.variable.as_str()) {
            report.push(Finding::DuplicateCpt {
                variable: cpt.variable.clone(),
            });
            continue;
        }
        let Some(&vi) = index.get(cpt.variable.as_str()) else {
            report.push(Finding::OrphanCpt {
                variable: cpt.variable.clone(),
            });
            continue;
        };
        let var = &net.variables[vi];
        if cpt.parents != var.parents {
            report.push(Finding::CptParentMismatch {
                variable: var.id.clone(),
                declared: cpt.parents.clone(),
                expected: var.parents.clone(),
            });
            continue;
        }
        report.extend(check_rows(&var.id, var.parents.len(), &cpt.rows));
    }
    for var in &net.variables {
        if !cpt_seen.contains(var.id.as_str()) {
            report.push(Finding::MissingCpt {
                variable: var.id.clone(),
                expected_rows: row_keys(var.parents.len()),
            });
        }
    }

    // parent -> child adjacency over resolvable parents
    let mut children = vec![Vec::new(); net.variables.len()];
    for (ci, var) in net.variables.iter().enumerate() {
        for parent in &var.parents {
            if let Some(&pi) = index.get(parent.as_str()) {
                children[pi].push(ci);
            }
        }
    }
    for cycle in find_cycles(&children) {
        report.push(Finding::Cycle {
            path: cycle
                .into_iter()
                .map(|i| net.variables[i].id.clone())
                .collect(),
        });
    }

    report
}

/// Row coverage and range checks for one CPT whose parent list is already known to be right.
pub(crate) fn check_rows(
    variable: &str,
    n_parents: usize,
    rows: &std::collections::BTreeMap<String, f64>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    // Guard against absurd arities before enumerating 2^n keys.
    if n_parents < 24 {
        for key in row_keys(n_parents) {
            if !rows.contains_key(&key) {
                report.push(Finding::MissingCptRow {
                    variable: variable.to_string(),
                    row: key,
                });
            }
        }
    }
    for (key, &value) in rows {
        if row_index(key, n_parents).is_none() {
            report.push(Finding::ExtraCptRow {
                variable: variable.to_string(),
                row: key.clone(),
            });
        }
        if !(0.0..=1.0).contains(&value) {
            report.push(Finding::ProbabilityOutOfRange {
                variable: variable.to_string(),
                row: key.clone(),
                value,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{Cpt, Variable, VariableKind};

    fn chain() -> BayesianNetwork {
        BayesianNetwork::new(
            "chain",
            vec![
                Variable::new("A", VariableKind::Component, &[]),
                Variable::new("B", VariableKind::Component, &["A"]),
                Variable::new("C", VariableKind::Component, &["B"]),
            ],
            vec![
                Cpt::root("A", 0.5),
                Cpt::new("B", &["A"], &[("L", 0.5), ("H", 0.5)]),
                Cpt::new("C", &["B"], &[("L", 0.5), ("H", 0.5)]),
            ],
        )
    }

    #[test]
    fn well_formed_chain_is_ok() {
        let report = validate_network(&chain());
        assert!(report.is_ok(), "{report}");
        assert_eq!(report.to_string(), "OK");
    }

    #[test]
    fn two_cycle_is_named() {
        let net = BayesianNetwork::new(
            "cyc",
            vec![
                Variable::new("A", VariableKind::Component, &["B"]),
                Variable::new("B", VariableKind::Component, &["A"]),
            ],
            vec![
                Cpt::new("A", &["B"], &[("L", 0.5), ("H", 0.5)]),
                Cpt::new("B", &["A"], &[("L", 0.5), ("H", 0.5)]),
            ],
        );
        let report = validate_network(&net);
        assert_eq!(
            report.findings,
            vec![Finding::Cycle {
                path: vec!["A".into(), "B".into(), "A".into()]
            }]
        );
    }

    #[test]
    fn missing_row_is_reported() {
        let mut net = chain();
        net.cpts[1] = Cpt::new("B", &["A"], &[("H", 0.9)]);
        let report = validate_network(&net);
        assert_eq!(
            report.findings,
            vec![Finding::MissingCptRow {
                variable: "B".into(),
                row: "L".into()
            }]
        );
    }

    #[test]
    fn every_defect_class_is_reported() {
        let net = BayesianNetwork::new(
            "bad",
            vec![
                Variable::new("A", VariableKind::Epistemic, &["B"]),
                Variable::new("B", VariableKind::Component, &["Z"]),
                Variable::new("B", VariableKind::Component, &[]),
                Variable::new("C", VariableKind::Component, &[]),
            ],
            vec![
                Cpt::new("A", &["B"], &[("L", 0.5), ("H", 1.3), ("X", 0.1)]),
                Cpt::new("B", &["Z"], &[("L", 0.3), ("H", 0.2)]),
                Cpt::root("Q", 0.1),
            ],
        );
        let kinds: Vec<&str> = validate_network(&net)
            .findings
            .iter()
            .map(|f| f.kind())
            .collect();
        for expected in [
            "duplicate_id",
            "dangling_parent",
            "root_has_parents",
            "extra_cpt_row",
            "probability_out_of_range",
            "orphan_cpt",
            "missing_cpt",
            "cpt_parent_mismatch",
        ] {
            assert!(
                kinds.contains(&expected),
                "{expected} missing from {kinds:?}"
            );
        }
    }

    #[test]
    fn nan_probability_is_out_of_range() {
        let mut net = chain();
        net.cpts[0] = Cpt::root("A", f64::NAN);
        let report = validate_network(&net);
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].kind(), "probability_out_of_range");
    }

    #[test]
    fn parent_mismatch_is_reported() {
        let mut net = chain();
        net.cpts[2] = Cpt::new("C", &["A"], &[("L", 0.5), ("H", 0.5)]);
        let report = validate_network(&net);
        assert_eq!(report.findings[0].kind(), "cpt_parent_mismatch");
    }
}
