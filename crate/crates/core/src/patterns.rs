//! Architecture transforms for safety patterns.
//!
//! [`apply_n_version`] places a monitor next to an ML component and routes
//! both through a weighted voter:
//!
//! ```text
//! before:  target -> X          after:  target  -> voter -> X
//!                                        monitor -> voter
//! ```
//!
//! The voter CPT is `P(voter = H | t, m) = w·[m = H] + (1 − w)·[t = H]`, the
//! only two-parent table whose marginal equals `w·P(m = H) + (1 − w)·P(t = H)`
//! for every input marginal when the monitor is independent of the target.

use std::collections::BTreeMap;

use crate::arch::{AnnotatedArchitecture, Component, ComponentKind, CptSpec, Edge};
use crate::bn::{row_keys, State};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NVersionSpec {
    pub target: String,
    pub monitor_id: String,
    pub monitor_label: String,
    /// Prior probability that the monitor itself is highly uncertain.
    pub monitor_p_high: f64,
    /// Monitor's vote share in `[0, 1]`.
    pub weight: f64,
    pub voter_id: String,
}

impl NVersionSpec {
    pub fn new(
        target: impl Into<String>,
        monitor_id: impl Into<String>,
        monitor_p_high: f64,
        weight: f64,
    ) -> Self {
        let monitor_id = monitor_id.into();
        NVersionSpec {
            target: target.into(),
            monitor_label: monitor_id.clone(),
            monitor_id,
            monitor_p_high,
            weight,
            voter_id: "Voter".into(),
        }
    }

    pub fn with_voter_id(mut self, id: impl Into<String>) -> Self {
        self.voter_id = id.into();
        self
    }

    pub fn with_monitor_label(mut self, label: impl Into<String>) -> Self {
        self.monitor_label = label.into();
        self
    }
}

/// Voter CPT rows keyed `"<target>,<monitor>"`.
pub fn voter_rows(weight: f64) -> BTreeMap<String, f64> {
    row_keys(2)
        .into_iter()
        .enumerate()
        .map(|(i, key)| {
            let target = State::from_index(i >> 1);
            let monitor = State::from_index(i & 1);
            let vote_m = if monitor == State::High { weight } else { 0.0 };
            let vote_t = if target == State::High {
                1.0 - weight
            } else {
                0.0
            };
            (key, vote_m + vote_t)
        })
        .collect()
}

pub fn apply_n_version(
    arch: &AnnotatedArchitecture,
    spec: &NVersionSpec,
) -> Result<AnnotatedArchitecture> {
    let target = arch
        .component(&spec.target)
        .ok_or_else(|| Error::UnknownComponent(spec.target.clone()))?;
    if target.kind != ComponentKind::Ml {
        return Err(Error::usage(format!(
            "n-version target `{}` must be an ml component, not {}",
            target.id, target.kind
        )));
    }
    if !(0.0..=1.0).contains(&spec.weight) {
        return Err(Error::usage(format!(
            "weight {} is outside [0, 1]",
            spec.weight
        )));
    }
    if !(0.0..=1.0).contains(&spec.monitor_p_high) {
        return Err(Error::usage(format!(
            "monitor p_high {} is outside [0, 1]",
            spec.monitor_p_high
        )));
    }
    let feeds_voter = arch.edges.iter().any(|e| {
        e.from == spec.target
            && arch
                .component(&e.to)
                .is_some_and(|c| c.kind == ComponentKind::Voter)
    });
    if feeds_voter {
        return Err(Error::usage(format!(
            "`{}` already feeds a voter; the pattern is applied once per component",
            spec.target
        )));
    }
    for id in [&spec.monitor_id, &spec.voter_id] {
        let taken = arch.component(id).is_some() || arch.uncertainties.iter().any(|u| &u.id == id);
        if taken || id.is_empty() {
            return Err(Error::usage(format!(
                "id `{id}` is empty or already in use"
            )));
        }
    }
    if spec.monitor_id == spec.voter_id {
        return Err(Error::usage("monitor and voter ids must differ"));
    }
    let report = arch.validate();
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }

    let mut out = arch.clone();
    let downstream: Vec<String> = out
        .edges
        .iter()
        .filter(|e| e.from == spec.target)
        .map(|e| e.to.clone())
        .collect();
    for edge in out.edges.iter_mut().filter(|e| e.from == spec.target) {
        edge.from = spec.voter_id.clone();
    }
    // Downstream CPTs now see the voter in the slot the target used to occupy.
    for id in &downstream {
        if let Some(cpt) = out.cpts.get_mut(id) {
            for parent in cpt.parents.iter_mut().filter(|p| **p == spec.target) {
                *parent = spec.voter_id.clone();
            }
        }
    }

    out.components.push(Component::new(
        spec.monitor_id.clone(),
        ComponentKind::Sensor,
        spec.monitor_label.clone(),
    ));
    out.components.push(Component::new(
        spec.voter_id.clone(),
        ComponentKind::Voter,
        format!("Voter for {} and {}", spec.target, spec.monitor_id),
    ));
    out.edges
        .push(Edge::new(spec.target.clone(), spec.voter_id.clone()));
    out.edges
        .push(Edge::new(spec.monitor_id.clone(), spec.voter_id.clone()));
    out.cpts.insert(
        spec.monitor_id.clone(),
        CptSpec {
            parents: vec![],
            rows: BTreeMap::from([(String::new(), spec.monitor_p_high)]),
        },
    );
    out.cpts.insert(
        spec.voter_id.clone(),
        CptSpec {
            parents: vec![spec.target.clone(), spec.monitor_id.clone()],
            rows: voter_rows(spec.weight),
        },
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{UncertaintyAnnotation, UncertaintyKind};

    fn root(p: f64) -> CptSpec {
        CptSpec {
            parents: vec![],
            rows: BTreeMap::from([(String::new(), p)]),
        }
    }

    fn de_planning() -> AnnotatedArchitecture {
        AnnotatedArchitecture {
            name: "small".into(),
            components: vec![
                Component::new("DE", ComponentKind::Ml, "Depth"),
                Component::new("Planning", ComponentKind::Classical, "Planning"),
            ],
            edges: vec![Edge::new("DE", "Planning")],
            uncertainties: vec![UncertaintyAnnotation::new(
                "SU_DE",
                UncertaintyKind::Stochastic,
                &["DE"],
            )],
            cpts: BTreeMap::from([
                ("SU_DE".into(), root(0.4)),
                (
                    "DE".into(),
                    CptSpec {
                        parents: vec!["SU_DE".into()],
                        rows: BTreeMap::from([("L".into(), 0.1), ("H".into(), 0.7)]),
                    },
                ),
                (
                    "Planning".into(),
                    CptSpec {
                        parents: vec!["DE".into()],
                        rows: BTreeMap::from([("L".into(), 0.05), ("H".into(), 0.8)]),
                    },
                ),
            ]),
        }
    }

    #[test]
    fn voter_rows_for_weight_point_nine() {
        let rows = voter_rows(0.9);
        let close = |k: &str, v: f64| assert!((rows[k] - v).abs() < 1e-15, "{k}: {}", rows[k]);
        close("H,H", 1.0);
        close("H,L", 0.1);
        close("L,H", 0.9);
        close("L,L", 0.0);
    }

    #[test]
    fn zero_weight_voter_copies_target() {
        let rows = voter_rows(0.0);
        assert_eq!(rows["H,H"], 1.0);
        assert_eq!(rows["H,L"], 1.0);
        assert_eq!(rows["L,H"], 0.0);
        assert_eq!(rows["L,L"], 0.0);
    }

    #[test]
    fn rewires_and_adds_two_components() {
        let arch = de_planning();
        let out = apply_n_version(&arch, &NVersionSpec::new("DE", "LIDAR", 0.1, 0.9)).unwrap();
        assert_eq!(out.components.len(), arch.components.len() + 2);
        assert_eq!(
            out.edges,
            vec![
                Edge::new("Voter", "Planning"),
                Edge::new("DE", "Voter"),
                Edge::new("LIDAR", "Voter"),
            ]
        );
        assert_eq!(out.cpts["Planning"].parents, vec!["Voter"]);
        assert!(out.validate().is_ok(), "{}", out.validate());
        assert_eq!(arch, de_planning());
    }

    #[test]
    fn applying_twice_is_rejected() {
        let once =
            apply_n_version(&de_planning(), &NVersionSpec::new("DE", "LIDAR", 0.1, 0.9)).unwrap();
        let again = NVersionSpec::new("DE", "LIDAR2", 0.1, 0.9).with_voter_id("Voter2");
        assert!(apply_n_version(&once, &again)
            .unwrap_err()
            .to_string()
            .contains("already feeds"));
    }

    #[test]
    fn bad_specs() {
        let arch = de_planning();
        assert!(matches!(
            apply_n_version(&arch, &NVersionSpec::new("XX", "LIDAR", 0.1, 0.9)),
            Err(Error::UnknownComponent(_))
        ));
        assert!(apply_n_version(&arch, &NVersionSpec::new("Planning", "LIDAR", 0.1, 0.9)).is_err());
        assert!(apply_n_version(&arch, &NVersionSpec::new("DE", "LIDAR", 0.1, 1.5)).is_err());
        assert!(apply_n_version(&arch, &NVersionSpec::new("DE", "LIDAR", -0.1, 0.5)).is_err());
        assert!(apply_n_version(&arch, &NVersionSpec::new("DE", "Planning", 0.1, 0.5)).is_err());
    }
}
