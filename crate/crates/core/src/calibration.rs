//! Thresholds and CPT probabilities estimated from per-sample uncertainty records.
//!
//! The LOW/HIGH threshold is the smallest uncertainty among misclassified
//! samples. A sample counts as HIGH when its uncertainty is at or above the
//! threshold, so every misclassified sample is HIGH.

use std::collections::BTreeMap;
use std::fmt;

use crate::bn::{row_index, row_keys, State};
use crate::{fmt_prob, Error, Result};

/// Default `p_high` for a CPT row with no supporting records.
pub const UNESTIMATED_P_HIGH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub sample_id: String,
    pub uncertainty: f64,
    pub correct: bool,
    pub parent_states: Option<BTreeMap<String, State>>,
}

impl CalibrationRecord {
    pub fn new(sample_id: impl Into<String>, uncertainty: f64, correct: bool) -> Self {
        CalibrationRecord {
            sample_id: sample_id.into(),
            uncertainty,
            correct,
            parent_states: None,
        }
    }

    pub fn with_parents(mut self, states: &[(&str, State)]) -> Self {
        self.parent_states = Some(states.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationRecordSet {
    /// Parent columns present in the source, in column order.
    pub parent_columns: Vec<String>,
    pub records: Vec<CalibrationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    At(f64),
    /// No record was misclassified; every sample is LOW.
    NoMisclassification,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::At(t) => t,
            Threshold::NoMisclassification => f64::INFINITY,
        }
    }

    pub fn is_sentinel(self) -> bool {
        matches!(self, Threshold::NoMisclassification)
    }

    pub fn classify(self, uncertainty: f64) -> State {
        if uncertainty >= self.value() {
            State::High
        } else {
            State::Low
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::At(t) => f.write_str(&fmt_prob(*t)),
            Threshold::NoMisclassification => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub threshold: Threshold,
    pub p_high: f64,
    pub n_high: usize,
    pub n_total: usize,
}

/// One estimated CPT row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowEstimate {
    pub key: String,
    pub p_high: f64,
    pub n_high: usize,
    pub n_total: usize,
    /// False when the group was empty and `p_high` is the default.
    pub estimated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEstimate {
    pub threshold: Threshold,
    pub parents: Vec<String>,
    /// Rows in canonical key order.
    pub rows: Vec<RowEstimate>,
}

impl ConditionalEstimate {
    pub fn cpt_rows(&self) -> BTreeMap<String, f64> {
        self.rows
            .iter()
            .map(|r| (r.key.clone(), r.p_high))
            .collect()
    }

    pub fn unestimated(&self) -> impl Iterator<Item = &RowEstimate> {
        self.rows.iter().filter(|r| !r.estimated)
    }
}

fn check_records(records: &[CalibrationRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::usage("calibration needs at least one record"));
    }
    if let Some(r) = records
        .iter()
        .find(|r| !r.uncertainty.is_finite() || r.uncertainty < 0.0)
    {
        return Err(Error::data(format!(
            "sample `{}` has uncertainty {} (must be finite and >= 0)",
            r.sample_id, r.uncertainty
        )));
    }
    Ok(())
}

/// Lowest uncertainty among misclassified records.
pub fn compute_threshold(records: &[CalibrationRecord]) -> Result<Threshold> {
    check_records(records)?;
    Ok(records
        .iter()
        .filter(|r| !r.correct)
        .map(|r| r.uncertainty)
        .reduce(f64::min)
        .map_or(Threshold::NoMisclassification, Threshold::At))
}

/// Fraction of records at or above the threshold.
pub fn estimate_prior(
    records: &[CalibrationRecord],
    threshold: Threshold,
) -> Result<CalibrationResult> {
    check_records(records)?;
    let n_high = count_high(records.iter(), threshold);
    Ok(CalibrationResult {
        threshold,
        p_high: n_high as f64 / records.len() as f64,
        n_high,
        n_total: records.len(),
    })
}

fn count_high<'a>(
    records: impl Iterator<Item = &'a CalibrationRecord>,
    threshold: Threshold,
) -> usize {
    records
        .filter(|r| threshold.classify(r.uncertainty) == State::High)
        .count()
}

/// Per-parent-assignment estimate of `P(H | parents)`. Empty groups get
/// [`UNESTIMATED_P_HIGH`] and are flagged.
pub fn estimate_conditional(
    records: &[CalibrationRecord],
    threshold: Threshold,
    parents: &[String],
) -> Result<ConditionalEstimate> {
    check_records(records)?;
    let n = parents.len();
    let mut groups: Vec<(usize, usize)> = vec![(0, 0); 1 << n];
    for r in records {
        let states = r.parent_states.as_ref().ok_or_else(|| {
            Error::data(format!("sample `{}` carries no parent states", r.sample_id))
        })?;
        if states.len() != n || parents.iter().any(|p| !states.contains_key(p)) {
            let have: Vec<&str> = states.keys().map(String::as_str).collect();
            return Err(Error::data(format!(
                "sample `{}` has parent states for [{}], expected [{}]",
                r.sample_id,
                have.join(", "),
                parents.join(", ")
            )));
        }
        let key: Vec<&str> = parents.iter().map(|p| states[p].symbol()).collect();
        let row = row_index(&key.join(","), n).expect("key built from parent states");
        groups[row].1 += 1;
        if threshold.classify(r.uncertainty) == State::High {
            groups[row].0 += 1;
        }
    }
    let rows = row_keys(n)
        .into_iter()
        .zip(groups)
        .map(|(key, (n_high, n_total))| {
            if n_total == 0 {
                RowEstimate {
                    key,
                    p_high: UNESTIMATED_P_HIGH,
                    n_high,
                    n_total,
                    estimated: false,
                }
            } else {
                RowEstimate {
                    key,
                    p_high: n_high as f64 / n_total as f64,
                    n_high,
                    n_total,
                    estimated: true,
                }
            }
        })
        .collect();
    Ok(ConditionalEstimate {
        threshold,
        parents: parents.to_vec(),
        rows,
    })
}
