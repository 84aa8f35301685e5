//! Plot-ready CSV for sweeps and comparisons.

use std::fmt::Write as _;

use crate::analysis::{ComparisonResult, SweepResult};
use crate::fmt_prob;

/// `t,p_high` rows in ascending `t`.
pub fn write_sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("t,p_high\n");
    for p in &result.points {
        let _ = writeln!(out, "{},{}", fmt_prob(p.t), fmt_prob(p.p_high));
    }
    out
}

/// `t,p_high_a,p_high_b,delta` rows, then a comment block with the
/// endpoint / nominal deltas and every crossing.
pub fn write_comparison_csv(result: &ComparisonResult) -> String {
    let mut out = String::from("t,p_high_a,p_high_b,delta\n");
    for (a, b) in result.a.points.iter().zip(&result.b.points) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_prob(a.t),
            fmt_prob(a.p_high),
            fmt_prob(b.p_high),
            fmt_prob(a.p_high - b.p_high)
        );
    }
    let d = &result.deltas;
    let _ = writeln!(
        out,
        "# delta from={} to={} nominal={}",
        fmt_prob(d.at_from),
        fmt_prob(d.at_to),
        fmt_prob(d.nominal)
    );
    if result.crossings.is_empty() {
        out.push_str("# no crossings\n");
    }
    for c in &result.crossings {
        let _ = writeln!(out, "# crossing {c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{
        ComparisonDeltas, Crossing, CrossingDirection, SweepPoint, SweepResult, SweepSpec,
    };

    fn result(points: &[(f64, f64)]) -> SweepResult {
        SweepResult {
            network: "n".into(),
            spec: SweepSpec::new("B", vec![]),
            points: points
                .iter()
                .map(|&(t, p_high)| SweepPoint { t, p_high })
                .collect(),
        }
    }

    #[test]
    fn sweep_rows() {
        let text = write_sweep_csv(&result(&[(0.0, 0.2), (0.5, 0.55), (1.0, 0.9)]));
        assert_eq!(text, "t,p_high\n0,0.2\n0.5,0.55\n1,0.9\n");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn comparison_lists_crossings() {
        let cmp = ComparisonResult {
            a: result(&[(0.0, 0.2), (1.0, 0.9)]),
            b: result(&[(0.0, 0.8), (1.0, 0.3)]),
            crossings: vec![Crossing {
                lower: 0.0,
                upper: 1.0,
                t: 0.5,
                direction: CrossingDirection::ABecomesHigher,
            }],
            deltas: ComparisonDeltas {
                at_from: -0.6,
                at_to: 0.6,
                nominal: 0.0,
            },
        };
        let text = write_comparison_csv(&cmp);
        assert!(text.starts_with("t,p_high_a,p_high_b,delta\n0,0.2,0.8,"));
        assert!(
            text.contains("# crossing t≈0.5 in [0,1] a_becomes_higher\n"),
            "{text}"
        );
    }
}
