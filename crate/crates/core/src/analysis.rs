//! Uncertainty-impact queries and sensitivity sweeps over CPT entries.

use std::fmt;
use std::str::FromStr;

use crate::bn::{marginal_ve, row_index, row_keys, CompiledNetwork, Evidence, State};
use crate::{fmt_prob, Error, Result};

/// Tolerance for the step dividing the sweep range into whole intervals.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// `P(target = H | evidence)`.
pub fn evaluate(net: &CompiledNetwork, target: &str, evidence: &Evidence) -> Result<f64> {
    Ok(marginal_ve(net, target, evidence)?.high)
}

/// Which CPT rows of a variable a sweep overwrites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowSelector {
    All,
    /// A row key; `*` in a position matches either state (`"H,*"`).
    Key(String),
    /// Rows where each named parent is in the given state (`SU_DE=H`), any
    /// state for the others. Works across networks whose parent lists differ.
    Where(Vec<(String, State)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowTarget {
    pub variable: String,
    pub rows: RowSelector,
}

impl FromStr for RowTarget {
    type Err = Error;

    /// `var@all`, `var@H,L`, `var@H,*`, `var@SU=H`, `var@` (the root row), or bare `var` (all rows).
    fn from_str(s: &str) -> Result<Self> {
        let (variable, rows) = match s.split_once('@') {
            None => (s, RowSelector::All),
            Some((v, "all")) => (v, RowSelector::All),
            Some((v, cond)) if cond.contains('=') => {
                let pairs = cond
                    .split(',')
                    .map(|c| {
                        let (p, state) = c.split_once('=').ok_or_else(|| {
                            Error::usage(format!(
                                "condition `{c}` in `{s}` must look like <parent>=<L|H>"
                            ))
                        })?;
                        Ok((p.to_string(), state.parse::<State>()?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (v, RowSelector::Where(pairs))
            }
            Some((v, key)) => (v, RowSelector::Key(key.to_string())),
        };
        if variable.is_empty() {
            return Err(Error::usage(format!("row selector `{s}` has no variable")));
        }
        Ok(RowTarget {
            variable: variable.to_string(),
            rows,
        })
    }
}

impl fmt::Display for RowTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rows {
            RowSelector::All => write!(f, "{}@all", self.variable),
            RowSelector::Key(k) => write!(f, "{}@{k}", self.variable),
            RowSelector::Where(pairs) => {
                let conds: Vec<String> = pairs.iter().map(|(p, s)| format!("{p}={s}")).collect();
                write!(f, "{}@{}", self.variable, conds.join(","))
            }
        }
    }
}

impl RowTarget {
    /// `(variable index, row index)` pairs selected in `net`.
    pub fn resolve(&self, net: &CompiledNetwork) -> Result<Vec<(usize, usize)>> {
        let var = net.index_of(&self.variable)?;
        let n = net.parents(var).len();
        let rows: Vec<usize> = match &self.rows {
            RowSelector::All => (0..1 << n).collect(),
            RowSelector::Key(key) if key.contains('*') => {
                let pattern: Vec<&str> = key.split(',').collect();
                if pattern.len() != n || pattern.iter().any(|p| !matches!(*p, "L" | "H" | "*")) {
                    return Err(Error::usage(format!(
                        "row pattern `{key}` does not fit the {n} parents of `{}`",
                        self.variable
                    )));
                }
                row_keys(n)
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| {
                        k.split(',')
                            .zip(&pattern)
                            .all(|(s, p)| *p == "*" || s == *p)
                    })
                    .map(|(i, _)| i)
                    .collect()
            }
            RowSelector::Where(pairs) => {
                let mut fixed = Vec::with_capacity(pairs.len());
                for (parent, state) in pairs {
                    let pos = net
                        .parents(var)
                        .iter()
                        .position(|&p| net.id(p) == parent)
                        .ok_or_else(|| {
                            Error::usage(format!(
                                "`{parent}` is not a parent of `{}`",
                                self.variable
                            ))
                        })?;
                    fixed.push((pos, *state));
                }
                (0..1usize << n)
                    .filter(|row| {
                        fixed
                            .iter()
                            .all(|&(pos, state)| (row >> (n - 1 - pos)) & 1 == state.index())
                    })
                    .collect()
            }
            RowSelector::Key(key) => vec![row_index(key, n).ok_or_else(|| {
                Error::usage(format!(
                    "`{key}` is not a row of `{}` (parents: [{}])",
                    self.variable,
                    net.parents(var)
                        .iter()
                        .map(|&p| net.id(p))
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?],
        };
        if rows.is_empty() {
            return Err(Error::usage(format!(
                "selector `{self}` matches no CPT rows"
            )));
        }
        Ok(rows.into_iter().map(|r| (var, r)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub vary: Vec<RowTarget>,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub query: String,
    pub evidence: Evidence,
}

impl SweepSpec {
    pub fn new(query: impl Into<String>, vary: Vec<RowTarget>) -> Self {
        SweepSpec {
            vary,
            from: 0.0,
            to: 1.0,
            step: 0.01,
            query: query.into(),
            evidence: Evidence::new(),
        }
    }

    pub fn range(mut self, from: f64, to: f64, step: f64) -> Self {
        self.from = from;
        self.to = to;
        self.step = step;
        self
    }

    pub fn evidence(mut self, evidence: Evidence) -> Self {
        self.evidence = evidence;
        self
    }

    /// Grid points `from + (to − from)·i / n` for `i = 0..=n`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let (from, to, step) = (self.from, self.to, self.step);
        if !(from.is_finite()
            && to.is_finite()
            && (0.0..=1.0).contains(&from)
            && to <= 1.0
            && from < to)
        {
            return Err(Error::usage(format!(
                "sweep range must satisfy 0 <= from < to <= 1, got [{from}, {to}]"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::usage(format!(
                "sweep step must be positive, got {step}"
            )));
        }
        let span = to - from;
        let intervals = (span / step).round();
        if intervals < 1.0 || (intervals * step - span).abs() > GRID_TOLERANCE || intervals > 1e7 {
            return Err(Error::usage(format!(
                "step {step} does not divide [{from}, {to}] into whole intervals"
            )));
        }
        let n = intervals as usize;
        Ok((0..=n)
            .map(|i| {
                if i == n {
                    to
                } else {
                    from + span * i as f64 / n as f64
                }
            })
            .collect())
    }

    fn resolve(&self, net: &CompiledNetwork) -> Result<Vec<(usize, usize)>> {
        if self.vary.is_empty() {
            return Err(Error::usage("sweep needs at least one row selector"));
        }
        net.index_of(&self.query)?;
        let mut cells = Vec::new();
        for target in &self.vary {
            for cell in target.resolve(net)? {
                if !cells.contains(&cell) {
                    cells.push(cell);
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t: f64,
    pub p_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub network: String,
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

/// Writes each grid value into every selected CPT row of a working copy and
/// evaluates the query. `net` is not modified.
pub fn sweep(net: &CompiledNetwork, spec: &SweepSpec) -> Result<SweepResult> {
    let grid = spec.grid()?;
    let cells = spec.resolve(net)?;
    net.resolve_evidence(&spec.evidence)?;
    let mut work = net.clone();
    let mut points = Vec::with_capacity(grid.len());
    for t in grid {
        for &(var, row) in &cells {
            work.set_p_high(var, row, t)?;
        }
        points.push(SweepPoint {
            t,
            p_high: evaluate(&work, &spec.query, &spec.evidence)?,
        });
    }
    Ok(SweepResult {
        network: net.name().to_string(),
        spec: spec.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// `p_a − p_b` goes from positive to negative.
    ABecomesLower,
    /// `p_a − p_b` goes from negative to positive.
    ABecomesHigher,
}

impl fmt::Display for CrossingDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossingDirection::ABecomesLower => "a_becomes_lower",
            CrossingDirection::ABecomesHigher => "a_becomes_higher",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Bracketing grid interval.
    pub lower: f64,
    pub upper: f64,
    /// Linear-interpolation estimate (the grid point itself for an exact zero).
    pub t: f64,
    pub direction: CrossingDirection,
}

/// Sign changes of `a − b` between two curves on the same grid.
///
/// A strict sign change between neighbours yields an interpolated crossing.
/// Exact zeros between values of opposite sign yield a crossing at the zero
/// (the midpoint of a run of zeros). Zeros without a sign change are touches
/// and yield nothing.
pub fn find_crossings(a: &[SweepPoint], b: &[SweepPoint]) -> Result<Vec<Crossing>> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.t != y.t) {
        return Err(Error::usage("curves are not on the same grid"));
    }
    if a.windows(2).any(|w| w[0].t >= w[1].t) {
        return Err(Error::usage("grid is not strictly increasing"));
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.p_high - y.p_high).collect();
    let mut crossings = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, &d) in diff.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            let dp = diff[p];
            if dp.signum() != d.signum() {
                let direction = if dp > 0.0 {
                    CrossingDirection::ABecomesLower
                } else {
                    CrossingDirection::ABecomesHigher
                };
                let crossing = if p + 1 == i {
                    let (t0, t1) = (a[p].t, a[i].t);
                    Crossing {
                        lower: t0,
                        upper: t1,
                        t: t0 + (t1 - t0) * dp / (dp - d),
                        direction,
                    }
                } else {
                    let (z0, z1) = (a[p + 1].t, a[i - 1].t);
                    Crossing {
                        lower: z0,
                        upper: z1,
                        t: if p + 2 == i { z0 } else { (z0 + z1) / 2.0 },
                        direction,
                    }
                };
                crossings.push(crossing);
            }
        }
        prev = Some(i);
    }
    Ok(crossings)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonDeltas {
    pub at_from: f64,
    pub at_to: f64,
    /// `p_a − p_b` with both networks' own CPT values (no row overwritten).
    pub nominal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub a: SweepResult,
    pub b: SweepResult,
    pub crossings: Vec<Crossing>,
    pub deltas: ComparisonDeltas,
}

pub fn compare(
    a: &CompiledNetwork,
    b: &CompiledNetwork,
    spec: &SweepSpec,
) -> Result<ComparisonResult> {
    let label = |net: &CompiledNetwork, e: Error| match e {
        Error::Usage(_) | Error::UnknownVariable(_) => {
            Error::usage(format!("network `{}`: {e}", net.name()))
        }
        other => other,
    };
    let sa = sweep(a, spec).map_err(|e| label(a, e))?;
    let sb = sweep(b, spec).map_err(|e| label(b, e))?;
    let crossings = find_crossings(&sa.points, &sb.points)?;
    let nominal =
        evaluate(a, &spec.query, &spec.evidence)? - evaluate(b, &spec.query, &spec.evidence)?;
    let first = |r: &SweepResult| r.points[0].p_high;
    let last = |r: &SweepResult| r.points[r.points.len() - 1].p_high;
    let deltas = ComparisonDeltas {
        at_from: first(&sa) - first(&sb),
        at_to: last(&sa) - last(&sb),
        nominal,
    };
    Ok(ComparisonResult {
        a: sa,
        b: sb,
        crossings,
        deltas,
    })
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t≈{} in [{},{}] {}",
            fmt_prob(self.t),
            fmt_prob(self.lower),
            fmt_prob(self.upper),
            self.direction
        )
    }
}
