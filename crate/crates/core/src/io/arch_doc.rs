//! TOML architecture documents.
//!
//! ```toml
//! name = "example"
//!
//! [[components]]
//! id = "DE"
//! kind = "ml"            # ml | classical | sensor | voter
//! label = "Depth estimation"
//!
//! [[edges]]
//! from = "DE"
//! to = "Planning"
//!
//! [[uncertainties]]
//! id = "SU_DE"
//! kind = "stochastic"    # epistemic | stochastic
//! attaches_to = ["DE"]
//!
//! [cpts.DE]
//! parents = ["SU_DE"]
//!
//! [cpts.DE.rows]
//! "L" = 0.1
//! "H" = 0.7
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Deserialize;
use toml::Spanned;

use super::{Diagnostic, Location, ParseError};
use crate::arch::{
    AnnotatedArchitecture, Component, ComponentKind, CptSpec, Edge, UncertaintyAnnotation,
    UncertaintyKind,
};
use crate::bn::{row_index, row_keys, Finding};

const HEADER: &str = "\
# Annotated architecture document.
# CPT rows give P(variable = H | parent states). Row keys are the parent states
# (L or H) joined by commas in `parents` order; a root has the single key \"\".
# Component parents are its uncertainties (declaration order) followed by its
# data-flow predecessors (edge order).
";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: String,
    #[serde(default)]
    components: Vec<Spanned<RawComponent>>,
    #[serde(default)]
    edges: Vec<Spanned<RawEdge>>,
    #[serde(default)]
    uncertainties: Vec<Spanned<RawUncertainty>>,
    #[serde(default)]
    cpts: BTreeMap<String, Spanned<RawCpt>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    id: String,
    kind: Spanned<String>,
    #[serde(default)]
    label: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUncertainty {
    id: String,
    kind: Spanned<String>,
    attaches_to: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCpt {
    #[serde(default)]
    parents: Vec<String>,
    rows: Spanned<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Subject {
    Component(String),
    Edge(String, String),
    Uncertainty(String),
    Cpt(String),
    CptRows(String),
}

/// Where each document item was declared; later declarations win so that
/// duplicate-id findings point at the duplicate.
#[derive(Default)]
struct SourceMap(HashMap<Subject, Location>);

impl SourceMap {
    fn get(&self, subject: Subject) -> Option<Location> {
        self.0.get(&subject).copied()
    }

    fn locate(&self, finding: &Finding) -> Location {
        use Subject::*;
        let candidates: Vec<Subject> = match finding {
            Finding::Cycle { path } => path
                .first()
                .map(|c| vec![Component(c.clone())])
                .unwrap_or_default(),
            Finding::DanglingParent { variable, .. }
            | Finding::RootHasParents { variable, .. }
            | Finding::DuplicateCpt { variable }
            | Finding::OrphanCpt { variable }
            | Finding::CptParentMismatch { variable, .. } => vec![Cpt(variable.clone())],
            Finding::DuplicateParent { variable, parent } => {
                vec![Uncertainty(parent.clone()), Cpt(variable.clone())]
            }
            Finding::DuplicateId { id } => vec![Uncertainty(id.clone()), Component(id.clone())],
            Finding::MissingCpt { variable, .. } => {
                vec![Component(variable.clone()), Uncertainty(variable.clone())]
            }
            Finding::MissingCptRow { variable, .. }
            | Finding::ExtraCptRow { variable, .. }
            | Finding::ProbabilityOutOfRange { variable, .. } => {
                vec![CptRows(variable.clone()), Cpt(variable.clone())]
            }
            Finding::UnknownEdgeEndpoint { from, to, .. } | Finding::DuplicateEdge { from, to } => {
                vec![Edge(from.clone(), to.clone())]
            }
            Finding::EmptyAnnotation { annotation }
            | Finding::UnknownAnnotationTarget { annotation, .. }
            | Finding::NonMlAnnotationTarget { annotation, .. }
            | Finding::StochasticSharedTarget { annotation, .. } => {
                vec![Uncertainty(annotation.clone())]
            }
            Finding::SensorWithInputs { component, .. } => vec![Component(component.clone())],
            Finding::EmptyId | Finding::NoComponents => vec![],
        };
        candidates
            .into_iter()
            .find_map(|s| self.get(s))
            .unwrap_or(Location::START)
    }
}

fn toml_error(text: &str, err: toml::de::Error, schema: bool) -> ParseError {
    let location = err
        .span()
        .map_or(Location::START, |s| Location::from_offset(text, s.start));
    let message = err.message().trim().to_string();
    if schema {
        ParseError::Schema { location, message }
    } else {
        ParseError::Syntax { location, message }
    }
}

fn parse_with_sources(text: &str) -> Result<(AnnotatedArchitecture, SourceMap), ParseError> {
    // Syntax first, so a malformed file is not reported as a schema problem.
    text.parse::<toml::Table>()
        .map_err(|e| toml_error(text, e, false))?;
    let raw: RawDocument = toml::from_str(text).map_err(|e| toml_error(text, e, true))?;

    let loc = |span: std::ops::Range<usize>| Location::from_offset(text, span.start);
    let mut sources = SourceMap::default();
    let mut arch = AnnotatedArchitecture {
        name: raw.name,
        ..Default::default()
    };

    for item in raw.components {
        let at = loc(item.span());
        let c = item.into_inner();
        let kind_at = loc(c.kind.span());
        let kind = c
            .kind
            .into_inner()
            .parse::<ComponentKind>()
            .map_err(|message| ParseError::Schema {
                location: kind_at,
                message,
            })?;
        sources.0.insert(Subject::Component(c.id.clone()), at);
        arch.components.push(Component {
            id: c.id,
            kind,
            label: c.label,
        });
    }
    for item in raw.edges {
        let at = loc(item.span());
        let e = item.into_inner();
        sources
            .0
            .insert(Subject::Edge(e.from.clone(), e.to.clone()), at);
        arch.edges.push(Edge {
            from: e.from,
            to: e.to,
        });
    }
    for item in raw.uncertainties {
        let at = loc(item.span());
        let u = item.into_inner();
        let kind_at = loc(u.kind.span());
        let kind = u
            .kind
            .into_inner()
            .parse::<UncertaintyKind>()
            .map_err(|message| ParseError::Schema {
                location: kind_at,
                message,
            })?;
        sources.0.insert(Subject::Uncertainty(u.id.clone()), at);
        arch.uncertainties.push(UncertaintyAnnotation {
            id: u.id,
            kind,
            attaches_to: u.attaches_to,
        });
    }
    for (id, item) in raw.cpts {
        sources.0.insert(Subject::Cpt(id.clone()), loc(item.span()));
        let cpt = item.into_inner();
        sources
            .0
            .insert(Subject::CptRows(id.clone()), loc(cpt.rows.span()));
        arch.cpts.insert(
            id,
            CptSpec {
                parents: cpt.parents,
                rows: cpt.rows.into_inner(),
            },
        );
    }
    Ok((arch, sources))
}

/// Parses a document without checking architecture invariants. Syntax and
/// schema errors are still reported.
pub fn parse_architecture_unchecked(text: &str) -> Result<AnnotatedArchitecture, ParseError> {
    parse_with_sources(text).map(|(arch, _)| arch)
}

/// Parses a document and checks every architecture invariant, reporting
/// violations as located [`Diagnostic`]s.
pub fn parse_architecture(text: &str) -> Result<AnnotatedArchitecture, ParseError> {
    let (arch, sources) = parse_with_sources(text)?;
    let report = arch.validate();
    if report.is_ok() {
        return Ok(arch);
    }
    let mut diagnostics: Vec<Diagnostic> = report
        .findings
        .into_iter()
        .map(|finding| Diagnostic {
            location: sources.locate(&finding),
            finding,
        })
        .collect();
    diagnostics.sort_by_key(|d| d.location);
    Err(ParseError::Semantic(diagnostics))
}

/// Canonical document text. Items keep declaration order; CPTs follow
/// uncertainties then components; CPT rows are in canonical key order.
pub fn serialize_architecture(arch: &AnnotatedArchitecture) -> String {
    let mut out = String::from(HEADER);
    let _ = writeln!(out, "\nname = {}", quote(&arch.name));

    for c in &arch.components {
        let _ = write!(
            out,
            "\n[[components]]\nid = {}\nkind = {}\nlabel = {}\n",
            quote(&c.id),
            quote(c.kind.as_str()),
            quote(&c.label)
        );
    }
    for e in &arch.edges {
        let _ = write!(
            out,
            "\n[[edges]]\nfrom = {}\nto = {}\n",
            quote(&e.from),
            quote(&e.to)
        );
    }
    for u in &arch.uncertainties {
        let _ = write!(
            out,
            "\n[[uncertainties]]\nid = {}\nkind = {}\nattaches_to = {}\n",
            quote(&u.id),
            quote(u.kind.as_str()),
            string_list(&u.attaches_to)
        );
    }

    let mut order: Vec<&str> = Vec::new();
    let declared = arch
        .uncertainties
        .iter()
        .map(|u| u.id.as_str())
        .chain(arch.components.iter().map(|c| c.id.as_str()));
    for id in declared.chain(arch.cpts.keys().map(String::as_str)) {
        if arch.cpts.contains_key(id) && !order.contains(&id) {
            order.push(id);
        }
    }
    for id in order {
        out.push('\n');
        out.push_str(&cpt_block(id, &arch.cpts[id]));
    }
    out
}

/// `[cpts.<id>]` table followed by its rows table.
pub(crate) fn cpt_block(id: &str, cpt: &CptSpec) -> String {
    let key = bare_or_quoted(id);
    let mut out = format!(
        "[cpts.{key}]\nparents = {}\n\n[cpts.{key}.rows]\n",
        string_list(&cpt.parents)
    );
    let n = cpt.parents.len();
    let mut keys: Vec<String> = if n <= 16 {
        row_keys(n)
            .into_iter()
            .filter(|k| cpt.rows.contains_key(k))
            .collect()
    } else {
        Vec::new()
    };
    keys.extend(
        cpt.rows
            .keys()
            .filter(|k| n > 16 || row_index(k, n).is_none())
            .cloned(),
    );
    for k in keys {
        let _ = writeln!(out, "{} = {}", quote(&k), toml_float(cpt.rows[&k]));
    }
    out
}

fn string_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", quoted.join(", "))
}

fn bare_or_quoted(key: &str) -> String {
    let bare = !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        key.to_string()
    } else {
        quote(key)
    }
}

/// TOML basic string.
fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Shortest round-trip decimal, with `.0` added where TOML needs it to read a float.
fn toml_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = crate::fmt_prob(v);
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        s + ".0"
    }
}
