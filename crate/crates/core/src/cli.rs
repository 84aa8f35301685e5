//! `archprob` command line.
//!
//! Exit codes: 0 success, 1 data or validation error, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{compare, evaluate, sweep, RowTarget, SweepSpec};
use crate::arch::{AnnotatedArchitecture, CptSpec};
use crate::bn::Evidence;
use crate::calibration::{compute_threshold, estimate_conditional, estimate_prior};
use crate::io::{
    cpt_block, parse_architecture, parse_calibration_csv, serialize_architecture,
    write_comparison_csv, write_sweep_csv, ParseError,
};
use crate::patterns::{apply_n_version, NVersionSpec};
use crate::{fmt_prob, Error};

#[derive(Parser, Debug)]
#[command(
    name = "archprob",
    version,
    about = "Uncertainty propagation for software architectures with ML components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an architecture document and report every defect.
    Validate {
        arch: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print P(target = H | evidence).
    Eval {
        arch: PathBuf,
        #[arg(long)]
        target: String,
        /// Observed state, `<id>=<L|H>`; repeatable.
        #[arg(long, value_name = "ID=L|H")]
        evidence: Vec<String>,
    },
    /// Sweep CPT rows over a grid and write `t,p_high` CSV.
    Sweep {
        arch: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Sweep two architectures on the same grid and report crossings.
    Compare {
        arch_a: PathBuf,
        arch_b: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Apply an architectural pattern and write the transformed document.
    ApplyPattern {
        #[command(subcommand)]
        pattern: Pattern,
    },
    /// Derive the LOW/HIGH threshold and CPT probabilities from records.
    Calibrate {
        records: PathBuf,
        /// Parent columns to group by, comma separated.
        #[arg(long, value_delimiter = ',')]
        parents: Vec<String>,
        /// Print a CPT block for this variable id.
        #[arg(long, value_name = "VAR")]
        emit_cpt: Option<String>,
    },
    /// List components downstream of a changed component.
    Impact {
        arch: PathBuf,
        #[arg(long)]
        change: String,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    target: String,
    /// Rows to vary: `<var>@<row-key>`, `<var>@all`, a pattern such as `DE@H,*`,
    /// or parent conditions such as `DE@SU_DE=H`; repeatable.
    #[arg(long, required = true, value_name = "VAR@ROWS")]
    vary: Vec<String>,
    #[arg(long, value_name = "ID=L|H")]
    evidence: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Pattern {
    /// Add a monitor and a weighted voter behind an ML component.
    NVersion {
        arch: PathBuf,
        #[arg(long)]
        component: String,
        #[arg(long)]
        monitor: String,
        #[arg(long)]
        monitor_label: Option<String>,
        #[arg(long)]
        monitor_p_high: f64,
        #[arg(long)]
        weight: f64,
        #[arg(long, default_value = "Voter")]
        voter: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: format!("cannot read {}", path.display()),
        source,
    })
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            context: format!("cannot write {}", p.display()),
            source,
        }),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            context: "cannot write to standard output".into(),
            source,
        }),
    }
}

/// Parse errors carry the file name so messages read `path:line:col: ...`.
fn load_arch(path: &Path) -> Result<AnnotatedArchitecture, Error> {
    let text = read(path)?;
    parse_architecture(&text).map_err(|e| match e {
        ParseError::Semantic(diags) => Error::data(
            diags
                .iter()
                .map(|d| format!("{}:{}: {}", path.display(), d.location, d.finding))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Error::data(format!("{}:{other}", path.display())),
    })
}

fn parse_evidence(items: &[String]) -> Result<Evidence, Error> {
    let mut evidence = Evidence::new();
    for item in items {
        let (id, state) = Evidence::parse_item(item)?;
        evidence.insert(id, state)?;
    }
    Ok(evidence)
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, Error> {
    let vary = args
        .vary
        .iter()
        .map(|v| v.parse::<RowTarget>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepSpec::new(args.target.clone(), vary)
        .range(args.from, args.to, args.step)
        .evidence(parse_evidence(&args.evidence)?))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let io_err = |source| Error::Io {
        context: "cannot write output".into(),
        source,
    };
    match command {
        Command::Validate { arch, format } => validate(&arch, format, out),
        Command::Eval {
            arch,
            target,
            evidence,
        } => {
            let evidence = parse_evidence(&evidence)?;
            let net = load_arch(&arch)?.compile()?;
            let p = evaluate(&net, &target, &evidence)?;
            writeln!(out, "{}", fmt_prob(p)).map_err(io_err)?;
            Ok(0)
        }
        Command::Sweep { arch, sweep: args } => {
            let spec = sweep_spec(&args)?;
            let net = load_arch(&arch)?.compile()?;
            let result = sweep(&net, &spec)?;
            write_output(args.output.as_deref(), &write_sweep_csv(&result), out)?;
            Ok(0)
        }
        Command::Compare {
            arch_a,
            arch_b,
            sweep: args,
        } => {
            let spec = sweep_spec(&args)?;
            let a = load_arch(&arch_a)?.compile()?;
            let b = load_arch(&arch_b)?.compile()?;
            let result = compare(&a, &b, &spec)?;
            write_output(args.output.as_deref(), &write_comparison_csv(&result), out)?;
            if args.output.is_some() {
                for c in &result.crossings {
                    writeln!(err, "crossing {c}").map_err(io_err)?;
                }
            }
            Ok(0)
        }
        Command::ApplyPattern {
            pattern:
                Pattern::NVersion {
                    arch,
                    component,
                    monitor,
                    monitor_label,
                    monitor_p_high,
                    weight,
                    voter,
                    output,
                },
        } => {
            let input = load_arch(&arch)?;
            let mut spec =
                NVersionSpec::new(component, monitor, monitor_p_high, weight).with_voter_id(voter);
            if let Some(label) = monitor_label {
                spec = spec.with_monitor_label(label);
            }
            let transformed = apply_n_version(&input, &spec)?;
            write_output(
                output.as_deref(),
                &serialize_architecture(&transformed),
                out,
            )?;
            Ok(0)
        }
        Command::Calibrate {
            records,
            parents,
            emit_cpt,
        } => calibrate(&records, &parents, emit_cpt.as_deref(), out),
        Command::Impact { arch, change } => {
            let impacted = load_arch(&arch)?.change_impact(&change)?;
            for id in impacted {
                writeln!(out, "{id}").map_err(io_err)?;
            }
            Ok(0)
        }
    }
}

fn validate(path: &Path, format: Format, out: &mut dyn Write) -> Result<i32, Error> {
    let text = read(path)?;
    let io_err = |source| Error::Io {
        context: "cannot write output".into(),
        source,
    };
    let outcome = parse_architecture(&text).map(|arch| match arch.to_network() {
        Ok(net) => net.validate(),
        Err(Error::Invalid(report)) => report,
        Err(e) => unreachable!("to_network failed with {e}"),
    });
    let (ok, text_report, json) = match outcome {
        Ok(report) if report.is_ok() => (
            true,
            format!("{}: OK\n", path.display()),
            serde_json::json!({"file": path.display().to_string(), "ok": true, "findings": []}),
        ),
        Ok(report) => {
            let findings: Vec<serde_json::Value> = report
                .findings
                .iter()
                .map(|f| with_message(serde_json::to_value(f), f.to_string()))
                .collect();
            (
                false,
                format!(
                    "{}: {} finding(s)\n{report}\n",
                    path.display(),
                    report.findings.len()
                ),
                serde_json::json!({"file": path.display().to_string(), "ok": false, "findings": findings}),
            )
        }
        Err(ParseError::Semantic(diags)) => {
            let mut text_report = format!("{}: {} finding(s)\n", path.display(), diags.len());
            for d in &diags {
                text_report.push_str(&format!(
                    "{}:{}: {}\n",
                    path.display(),
                    d.location,
                    d.finding
                ));
            }
            let findings: Vec<serde_json::Value> = diags
                .iter()
                .map(|d| with_message(serde_json::to_value(d), d.finding.to_string()))
                .collect();
            (
                false,
                text_report,
                serde_json::json!({"file": path.display().to_string(), "ok": false, "findings": findings}),
            )
        }
        Err(e) => (
            false,
            format!("{}:{e}\n", path.display()),
            serde_json::json!({
                "file": path.display().to_string(),
                "ok": false,
                "error": {"kind": e.kind(), "location": e.location(), "message": e.to_string()},
            }),
        ),
    };
    match format {
        Format::Text => out.write_all(text_report.as_bytes()).map_err(io_err)?,
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&json).expect("json value")
        )
        .map_err(io_err)?,
    }
    Ok(if ok { 0 } else { 1 })
}

fn with_message(
    value: serde_json::Result<serde_json::Value>,
    message: String,
) -> serde_json::Value {
    let mut value = value.expect("findings serialize");
    if let Some(obj) = value.as_object_mut() {
        obj.insert("message".into(), serde_json::Value::String(message));
    }
    value
}

fn calibrate(
    path: &Path,
    parents: &[String],
    emit_cpt: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let text = read(path)?;
    let mut set = parse_calibration_csv(&text)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    if set.records.is_empty() {
        return Err(Error::data(format!("{}: no records", path.display())));
    }
    for p in parents {
        if !set.parent_columns.contains(p) {
            return Err(Error::data(format!(
                "{}: no parent column `{p}` (columns: [{}])",
                path.display(),
                set.parent_columns.join(", ")
            )));
        }
    }
    // keep only the requested parent columns
    for r in &mut set.records {
        if let Some(states) = r.parent_states.as_mut() {
            states.retain(|k, _| parents.contains(k));
        }
    }

    let threshold = compute_threshold(&set.records)?;
    let prior = estimate_prior(&set.records, threshold)?;
    let mut report = String::new();
    if threshold.is_sentinel() {
        report.push_str("threshold: inf (no misclassified samples; every sample is L)\n");
    } else {
        report.push_str(&format!("threshold: {threshold}\n"));
    }
    report.push_str(&format!(
        "p_high: {} ({}/{})\n",
        fmt_prob(prior.p_high),
        prior.n_high,
        prior.n_total
    ));

    let cpt = if parents.is_empty() {
        CptSpec {
            parents: vec![],
            rows: BTreeMap::from([(String::new(), prior.p_high)]),
        }
    } else {
        let est = estimate_conditional(&set.records, threshold, parents)?;
        report.push_str(&format!("rows ({}):\n", parents.join(",")));
        for row in &est.rows {
            let flag = if row.estimated { "" } else { ", unestimated" };
            report.push_str(&format!(
                "  {}: {} ({}/{}{flag})\n",
                row.key,
                fmt_prob(row.p_high),
                row.n_high,
                row.n_total
            ));
        }
        CptSpec {
            parents: parents.to_vec(),
            rows: est.cpt_rows(),
        }
    };
    if let Some(var) = emit_cpt {
        report.push('\n');
        report.push_str(&cpt_block(var, &cpt));
    }
    out.write_all(report.as_bytes())
        .map_err(|source| Error::Io {
            context: "cannot write output".into(),
            source,
        })?;
    Ok(0)
}
