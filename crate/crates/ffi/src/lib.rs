//! C ABI over `archprob`.
//!
//! Every function returns an [`ArchprobStatus`]. On failure a message is kept
//! per thread and can be read with [`archprob_last_error_message`]. Objects
//! are opaque handles released with their `_free` function; strings returned
//! through out-parameters are released with [`archprob_string_free`].
//!
//! Lists passed as strings: evidence is `"A=H,B=L"`, sweep selectors are
//! separated by `;` (`"DE@SU_DE=H;EU"`) because row keys contain commas.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use archprob::analysis::{evaluate, sweep, RowTarget, SweepSpec};
use archprob::arch::AnnotatedArchitecture;
use archprob::bn::{marginal_brute_force, CompiledNetwork, Evidence};
use archprob::io::{parse_architecture, serialize_architecture};
use archprob::patterns::{apply_n_version, NVersionSpec};
use archprob::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchprobStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Usage = 5,
    ImpossibleEvidence = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Data = 9,
}

/// A parsed and validated architecture document.
pub struct ArchprobArchitecture(AnnotatedArchitecture);

/// A compiled Bayesian network.
pub struct ArchprobNetwork(CompiledNetwork);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ArchprobStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => ArchprobStatus::Parse,
            Error::Invalid(_) => ArchprobStatus::Validation,
            Error::ImpossibleEvidence(_) => ArchprobStatus::ImpossibleEvidence,
            e if e.is_usage() => ArchprobStatus::Usage,
            _ => ArchprobStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ArchprobStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArchprobStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal error: panic caught at the C boundary");
            ArchprobStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(
            ArchprobStatus::NullPointer,
            format!("`{name}` is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            ArchprobStatus::InvalidUtf8,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(ArchprobStatus::NullPointer, format!("`{name}` is null")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(
            ArchprobStatus::NullPointer,
            format!("`{name}` is null"),
        ))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        Failure(
            ArchprobStatus::Internal,
            "output contains a NUL byte".into(),
        )
    })
}

fn parse_evidence(text: Option<&str>) -> Result<Evidence, Failure> {
    let mut evidence = Evidence::new();
    for item in text
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let (id, state) = Evidence::parse_item(item)?;
        evidence.insert(id, state)?;
    }
    Ok(evidence)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn archprob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates an architecture document.
#[no_mangle]
pub unsafe extern "C" fn archprob_architecture_parse(
    text: *const c_char,
    out: *mut *mut ArchprobArchitecture,
) -> ArchprobStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = str_arg(text, "text")?;
        let arch = parse_architecture(text).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(ArchprobArchitecture(arch)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn archprob_architecture_free(arch: *mut ArchprobArchitecture) {
    if !arch.is_null() {
        drop(Box::from_raw(arch));
    }
}

/// Canonical document text; free with [`archprob_string_free`].
#[no_mangle]
pub unsafe extern "C" fn archprob_architecture_serialize(
    arch: *const ArchprobArchitecture,
    out: *mut *mut c_char,
) -> ArchprobStatus {
    guard(|| {
        check_out(out, "out")?;
        let arch = handle(arch, "arch")?;
        *out = to_c_string(serialize_architecture(&arch.0))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn archprob_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn archprob_architecture_compile(
    arch: *const ArchprobArchitecture,
    out: *mut *mut ArchprobNetwork,
) -> ArchprobStatus {
    guard(|| {
        check_out(out, "out")?;
        let arch = handle(arch, "arch")?;
        let net = arch.0.compile()?;
        *out = Box::into_raw(Box::new(ArchprobNetwork(net)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn archprob_network_free(net: *mut ArchprobNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Adds a monitor and weighted voter behind `component`. `voter_id` may be
/// null for the default id `Voter`. The input handle is left unchanged.
#[no_mangle]
pub unsafe extern "C" fn archprob_apply_n_version(
    arch: *const ArchprobArchitecture,
    component: *const c_char,
    monitor_id: *const c_char,
    monitor_p_high: f64,
    weight: f64,
    voter_id: *const c_char,
    out: *mut *mut ArchprobArchitecture,
) -> ArchprobStatus {
    guard(|| {
        check_out(out, "out")?;
        let arch = handle(arch, "arch")?;
        let mut spec = NVersionSpec::new(
            str_arg(component, "component")?,
            str_arg(monitor_id, "monitor_id")?,
            monitor_p_high,
            weight,
        );
        if let Some(v) = opt_str_arg(voter_id, "voter_id")? {
            spec = spec.with_voter_id(v);
        }
        let transformed = apply_n_version(&arch.0, &spec)?;
        *out = Box::into_raw(Box::new(ArchprobArchitecture(transformed)));
        Ok(())
    })
}

/// Downstream components of `component`, newline separated; free with
/// [`archprob_string_free`].
#[no_mangle]
pub unsafe extern "C" fn archprob_change_impact(
    arch: *const ArchprobArchitecture,
    component: *const c_char,
    out: *mut *mut c_char,
) -> ArchprobStatus {
    guard(|| {
        check_out(out, "out")?;
        let arch = handle(arch, "arch")?;
        let affected = arch.0.change_impact(str_arg(component, "component")?)?;
        *out = to_c_string(affected.join("\n"))?;
        Ok(())
    })
}

/// `P(target = H | evidence)` by variable elimination. `evidence` may be null.
#[no_mangle]
pub unsafe extern "C" fn archprob_network_evaluate(
    net: *const ArchprobNetwork,
    target: *const c_char,
    evidence: *const c_char,
    out_p_high: *mut f64,
) -> ArchprobStatus {
    guard(|| {
        check_out(out_p_high, "out_p_high")?;
        let net = handle(net, "net")?;
        let evidence = parse_evidence(opt_str_arg(evidence, "evidence")?)?;
        *out_p_high = evaluate(&net.0, str_arg(target, "target")?, &evidence)?;
        Ok(())
    })
}

/// Same query by full enumeration; for small networks and cross-checks.
#[no_mangle]
pub unsafe extern "C" fn archprob_network_marginal_brute_force(
    net: *const ArchprobNetwork,
    target: *const c_char,
    evidence: *const c_char,
    out_p_high: *mut f64,
) -> ArchprobStatus {
    guard(|| {
        check_out(out_p_high, "out_p_high")?;
        let net = handle(net, "net")?;
        let evidence = parse_evidence(opt_str_arg(evidence, "evidence")?)?;
        *out_p_high = marginal_brute_force(&net.0, str_arg(target, "target")?, &evidence)?.high;
        Ok(())
    })
}

/// Sweeps the selected rows over `[from, to]` and writes grid points into
/// `out_t` / `out_p_high`, each of `capacity` elements. `out_len` receives
/// the number of points; with `BufferTooSmall` it holds the size needed.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn archprob_network_sweep(
    net: *const ArchprobNetwork,
    target: *const c_char,
    vary: *const c_char,
    evidence: *const c_char,
    from: f64,
    to: f64,
    step: f64,
    out_t: *mut f64,
    out_p_high: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> ArchprobStatus {
    guard(|| {
        check_out(out_len, "out_len")?;
        let net = handle(net, "net")?;
        let vary = str_arg(vary, "vary")?
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse::<RowTarget>)
            .collect::<Result<Vec<_>, _>>()?;
        let spec = SweepSpec::new(str_arg(target, "target")?, vary)
            .range(from, to, step)
            .evidence(parse_evidence(opt_str_arg(evidence, "evidence")?)?);
        let result = sweep(&net.0, &spec)?;
        let n = result.points.len();
        *out_len = n;
        if n > capacity {
            return Err(Failure(
                ArchprobStatus::BufferTooSmall,
                format!("sweep has {n} points but the buffers hold {capacity}"),
            ));
        }
        check_out(out_t, "out_t")?;
        check_out(out_p_high, "out_p_high")?;
        for (i, point) in result.points.iter().enumerate() {
            *out_t.add(i) = point.t;
            *out_p_high.add(i) = point.p_high;
        }
        Ok(())
    })
}
