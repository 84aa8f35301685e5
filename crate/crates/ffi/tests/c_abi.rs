use std::ffi::{CStr, CString};
use std::ptr;

use archprob_ffi::*;

const E2E: &str = include_str!("../../core/examples/end-to-end.arch");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = archprob_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut ArchprobArchitecture {
    let mut arch = ptr::null_mut();
    let text = c(text);
    assert_eq!(
        unsafe { archprob_architecture_parse(text.as_ptr(), &mut arch) },
        ArchprobStatus::Ok
    );
    arch
}

fn compile(arch: *const ArchprobArchitecture) -> *mut ArchprobNetwork {
    let mut net = ptr::null_mut();
    assert_eq!(
        unsafe { archprob_architecture_compile(arch, &mut net) },
        ArchprobStatus::Ok
    );
    net
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { archprob_string_free(p) };
    s
}

#[test]
fn evaluate_matches_brute_force() {
    let arch = parse(E2E);
    let net = compile(arch);
    let target = c("Planning");
    let evidence = c("SU_DE=H");
    let (mut ve, mut bf) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            archprob_network_evaluate(net, target.as_ptr(), evidence.as_ptr(), &mut ve),
            ArchprobStatus::Ok
        );
        assert_eq!(
            archprob_network_marginal_brute_force(net, target.as_ptr(), evidence.as_ptr(), &mut bf),
            ArchprobStatus::Ok
        );
        assert!((ve - bf).abs() < 1e-12);
        let mut prior = 0.0;
        assert_eq!(
            archprob_network_evaluate(net, target.as_ptr(), ptr::null(), &mut prior),
            ArchprobStatus::Ok
        );
        assert!((0.0..=1.0).contains(&prior));
        archprob_network_free(net);
        archprob_architecture_free(arch);
    }
}

#[test]
fn serialize_round_trips() {
    let arch = parse(E2E);
    let mut text = ptr::null_mut();
    assert_eq!(
        unsafe { archprob_architecture_serialize(arch, &mut text) },
        ArchprobStatus::Ok
    );
    let first = take_string(text);
    let again = parse(&first);
    let mut text2 = ptr::null_mut();
    assert_eq!(
        unsafe { archprob_architecture_serialize(again, &mut text2) },
        ArchprobStatus::Ok
    );
    assert_eq!(first, take_string(text2));
    unsafe {
        archprob_architecture_free(arch);
        archprob_architecture_free(again);
    }
}

#[test]
fn sweep_reports_needed_capacity() {
    let arch = parse(E2E);
    let net = compile(arch);
    let (target, vary) = (c("Planning"), c("DE@SU_DE=H;EU"));
    let mut len = 0usize;
    let mut t = vec![0.0; 101];
    let mut p = vec![0.0; 101];
    unsafe {
        let status = archprob_network_sweep(
            net,
            target.as_ptr(),
            vary.as_ptr(),
            ptr::null(),
            0.0,
            1.0,
            0.01,
            t.as_mut_ptr(),
            p.as_mut_ptr(),
            10,
            &mut len,
        );
        assert_eq!(status, ArchprobStatus::BufferTooSmall);
        assert_eq!(len, 101);
        let status = archprob_network_sweep(
            net,
            target.as_ptr(),
            vary.as_ptr(),
            ptr::null(),
            0.0,
            1.0,
            0.01,
            t.as_mut_ptr(),
            p.as_mut_ptr(),
            t.len(),
            &mut len,
        );
        assert_eq!(status, ArchprobStatus::Ok);
        archprob_network_free(net);
        archprob_architecture_free(arch);
    }
    assert_eq!((t[0], t[50], t[100]), (0.0, 0.5, 1.0));
    assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn n_version_and_impact() {
    let arch = parse(E2E);
    let (de, lidar) = (c("DE"), c("LIDAR"));
    let mut out = ptr::null_mut();
    let status = unsafe {
        archprob_apply_n_version(
            arch,
            de.as_ptr(),
            lidar.as_ptr(),
            0.1,
            0.9,
            ptr::null(),
            &mut out,
        )
    };
    assert_eq!(status, ArchprobStatus::Ok);
    let mut list = ptr::null_mut();
    assert_eq!(
        unsafe { archprob_change_impact(out, de.as_ptr(), &mut list) },
        ArchprobStatus::Ok
    );
    assert_eq!(take_string(list), "Voter\nSS\nPlanning");

    let net = compile(out);
    let (voter, mut p) = (c("Voter"), 0.0);
    assert_eq!(
        unsafe { archprob_network_evaluate(net, voter.as_ptr(), ptr::null(), &mut p) },
        ArchprobStatus::Ok
    );
    let mut p_de = 0.0;
    assert_eq!(
        unsafe { archprob_network_evaluate(net, de.as_ptr(), ptr::null(), &mut p_de) },
        ArchprobStatus::Ok
    );
    assert!((p - (0.9 * 0.1 + 0.1 * p_de)).abs() < 1e-12);
    unsafe {
        archprob_network_free(net);
        archprob_architecture_free(out);
        archprob_architecture_free(arch);
    }
}

#[test]
fn errors_have_codes_and_messages() {
    let mut arch = ptr::null_mut();
    assert_eq!(
        unsafe { archprob_architecture_parse(ptr::null(), &mut arch) },
        ArchprobStatus::NullPointer
    );
    assert!(last_error().contains("text"));

    let bad = c("name = \"x\"\n[[components]\n");
    assert_eq!(
        unsafe { archprob_architecture_parse(bad.as_ptr(), &mut arch) },
        ArchprobStatus::Parse
    );
    assert!(arch.is_null());

    let cyclic = E2E.replacen(
        "[[uncertainties]]",
        "[[edges]]\nfrom = \"Planning\"\nto = \"OD\"\n\n[[uncertainties]]",
        1,
    );
    let cyclic = c(&cyclic);
    assert_eq!(
        unsafe { archprob_architecture_parse(cyclic.as_ptr(), &mut arch) },
        ArchprobStatus::Parse
    );
    assert!(last_error().contains("cycle"), "{}", last_error());

    let good = parse(E2E);
    let net = compile(good);
    let (target, mut p) = (c("Nope"), 0.0);
    assert_eq!(
        unsafe { archprob_network_evaluate(net, target.as_ptr(), ptr::null(), &mut p) },
        ArchprobStatus::Usage
    );
    let (target, evidence) = (c("Planning"), c("SU_DE=Q"));
    assert_eq!(
        unsafe { archprob_network_evaluate(net, target.as_ptr(), evidence.as_ptr(), &mut p) },
        ArchprobStatus::Usage
    );
    let invalid = [0xffu8, 0];
    assert_eq!(
        unsafe { archprob_network_evaluate(net, invalid.as_ptr().cast(), ptr::null(), &mut p) },
        ArchprobStatus::InvalidUtf8
    );
    unsafe {
        archprob_network_free(net);
        archprob_architecture_free(good);
        archprob_architecture_free(ptr::null_mut());
        archprob_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = include_str!("../include/archprob.h");
    for name in [
        "archprob_architecture_parse",
        "archprob_network_sweep",
        "ARCHPROB_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
