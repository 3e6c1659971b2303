use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use polling_ffi::*;

const NULL_RECURRENT: &str = "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 0.5 1.25 0\n  atom 0.5 3 0\nstation 1\n  atom 1 3 0\naction classify\nseed 11\n";
const TRANSIENT: &str =
    "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 1.25 0\nstation 1\n  atom 1 1.5 0\naction classify\n";

fn handle(text: &str) -> *mut PollingSpecHandle {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { polling_spec_from_plan_text(c.as_ptr(), &mut h) }, PollingStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = polling_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn handle_round_trip() {
    let h = handle(NULL_RECURRENT);
    unsafe {
        assert_eq!(polling_spec_stations(h), 2);
        assert_eq!(polling_spec_seed(h), 11);
        assert_eq!(polling_spec_stations(ptr::null()), 0);
        polling_spec_free(h);
        polling_spec_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors_carry_messages() {
    let bad = CString::new("system\n  d 1\n  lambda 1 1\n  colour red\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { polling_spec_from_plan_text(bad.as_ptr(), &mut h) }, PollingStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("line 4"));

    let missing = CString::new("system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 3 0\naction classify\n").unwrap();
    assert_eq!(unsafe { polling_spec_from_plan_text(missing.as_ptr(), &mut h) }, PollingStatus::Validation);

    assert_eq!(unsafe { polling_spec_from_plan_text(ptr::null(), &mut h) }, PollingStatus::NullPointer);
    let path = CString::new("/nonexistent/plan.txt").unwrap();
    assert_eq!(unsafe { polling_spec_from_plan_file(path.as_ptr(), &mut h) }, PollingStatus::Io);
}

#[test]
fn estimates_match_closed_forms() {
    let h = handle(NULL_RECURRENT);
    let (mut k, mut se) = (0.0, 0.0);
    unsafe {
        assert_eq!(polling_estimate_k(h, 1.0, 32, 4000, 1, &mut k, &mut se), PollingStatus::Ok);
        assert!((k - 1.125).abs() < 0.03, "{k}");
        assert_eq!(polling_estimate_k(h, -1.0, 32, 4000, 1, &mut k, &mut se), PollingStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        let (mut lambda, mut lse) = (0.0, 0.0);
        assert_eq!(polling_top_exponent(h, 1000, 64, 2, &mut lambda, &mut lse), PollingStatus::Ok);
        assert!((lambda - 0.5 * (0.25f64.ln() + 2f64.ln())).abs() < 0.02);

        let (mut kind, mut lo, mut hi) = (PollingS0Kind::AtZero, 0.0, 0.0);
        assert_eq!(polling_estimate_s0(h, 4.0, 3, &mut kind, &mut lo, &mut hi), PollingStatus::Ok);
        assert_eq!(kind, PollingS0Kind::Bracket);
        let s0 = ((1.0 + 5f64.sqrt()) / 2.0).log2();
        assert!(lo <= s0 && s0 <= hi, "[{lo}, {hi}]");

        let mut v = PollingVerdict::Undecided;
        assert_eq!(polling_classify(h, 4, &mut v), PollingStatus::Ok);
        assert_eq!(v, PollingVerdict::NullRecurrent);
        polling_spec_free(h);
    }
}

#[test]
fn fluid_time_and_divergence() {
    let stable =
        handle("system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 3 0\nstation 1\n  atom 1 3 0\naction classify\n");
    let transient = handle(TRANSIENT);
    let x = [4.0, 0.0];
    let (mut t, mut div) = (0.0, -1);
    unsafe {
        assert_eq!(polling_fluid_empty_time(stable, x.as_ptr(), 1, 0, 0, &mut t, &mut div), PollingStatus::Ok);
        assert_eq!(div, 0);
        assert!((t - 4.0).abs() < 1e-6);
        assert_eq!(polling_fluid_empty_time(transient, x.as_ptr(), 1, 0, 0, &mut t, &mut div), PollingStatus::Ok);
        assert_eq!(div, 1);
        assert!(t.is_infinite());
        assert_eq!(polling_fluid_empty_time(stable, x.as_ptr(), 2, 0, 0, &mut t, &mut div), PollingStatus::Validation);
        let mut v = PollingVerdict::Undecided;
        assert_eq!(polling_classify(transient, 0, &mut v), PollingStatus::Ok);
        assert_eq!(v, PollingVerdict::Transient);
        polling_spec_free(stable);
        polling_spec_free(transient);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(polling_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping header check");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include <stdio.h>\n#include \"polling.h\"\nint main(void) {\n  PollingSpecHandle *h = NULL;\n  \
         PollingStatus s = polling_spec_from_plan_text(\"\", &h);\n  return s == POLLING_STATUS_OK;\n}\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
