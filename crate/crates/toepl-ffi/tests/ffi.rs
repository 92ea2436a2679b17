use std::ffi::{CStr, CString};
use std::ptr;

use toepl_ffi::*;

fn bundled(name: &str) -> *mut ToeplSpec {
    let name = CString::new(name).unwrap();
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { toepl_spec_bundled(name.as_ptr(), &mut spec) }, ToeplStatus::Ok);
    assert!(!spec.is_null());
    spec
}

fn last_error() -> String {
    let p = toepl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn complexity_palindromes_repetitivity() {
    let spec = bundled("grigorchuk");
    let mut v = 0u64;
    let expected = [1u64, 4, 6, 8, 10, 13, 16, 18, 20];
    for (l, &want) in expected.iter().enumerate() {
        assert_eq!(unsafe { toepl_complexity(spec, l as u64, &mut v) }, ToeplStatus::Ok);
        assert_eq!(v, want);
        let mut o = 0u64;
        assert_eq!(unsafe { toepl_complexity_oracle(spec, l as u64, &mut o) }, ToeplStatus::Ok);
        assert_eq!(o, want);
    }
    assert_eq!(unsafe { toepl_repetitivity(spec, 5, &mut v) }, ToeplStatus::Ok);
    assert_eq!(v, 64);
    let pd = bundled("pd");
    let pals: Vec<u64> = (0..4)
        .map(|l| {
            let mut p = 0;
            assert_eq!(unsafe { toepl_palindromes(pd, l, &mut p) }, ToeplStatus::Ok);
            p
        })
        .collect();
    assert_eq!(pals, [1, 2, 1, 3]);
    assert_eq!(unsafe { toepl_block_len(pd, 4, &mut v) }, ToeplStatus::Ok);
    assert_eq!(v, 31);
    unsafe {
        toepl_spec_free(spec);
        toepl_spec_free(pd);
    }
}

#[test]
fn errors_are_reported() {
    let mut spec = ptr::null_mut();
    let bad = CString::new(r#"{"alphabet": ["a"], "a": ["a"], "n": [1]}"#).unwrap();
    assert_eq!(unsafe { toepl_spec_from_json(bad.as_ptr(), &mut spec) }, ToeplStatus::Spec);
    assert!(spec.is_null());
    assert!(last_error().contains("spec"));

    assert_eq!(
        unsafe { toepl_spec_from_json(ptr::null(), &mut spec) },
        ToeplStatus::InvalidArgument
    );
    assert!(last_error().contains("null"));

    let fib = bundled("fibonacci");
    let mut flag = -1;
    assert_eq!(unsafe { toepl_spec_is_sturmian(fib, &mut flag) }, ToeplStatus::Ok);
    assert_eq!(flag, 1);
    let mut v = 0u64;
    assert_eq!(unsafe { toepl_complexity(fib, 3, &mut v) }, ToeplStatus::Spec);
    assert_eq!(unsafe { toepl_complexity_oracle(fib, 30, &mut v) }, ToeplStatus::Ok);
    assert_eq!(v, 31);

    let fin = CString::new(r#"{"alphabet": ["a", "b"], "a": ["a", "b"], "n": [2, 2]}"#).unwrap();
    assert_eq!(unsafe { toepl_spec_from_json(fin.as_ptr(), &mut spec) }, ToeplStatus::Ok);
    assert_eq!(unsafe { toepl_block_len(spec, 9, &mut v) }, ToeplStatus::Range);
    assert_eq!(unsafe { toepl_block_len(spec, 0, ptr::null_mut()) }, ToeplStatus::InvalidArgument);
    unsafe {
        toepl_spec_free(spec);
        toepl_spec_free(fib);
        toepl_spec_free(ptr::null_mut());
    }
}

#[test]
fn strings_and_verification() {
    let spec = bundled("grigorchuk");
    let mut dot = ptr::null_mut();
    assert_eq!(unsafe { toepl_debruijn_dot(spec, 1, &mut dot) }, ToeplStatus::Ok);
    let text = unsafe { CStr::from_ptr(dot) }.to_str().unwrap().to_string();
    unsafe { toepl_string_free(dot) };
    assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 6);

    let mut passed = 0;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { toepl_verify(spec, 4, &mut passed, &mut report) }, ToeplStatus::Ok);
    assert_eq!(passed, 1);
    let json: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(report) }.to_str().unwrap()).unwrap();
    unsafe { toepl_string_free(report) };
    assert!(!json["checks"].as_array().unwrap().is_empty());
    unsafe { toepl_spec_free(spec) };
}

#[test]
fn spectral_calls() {
    let spec = bundled("pd");
    let g = [0.0, 1.0];
    let mut pot = ptr::null_mut();
    assert_eq!(
        unsafe { toepl_potential_letters(ptr::null(), g.as_ptr(), 2, &mut pot) },
        ToeplStatus::Ok
    );
    // level -1 period is "a": Tr = E - g(a)
    let (mut t, mut ln) = (0.0, 0.0);
    assert_eq!(unsafe { toepl_trace(spec, pot, 0.7, -1, &mut t, &mut ln) }, ToeplStatus::Ok);
    assert!((t - 0.7).abs() < 1e-15);
    assert!((ln - 0.7f64.ln()).abs() < 1e-15);

    // level 0 period "ab": Tr = E (E - 1) - 2
    assert_eq!(unsafe { toepl_trace(spec, pot, 0.7, 0, &mut t, ptr::null_mut()) }, ToeplStatus::Ok);
    assert!((t - (0.7 * (0.7 - 1.0) - 2.0)).abs() < 1e-14);

    let mut m = 0.0;
    assert_eq!(
        unsafe { toepl_spectrum_measure(spec, pot, 4, -3.5, 3.5, 20001, &mut m) },
        ToeplStatus::Ok
    );
    assert!(m > 1.0 && m < 4.0, "{m}");

    let (mut fwd, mut bwd) = (0.0, 0.0);
    assert_eq!(unsafe { toepl_lyapunov(spec, pot, 0, 0.1, 4000, 0, &mut fwd) }, ToeplStatus::Ok);
    assert_eq!(unsafe { toepl_lyapunov(spec, pot, 0, 0.1, 4000, 1, &mut bwd) }, ToeplStatus::Ok);
    assert!(fwd >= 0.0 && bwd >= 0.0);
    assert_eq!(unsafe { toepl_lyapunov(spec, pot, 7, 0.1, 10, 0, &mut fwd) }, ToeplStatus::InvalidArgument);

    let zero_f = [0.0, 1.0];
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { toepl_potential_letters(zero_f.as_ptr(), g.as_ptr(), 2, &mut bad) },
        ToeplStatus::Spec
    );
    unsafe {
        toepl_potential_free(pot);
        toepl_spec_free(spec);
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/toepl.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["toepl_spec_bundled", "toepl_complexity", "toepl_verify", "toepl_trace", "toepl_last_error"] {
        assert!(text.contains(f), "{f} missing from the header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
