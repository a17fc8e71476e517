use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ewcheck_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ew_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn verify_report_round_trip() {
    let mut r = ptr::null_mut();
    let st = unsafe { ew_verify(c("S").as_ptr(), c("both").as_ptr(), 10, 42, &mut r) };
    assert_eq!(st, EwStatus::Ok);
    let mut passed = false;
    assert_eq!(unsafe { ew_report_passed(r, &mut passed) }, EwStatus::Ok);
    assert!(passed);
    let (mut n, mut worst) = (0usize, f64::NAN);
    assert_eq!(unsafe { ew_report_summary(r, &mut n, &mut worst) }, EwStatus::Ok);
    assert!(n > 0 && worst < 1e-10);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ew_report_json(r, &mut json) }, EwStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(v["samples"], 10);
    unsafe {
        ew_string_free(json);
        ew_report_free(r);
    }
}

#[test]
fn relations_dimension() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ew_relations(c("J").as_ptr(), c("bosonic").as_ptr(), 20, 1, &mut r) }, EwStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { ew_report_nullspace_dim(r, 0, &mut dim) }, EwStatus::Ok);
    assert_eq!(dim, 1);
    assert_eq!(unsafe { ew_report_nullspace_dim(r, 5, &mut dim) }, EwStatus::InvalidArgument);
    unsafe { ew_report_free(r) };
}

#[test]
fn error_codes() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ew_verify(ptr::null(), c("both").as_ptr(), 10, 42, &mut r) }, EwStatus::NullPointer);
    assert_eq!(unsafe { ew_verify(c("nope").as_ptr(), c("both").as_ptr(), 10, 42, &mut r) }, EwStatus::InvalidArgument);
    assert!(last_error().contains("nope"));
    assert_eq!(unsafe { ew_verify(c("S").as_ptr(), c("both").as_ptr(), 0, 42, &mut r) }, EwStatus::InvalidArgument);
    assert_eq!(unsafe { ew_verify(c("I").as_ptr(), c("fermionic").as_ptr(), 5, 42, &mut r) }, EwStatus::Computation);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { ew_verify(bad.as_ptr().cast(), c("both").as_ptr(), 5, 42, &mut r) }, EwStatus::InvalidUtf8);
    assert!(r.is_null());
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { ew_expression_parse(c("phi^{a} phi^{a}").as_ptr(), ptr::null(), &mut e) }, EwStatus::Expression);
    assert!(last_error().contains("same variance"));
    unsafe {
        ew_report_free(ptr::null_mut());
        ew_expression_free(ptr::null_mut());
        ew_string_free(ptr::null_mut());
    }
}

#[test]
fn expression_values() {
    let bind = c(r#"{"free": ["a"], "symbols": {
        "X": {"slots": ["isospin^"], "values": [[1, 0], [2, 0]]},
        "Y": {"slots": ["isospin_"], "values": [[3, 0], [0, 1]]}}}"#);
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { ew_expression_parse(c("X^{a} Y_{b} X^{b}").as_ptr(), bind.as_ptr(), &mut e) }, EwStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { ew_expression_len(e, &mut n) }, EwStatus::Ok);
    assert_eq!(n, 2);
    let mut buf = [0.0; 4];
    assert_eq!(unsafe { ew_expression_eval(e, 0, buf.as_mut_ptr(), 3) }, EwStatus::BufferTooSmall);
    assert_eq!(unsafe { ew_expression_eval(e, 0, buf.as_mut_ptr(), 4) }, EwStatus::Ok);
    assert_eq!(buf, [3.0, 2.0, 6.0, 4.0]);
    unsafe { ew_expression_free(e) };

    // fermionic samples keep their monomials in the JSON form
    let mut e = ptr::null_mut();
    let src = c("Omegabar_{a A A'} Omega^{a}_{B B'} epsS^{A B} epsSbar^{A' B'}");
    let bind = c(r#"{"statistics": "fermionic"}"#);
    assert_eq!(unsafe { ew_expression_parse(src.as_ptr(), bind.as_ptr(), &mut e) }, EwStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ew_expression_eval_json(e, 9, &mut json) }, EwStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    let monomials = v[0]["value"].as_array().unwrap();
    assert!(monomials.iter().all(|m| m["generators"].as_array().unwrap().len() == 2));
    unsafe {
        ew_string_free(json);
        ew_expression_free(e);
    }
}

/// Compiles a C program against the generated header and the shared library.
#[test]
fn c_program_links_against_header() {
    let Ok(_) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    if !lib_dir.join("libewcheck_ffi.so").exists() {
        eprintln!("shared library not built; skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "ewcheck.h"

int main(void) {
    EwReport *r = NULL;
    if (ew_verify("I", "bosonic", 10, 42, &r) != EW_STATUS_OK) return 10;
    bool passed = false;
    ew_report_passed(r, &passed);
    ew_report_free(r);
    if (!passed) return 11;
    EwExpression *e = NULL;
    if (ew_expression_parse("W_l^{a b}", NULL, &e) != EW_STATUS_EXPRESSION) return 12;
    if (ew_last_error() == NULL) return 13;
    if (ew_expression_parse("phi^{a} phibar_{a}", NULL, &e) != EW_STATUS_OK) return 14;
    double v[2];
    if (ew_expression_eval(e, 3, v, 2) != EW_STATUS_OK) return 15;
    ew_expression_free(e);
    if (!(v[0] > 0.0) || v[1] != 0.0) return 16;
    puts("ok");
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lewcheck_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
