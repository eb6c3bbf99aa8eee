use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use serde_json::Value;
use torusdiv_ffi::*;

const ES: &str = r#"{"s_primes": [2], "g1": [2], "g2": [-2], "F1": "X1 - 1", "F2": "X1 - 1"}"#;
const ES3: &str = r#"{"s_primes": [2], "g1": [4], "g2": [2], "F1": "X1 - 1", "F2": "X1^2 - 1",
    "components2": ["X1 - 1", "X1 + 1"]}"#;

fn instance(json: &str) -> *mut TdInstance {
    let s = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { td_instance_from_json(s.as_ptr(), &mut out) }, TdStatus::Ok);
    out
}

fn take(report: *mut TdReport) -> Value {
    let v = unsafe { serde_json::from_str(CStr::from_ptr(td_report_json(report)).to_str().unwrap()).unwrap() };
    unsafe { td_report_free(report) };
    v
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(td_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn morphism_and_gene() {
    let es = instance(ES);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { td_certify_morphism(es, 50, &mut r) }, TdStatus::Ok);
    let v = take(r);
    assert_eq!(v["certificate"]["h"], 2);
    assert_eq!(v["certificate"]["a"], serde_json::json!([["1"]]));

    let es3 = instance(ES3);
    assert_eq!(unsafe { td_certify_morphism(es3, 50, &mut r) }, TdStatus::Negative);
    assert_eq!(take(r)["diagnostic"]["code"], "HYPOTHESIS");
    assert_eq!(unsafe { td_certify_gene(es3, &mut r) }, TdStatus::Ok);
    assert_eq!(take(r)["certificate"]["Q"], serde_json::json!([["2"]]));

    assert_eq!(unsafe { td_scan_ideal(es, 6, &mut r) }, TdStatus::Ok);
    assert_eq!(take(r)["hits"], serde_json::json!([1, 2, 4, 6]));
    // 2^n + 1 shares no prime with 2^n - 1, so odd n break support inclusion
    assert_eq!(unsafe { td_bbs_conclusion(es, 20, &mut r) }, TdStatus::Negative);
    take(r);
    let square = instance(r#"{"s_primes": [2], "g1": [2], "g2": [4], "F1": "X1 - 1", "F2": "X1 - 1"}"#);
    assert_eq!(unsafe { td_bbs_conclusion(square, 20, &mut r) }, TdStatus::Ok);
    assert_eq!(take(r)["certificate"]["a"], serde_json::json!([["2"]]));
    unsafe {
        td_instance_free(es);
        td_instance_free(es3);
        td_instance_free(square);
    }
}

#[test]
fn erdos_statuses() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { td_erdos(2, 4, 40, &mut r) }, TdStatus::Ok);
    assert_eq!(take(r)["k"], 2);
    assert_eq!(unsafe { td_erdos(2, 3, 10, &mut r) }, TdStatus::Negative);
    assert_eq!(take(r)["violation"]["n"], 2);
    assert_eq!(unsafe { td_erdos(1, 3, 10, &mut r) }, TdStatus::InvalidArgument);
    assert!(last_error().contains("at least 2"));
}

#[test]
fn stabilizer_and_counting() {
    let poly = CString::new("X1^2 - 1").unwrap();
    let (mut dim, mut n) = (9, 9);
    let mut factors = [0u64; 4];
    let s = unsafe { td_stabilizer(poly.as_ptr(), 1, &mut dim, factors.as_mut_ptr(), 4, &mut n) };
    assert_eq!(s, TdStatus::Ok);
    assert_eq!((dim, n, factors[0]), (0, 1, 2));

    let bad = CString::new("X1^^2").unwrap();
    let s = unsafe { td_stabilizer(bad.as_ptr(), 1, &mut dim, ptr::null_mut(), 0, &mut n) };
    assert_eq!(s, TdStatus::Parse);
    assert!(!last_error().is_empty());

    let z = CString::new(r#"{"parts": [{"offset": ["0", "0"], "periods": [["1", "0"]]}]}"#).unwrap();
    let mut count = 0u64;
    assert_eq!(unsafe { td_unreduced_count(z.as_ptr(), 3.5, &mut count) }, TdStatus::Ok);
    assert_eq!(count, 7);
    let mut big_n = 0.0;
    assert_eq!(unsafe { td_counting_function(z.as_ptr(), 10.0, &mut big_n) }, TdStatus::Ok);
    assert!((big_n - 18.1456).abs() < 1e-3);
    assert_eq!(unsafe { td_counting_function(z.as_ptr(), 0.5, &mut big_n) }, TdStatus::InvalidArgument);
}

#[test]
fn bad_arguments() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { td_instance_from_json(ptr::null(), &mut out) }, TdStatus::InvalidArgument);
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { td_instance_from_json(junk.as_ptr(), &mut out) }, TdStatus::Parse);
    let bad_poly = CString::new(r#"{"g1": [2], "g2": [2], "F1": "X1 -", "F2": "X1 - 1"}"#).unwrap();
    assert_eq!(unsafe { td_instance_from_json(bad_poly.as_ptr(), &mut out) }, TdStatus::Parse);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { td_certify_gene(ptr::null(), &mut r) }, TdStatus::InvalidArgument);
    assert!(unsafe { td_report_json(ptr::null()) }.is_null());
    unsafe {
        td_report_free(ptr::null_mut());
        td_instance_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(td_version()) }.to_bytes().is_empty());
}

#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/torusdiv.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["td_instance_from_json", "td_certify_morphism", "td_erdos", "TD_STATUS_FACTORIZATION = 4"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
