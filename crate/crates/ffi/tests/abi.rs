//! Exercise the C ABI from Rust: status codes, handle lifecycle, JSON
//! payloads, and the generated header.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use qcrb_ffi::{
    qcrb_allocate_json, qcrb_bound, qcrb_bound_json, qcrb_last_error_message,
    qcrb_model_free, qcrb_model_from_json, qcrb_optimal_bound, qcrb_simulate_json,
    qcrb_string_free, qcrb_version, QcrbBoundReport, QcrbModel, QcrbStatus,
};

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { qcrb_string_free(ptr) };
    s
}

fn model_from(json: &str) -> *mut QcrbModel {
    let cfg = CString::new(json).unwrap();
    let mut model: *mut QcrbModel = ptr::null_mut();
    let status = unsafe { qcrb_model_from_json(cfg.as_ptr(), &mut model) };
    assert_eq!(status, QcrbStatus::Ok, "{}", last_error());
    assert!(!model.is_null());
    model
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qcrb_last_error_message()) }.to_str().unwrap().to_string()
}

#[test]
fn version_is_exposed() {
    let v = unsafe { CStr::from_ptr(qcrb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn bound_struct_matches_displacement_limit() {
    let model = model_from(
        r#"{"model": "displacement", "params": {"N": 1e6, "w": 1.0},
            "grid": {"min": -8, "max": 8, "points": 1024}}"#,
    );
    let mut report = QcrbBoundReport {
        i_mean_term: 0.0,
        i_cov_term: 0.0,
        i_full: 0.0,
        cov_term_ratio: 0.0,
        i_reduced: 0.0,
        i_zero: 0.0,
        gamma_inv_11: 0.0,
        n: 0.0,
        u_prime_norm_sq: 0.0,
        n_prime: 0.0,
        q: 0,
        delta_theta_min: 0.0,
        delta_theta_single: 0.0,
        bound_linearized: 0.0,
    };
    let status = unsafe { qcrb_bound(model, 1, &mut report) };
    assert_eq!(status, QcrbStatus::Ok);
    assert!((report.delta_theta_min - 5e-4).abs() < 1e-12);
    assert!((report.gamma_inv_11 - 1.0).abs() < 1e-9);
    assert_eq!(report.q, 1);
    unsafe { qcrb_model_free(model) };
}

#[test]
fn bound_json_round_trips() {
    let model = model_from(r#"{"model": "phase", "params": {"N": 100}}"#);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { qcrb_bound_json(model, 1, &mut out) };
    assert_eq!(status, QcrbStatus::Ok);
    let json = take_string(out);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((value["delta_theta_min"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    unsafe { qcrb_model_free(model) };
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    let mut model: *mut QcrbModel = ptr::null_mut();
    let status = unsafe { qcrb_model_from_json(ptr::null(), &mut model) };
    assert_eq!(status, QcrbStatus::NullArgument);

    let bad = CString::new("{\"model\": \"nope\"}").unwrap();
    let status = unsafe { qcrb_model_from_json(bad.as_ptr(), &mut model) };
    assert_eq!(status, QcrbStatus::Config);
    assert!(last_error().contains("nope"), "{}", last_error());

    let unknown_key = CString::new("{\"model\": \"phase\", \"params\": {\"N\": 1}, \"oops\": 2}").unwrap();
    let status = unsafe { qcrb_model_from_json(unknown_key.as_ptr(), &mut model) };
    assert_eq!(status, QcrbStatus::Config);
    assert!(last_error().contains("oops"));
}

#[test]
fn degenerate_model_maps_to_degenerate_status() {
    let model = model_from(r#"{"model": "vacuum"}"#);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { qcrb_bound_json(model, 1, &mut out) };
    assert_eq!(status, QcrbStatus::Degenerate);
    unsafe { qcrb_model_free(model) };
}

#[test]
fn optimal_bound_matches_plugin_arithmetic() {
    let mut out = 0.0f64;
    let status = unsafe { qcrb_optimal_bound(0.5, 100.0, 1.0, 0.0, 1, &mut out) };
    assert_eq!(status, QcrbStatus::Ok);
    assert!((out - 0.025).abs() < 1e-12);

    let status = unsafe { qcrb_optimal_bound(-1.0, 100.0, 1.0, 0.0, 1, &mut out) };
    assert_eq!(status, QcrbStatus::Config);
}

#[test]
fn simulate_json_reports_saturation() {
    let cfg = CString::new(
        r#"{"model": "phase", "params": {"N": 100, "squeeze_db": 6.0},
            "samples": 1, "repetitions": 20000, "seed": 42, "theta_true": 0.01}"#,
    )
    .unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { qcrb_simulate_json(cfg.as_ptr(), &mut out) };
    assert_eq!(status, QcrbStatus::Ok, "{}", last_error());
    let value: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    let ratio = value["ratio"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&ratio), "ratio {ratio}");
}

#[test]
fn allocate_json_certifies_optimality() {
    let cfg = CString::new(r#"{"bank_db": [6.0, 3.0, 0.0], "trials": 100, "seed": 7}"#).unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { qcrb_allocate_json(cfg.as_ptr(), &mut out) };
    assert_eq!(status, QcrbStatus::Ok, "{}", last_error());
    let value: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(value["optimizer"]["optimal"], serde_json::Value::Bool(true));
    assert_eq!(value["audit"]["passed"], serde_json::Value::Bool(true));
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qcrb.h"))
        .expect("cbindgen header exists");
    for symbol in [
        "qcrb_model_from_json",
        "qcrb_model_free",
        "qcrb_bound",
        "qcrb_bound_json",
        "qcrb_optimal_bound",
        "qcrb_simulate_json",
        "qcrb_allocate_json",
        "qcrb_string_free",
        "qcrb_last_error_message",
        "qcrb_version",
        "typedef struct qcrb_model qcrb_model",
        "QCRB_STATUS_OK",
    ] {
        assert!(header.contains(symbol), "header is missing `{symbol}`");
    }
}
