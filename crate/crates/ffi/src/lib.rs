//! C ABI for the qcrb toolkit.
//!
//! Handles are opaque; every call returns a [`QcrbStatus`] and reports
//! detail through `qcrb_last_error_message()`. Strings returned through
//! out-parameters are owned by the caller and must be released with
//! `qcrb_string_free`. JSON configs use the same schemas as the `qcrb` CLI.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::sync::Arc;

use qcrb_core::cli::{allocate_from_config, simulate_from_config};
use qcrb_core::config::{AllocateConfig, BoundConfig, SimulateConfig, Validated};
use qcrb_core::error::Error;
use qcrb_core::fisher::optimal_bound;
use qcrb_core::models::{DerivKind, ParametricFamily};
use qcrb_core::modes::Grid;
use qcrb_core::pipeline::bound_report;
use qcrb_core::report::to_json_string;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcrbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Config parse/validation failure.
    Config = 3,
    /// Model degeneracy: no detection mode or no information.
    Degenerate = 4,
    /// Numerical failure (singular covariance, coverage, step size).
    Numeric = 5,
    Io = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> QcrbStatus {
    match e {
        Error::ZeroDetectionMode
        | Error::NoInformation
        | Error::ZeroMeanField
        | Error::Domain { .. }
        | Error::Purity(_) => QcrbStatus::Degenerate,
        Error::Config(_) | Error::InvalidVariance(_) | Error::InvalidPhotonNumber(_) => {
            QcrbStatus::Config
        }
        Error::Io(_) => QcrbStatus::Io,
        _ => QcrbStatus::Numeric,
    }
}

fn fail(e: &Error) -> QcrbStatus {
    set_error(&e.to_string());
    status_of(e)
}

/// Opaque model handle: a parsed model config ready for evaluation.
pub struct QcrbModel {
    family: Box<dyn ParametricFamily>,
    grid: Arc<Grid>,
    kind: DerivKind,
}

/// Sensitivity report with every quantity the bound pipeline produces.
/// Optional quantities (absent when the model has no detection mode) are
/// NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcrbBoundReport {
    pub i_mean_term: f64,
    pub i_cov_term: f64,
    pub i_full: f64,
    pub cov_term_ratio: f64,
    pub i_reduced: f64,
    pub i_zero: f64,
    pub gamma_inv_11: f64,
    pub n: f64,
    pub u_prime_norm_sq: f64,
    pub n_prime: f64,
    pub q: u64,
    pub delta_theta_min: f64,
    pub delta_theta_single: f64,
    pub bound_linearized: f64,
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, QcrbStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(QcrbStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        QcrbStatus::InvalidUtf8
    })
}

fn parse_config<T: serde::de::DeserializeOwned + Validated>(json: &str) -> Result<T, QcrbStatus> {
    let cfg: T = serde_json::from_str(json).map_err(|e| {
        set_error(&format!("config error: {e}"));
        QcrbStatus::Config
    })?;
    cfg.validate().map_err(|e| fail(&e))?;
    Ok(cfg)
}

fn string_out(out: *mut *mut c_char, text: String) -> QcrbStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            QcrbStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL byte");
            QcrbStatus::Internal
        }
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qcrb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qcrb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned through an out-parameter.
///
/// # Safety
/// `s` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn qcrb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a model config (same JSON schema as the CLI `bound` command) into
/// an opaque handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn qcrb_model_from_json(
    json: *const c_char,
    out: *mut *mut QcrbModel,
) -> QcrbStatus {
    if out.is_null() {
        set_error("null out pointer");
        return QcrbStatus::NullArgument;
    }
    let json = match cstr_arg(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let cfg: BoundConfig = match parse_config(json) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let build = (|| -> qcrb_core::Result<QcrbModel> {
        Ok(QcrbModel {
            family: qcrb_core::config::build_family(&cfg.model, &cfg.params)?,
            grid: cfg.grid.build()?,
            kind: cfg.deriv_kind()?,
        })
    })();
    match build {
        Ok(model) => {
            *out = Box::into_raw(Box::new(model));
            QcrbStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Release a model handle.
///
/// # Safety
/// `model` must come from `qcrb_model_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qcrb_model_free(model: *mut QcrbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Quantum Cramér-Rao bound of the model for `q` repetitions.
///
/// # Safety
/// `model` must be a live handle; `out` must point to writable memory for
/// one report struct.
#[no_mangle]
pub unsafe extern "C" fn qcrb_bound(
    model: *const QcrbModel,
    q: u64,
    out: *mut QcrbBoundReport,
) -> QcrbStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QcrbStatus::NullArgument;
    }
    let model = &*model;
    match bound_report(model.family.as_ref(), &model.grid, model.kind, q) {
        Ok(r) => {
            *out = QcrbBoundReport {
                i_mean_term: r.i_mean_term,
                i_cov_term: r.i_cov_term,
                i_full: r.i_full,
                cov_term_ratio: r.cov_term_ratio,
                i_reduced: r.i_reduced.unwrap_or(f64::NAN),
                i_zero: r.i_zero.unwrap_or(f64::NAN),
                gamma_inv_11: r.gamma_inv_11.unwrap_or(f64::NAN),
                n: r.n.unwrap_or(f64::NAN),
                u_prime_norm_sq: r.u_prime_norm_sq.unwrap_or(f64::NAN),
                n_prime: r.n_prime.unwrap_or(f64::NAN),
                q: r.q,
                delta_theta_min: r.delta_theta_min,
                delta_theta_single: r.delta_theta_single,
                bound_linearized: r.bound_linearized.unwrap_or(f64::NAN),
            };
            QcrbStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Same as [`qcrb_bound`] but returning the full JSON report.
///
/// # Safety
/// As for `qcrb_bound`; `out_json` receives a string owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn qcrb_bound_json(
    model: *const QcrbModel,
    q: u64,
    out_json: *mut *mut c_char,
) -> QcrbStatus {
    if model.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return QcrbStatus::NullArgument;
    }
    let model = &*model;
    let result = bound_report(model.family.as_ref(), &model.grid, model.kind, q)
        .and_then(|r| to_json_string(&r));
    match result {
        Ok(json) => string_out(out_json, json),
        Err(e) => fail(&e),
    }
}

/// Optimal-resource bound `σ_min/√(QN) (4‖u′‖² + (N′/N)²)^{−1/2}`.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn qcrb_optimal_bound(
    sigma_min: f64,
    n: f64,
    u_prime_norm_sq: f64,
    n_prime: f64,
    q: u64,
    out: *mut f64,
) -> QcrbStatus {
    if out.is_null() {
        set_error("null out pointer");
        return QcrbStatus::NullArgument;
    }
    match optimal_bound(sigma_min, n, u_prime_norm_sq, n_prime, q) {
        Ok(v) => {
            *out = v;
            QcrbStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Run a homodyne experiment from a CLI-schema `simulate` config and return
/// the summary report as JSON.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string; `out_json` receives
/// a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn qcrb_simulate_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> QcrbStatus {
    if out_json.is_null() {
        set_error("null out pointer");
        return QcrbStatus::NullArgument;
    }
    let json = match cstr_arg(config_json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let cfg: SimulateConfig = match parse_config(json) {
        Ok(c) => c,
        Err(status) => return status,
    };
    match simulate_from_config(&cfg).and_then(|run| to_json_string(&run.report)) {
        Ok(json) => string_out(out_json, json),
        Err(e) => fail(&e),
    }
}

/// Optimize a squeezer allocation and audit random networks, from a
/// CLI-schema `allocate` config; returns the outcome as JSON.
///
/// # Safety
/// As for [`qcrb_simulate_json`].
#[no_mangle]
pub unsafe extern "C" fn qcrb_allocate_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> QcrbStatus {
    if out_json.is_null() {
        set_error("null out pointer");
        return QcrbStatus::NullArgument;
    }
    let json = match cstr_arg(config_json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let cfg: AllocateConfig = match parse_config(json) {
        Ok(c) => c,
        Err(status) => return status,
    };
    match allocate_from_config(&cfg).and_then(|out| to_json_string(&out)) {
        Ok(json) => string_out(out_json, json),
        Err(e) => fail(&e),
    }
}
