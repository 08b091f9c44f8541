//! C interface to the model catalog and the verification suites.
//!
//! Every function returns a [`FrobgStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`frobg_last_error`]. Handles
//! are opaque and must be released with their `_free` function. Strings
//! returned by the library are released with [`frobg_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::str::FromStr;

use frobg::catalog::{self, CatalogError, ModelEntry};
use frobg::report::{self, ReportError, VerificationReport, VerifyOptions};
use frobg::scalar::Precision;
use num_rational::BigRational;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrobgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownModel = 3,
    BadParameter = 4,
    UnknownCheck = 5,
    ModelFile = 6,
    InvalidModel = 7,
    Internal = 8,
    Panic = 9,
}

/// Validated model.
pub struct FrobgModel(ModelEntry);

/// Finished verification report.
pub struct FrobgReport(VerificationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: FrobgStatus, msg: impl Into<String>) -> FrobgStatus {
    set_error(msg);
    status
}

fn catalog_status(e: &CatalogError) -> FrobgStatus {
    match e {
        CatalogError::UnknownModel(_) => FrobgStatus::UnknownModel,
        CatalogError::BadParameter { .. } => FrobgStatus::BadParameter,
        CatalogError::File(_) => FrobgStatus::ModelFile,
        CatalogError::Invalid { .. } | CatalogError::Frobenius(_) | CatalogError::Getzler(_) => FrobgStatus::InvalidModel,
    }
}

fn guarded(f: impl FnOnce() -> FrobgStatus) -> FrobgStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FrobgStatus::Panic, "panic inside frobg"))
}

/// Borrowed UTF-8 string; `Ok(None)` for NULL.
unsafe fn opt_str<'a>(p: *const c_char) -> Result<Option<&'a str>, FrobgStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| fail(FrobgStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn parse_params(s: &str) -> Result<BTreeMap<String, BigRational>, FrobgStatus> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| fail(FrobgStatus::BadParameter, format!("'{item}' is not NAME=RATIONAL")))?;
        let v = BigRational::from_str(v.trim())
            .map_err(|_| fail(FrobgStatus::BadParameter, format!("'{v}' is not rational")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul removed").into_raw()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn frobg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Looks up a catalog model. `params` is NULL or a list like `"r=2"` or
/// `"h=5"`, comma separated.
///
/// # Safety
/// `name` and `params` must be NULL or valid nul-terminated strings; `out`
/// must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn frobg_model_new(name: *const c_char, params: *const c_char, out: *mut *mut FrobgModel) -> FrobgStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FrobgStatus::NullPointer, "out is NULL");
        }
        let name = match opt_str(name) {
            Ok(Some(n)) => n,
            Ok(None) => return fail(FrobgStatus::NullPointer, "name is NULL"),
            Err(s) => return s,
        };
        let params = match opt_str(params).and_then(|p| parse_params(p.unwrap_or(""))) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match catalog::get_model(name, &params) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(FrobgModel(e)));
                FrobgStatus::Ok
            }
            Err(e) => fail(catalog_status(&e), e.to_string()),
        }
    })
}

/// Loads and validates a model definition file.
///
/// # Safety
/// `path` must be NULL or a valid nul-terminated string; `out` must be NULL
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn frobg_model_from_file(path: *const c_char, out: *mut *mut FrobgModel) -> FrobgStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FrobgStatus::NullPointer, "out is NULL");
        }
        let path = match opt_str(path) {
            Ok(Some(p)) => p,
            Ok(None) => return fail(FrobgStatus::NullPointer, "path is NULL"),
            Err(s) => return s,
        };
        match catalog::load_model_file(Path::new(path)) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(FrobgModel(e)));
                FrobgStatus::Ok
            }
            Err(e) => fail(catalog_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn frobg_model_free(model: *mut FrobgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension of the model, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn frobg_model_dimension(model: *const FrobgModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Scaling anomaly as a `"p/q"` string; free with [`frobg_string_free`].
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn frobg_model_gamma(model: *const FrobgModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => into_c_string(catalog::rational_string(&m.0.gamma)),
        None => {
            set_error("model is NULL");
            ptr::null_mut()
        }
    }
}

/// Runs checks on a model. `checks` is NULL for all, or comma separated
/// names among wdvv, getzler, bo7, bo8, bo9, gamma, caustic-residues.
/// `precision_digits` of 0 selects the default.
///
/// # Safety
/// `model` must be a live handle, `checks` NULL or a valid string, `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn frobg_verify(
    model: *const FrobgModel,
    checks: *const c_char,
    points: usize,
    seed: u64,
    tol: f64,
    precision_digits: u32,
    out: *mut *mut FrobgReport,
) -> FrobgStatus {
    guarded(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(FrobgStatus::NullPointer, "model or out is NULL");
        };
        let checks = match opt_str(checks) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let checks = match report::parse_checks(checks) {
            Ok(c) => c,
            Err(e @ ReportError::UnknownCheck(_)) => return fail(FrobgStatus::UnknownCheck, e.to_string()),
            Err(e) => return fail(FrobgStatus::Internal, e.to_string()),
        };
        let prec = if precision_digits == 0 { Precision::default() } else { Precision::new(precision_digits) };
        let opts = VerifyOptions { points, seed, tol, prec };
        *out = Box::into_raw(Box::new(FrobgReport(report::verify(&m.0, &checks, &opts))));
        FrobgStatus::Ok
    })
}

/// True when no check failed.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn frobg_report_passed(report: *const FrobgReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.passed())
}

/// JSON rendering; free with [`frobg_string_free`].
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn frobg_report_json(report: *const FrobgReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => into_c_string(r.0.to_json()),
        None => {
            set_error("report is NULL");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn frobg_report_free(report: *mut FrobgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn frobg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
