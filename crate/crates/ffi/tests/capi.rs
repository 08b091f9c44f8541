use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use frobg_ffi::*;

fn last_error() -> String {
    let p = frobg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(name: &str, params: Option<&str>) -> Result<*mut FrobgModel, FrobgStatus> {
    let name = CString::new(name).unwrap();
    let params = params.map(|p| CString::new(p).unwrap());
    let mut out = ptr::null_mut();
    let st = unsafe { frobg_model_new(name.as_ptr(), params.as_ref().map_or(ptr::null(), |p| p.as_ptr()), &mut out) };
    if st == FrobgStatus::Ok {
        Ok(out)
    } else {
        Err(st)
    }
}

#[test]
fn verify_round_trip() {
    let m = model("cp1", Some("r=2")).unwrap();
    unsafe {
        assert_eq!(frobg_model_dimension(m), 2);
        let g = frobg_model_gamma(m);
        assert_eq!(CStr::from_ptr(g).to_str().unwrap(), "-1/12");
        frobg_string_free(g);

        let checks = CString::new("getzler,bo8").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(frobg_verify(m, checks.as_ptr(), 10, 3, 1e-9, 0, &mut r), FrobgStatus::Ok);
        assert!(frobg_report_passed(r));
        let json = frobg_report_json(r);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["model"], "cp1");
        frobg_string_free(json);
        frobg_report_free(r);
        frobg_model_free(m);
    }
}

#[test]
fn error_codes() {
    assert_eq!(model("nosuch", None).unwrap_err(), FrobgStatus::UnknownModel);
    assert!(last_error().contains("nosuch"));
    assert_eq!(model("cp1", Some("r")).unwrap_err(), FrobgStatus::BadParameter);
    assert_eq!(model("cp1", Some("q=1")).unwrap_err(), FrobgStatus::BadParameter);
    assert_eq!(model("i2", Some("h=2")).unwrap_err(), FrobgStatus::BadParameter);

    let m = model("eaw_a2", None).unwrap();
    unsafe {
        let mut r = ptr::null_mut();
        let bad = CString::new("getzler,nope").unwrap();
        assert_eq!(frobg_verify(m, bad.as_ptr(), 5, 0, 1e-9, 0, &mut r), FrobgStatus::UnknownCheck);
        assert!(r.is_null());
        assert_eq!(frobg_verify(ptr::null(), ptr::null(), 5, 0, 1e-9, 0, &mut r), FrobgStatus::NullPointer);
        assert_eq!(frobg_model_new(ptr::null(), ptr::null(), &mut ptr::null_mut()), FrobgStatus::NullPointer);
        let missing = CString::new("/nonexistent/model.toml").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(frobg_model_from_file(missing.as_ptr(), &mut out), FrobgStatus::ModelFile);
        frobg_model_free(m);
        frobg_model_free(ptr::null_mut());
        frobg_report_free(ptr::null_mut());
        frobg_string_free(ptr::null_mut());
        assert_eq!(frobg_model_dimension(ptr::null()), 0);
        assert!(!frobg_report_passed(ptr::null()));
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    let st = unsafe { frobg_model_new(bytes.as_ptr().cast(), ptr::null(), &mut out) };
    assert_eq!(st, FrobgStatus::InvalidUtf8);
}

/// Header compiles as C and agrees with the Rust discriminants.
#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "frobg.h"
_Static_assert(FROBG_STATUS_OK == 0, "ok");
_Static_assert(FROBG_STATUS_PANIC == 9, "panic");
int probe(void) {
    FrobgModel *m = 0;
    FrobgStatus st = frobg_model_new("cp1", "r=1", &m);
    if (st != FROBG_STATUS_OK) return (int)st;
    frobg_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new(cc)
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
