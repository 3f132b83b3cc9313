use std::ffi::{CStr, CString};
use std::ptr;

use collective_cooling_ffi::*;

fn last_error() -> String {
    let p = cc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fig2_params() -> *mut CcParams {
    let rabi = [0.01];
    let trap = [1.0];
    let mut p = ptr::null_mut();
    let st = unsafe { cc_params_new(1_000_000, 1e-3, 1.0, 0.05, rabi.as_ptr(), trap.as_ptr(), 1, &mut p) };
    assert_eq!(st, CcStatus::Ok);
    p
}

#[test]
fn couplings_and_rates() {
    let p = fig2_params();
    let (mut x, mut y, mut rc, mut ri) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(cc_couplings(p, &mut x, &mut y), CcStatus::Ok);
        assert_eq!(cc_analytic_rates(p, &mut rc, &mut ri), CcStatus::Ok);
        cc_params_free(p);
    }
    assert!((x - 0.25).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
    assert!((rc - 0.06640625).abs() < 1e-15 && (ri - 0.0625).abs() < 1e-15);
}

#[test]
fn empty_mode_list_is_rejected() {
    let mut p = ptr::null_mut();
    let st = unsafe { cc_params_new(10, 1e-3, 1.0, 0.05, ptr::null(), ptr::null(), 0, &mut p) };
    assert_eq!(st, CcStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("rabi"));
}

#[test]
fn null_pointers_are_reported() {
    let st = unsafe { cc_couplings(ptr::null(), ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, CcStatus::NullPointer);
    assert!(last_error().contains("params"));
    unsafe {
        cc_params_free(ptr::null_mut());
        cc_run_free(ptr::null_mut());
        cc_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { cc_run_rows(ptr::null()) }, 0);
}

#[test]
fn moment_rhs_first_step() {
    let p = fig2_params();
    let state = [1e3, 0.0, -5e5, 0.0, 0.0, 0.0];
    let mut out = [f64::NAN; 6];
    assert_eq!(unsafe { cc_moment_rhs(p, CcScenario::Common, state.as_ptr(), out.as_mut_ptr()) }, CcStatus::Ok);
    assert_eq!(out, [0.0, 0.0, 0.0, -500.0, 0.0, 0.0]);
    let bad = [f64::NAN; 6];
    assert_eq!(unsafe { cc_moment_rhs(p, CcScenario::Common, bad.as_ptr(), out.as_mut_ptr()) }, CcStatus::Numerical);
    unsafe { cc_params_free(p) };
}

#[test]
fn preset_run_round_trip() {
    let name = CString::new("fig2a").unwrap();
    let mut cfg = ptr::null_mut();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(cc_config_from_preset(name.as_ptr(), &mut cfg), CcStatus::Ok);
        assert_eq!(cc_config_set_t_end(cfg, 60.0), CcStatus::Ok);
        assert_eq!(cc_config_set_t_end(cfg, -1.0), CcStatus::InvalidArgument);
        assert_eq!(cc_run_scenario(cfg, &mut run), CcStatus::Ok);
        let rows = cc_run_rows(run);
        assert_eq!(rows, 121);
        assert_eq!(cc_run_columns(run), 9);
        let mut col = ptr::null_mut();
        assert_eq!(cc_run_column_name(run, 1, &mut col), CcStatus::Ok);
        assert_eq!(CStr::from_ptr(col).to_str().unwrap(), "m");
        cc_string_free(col);
        assert_eq!(cc_run_column_name(run, 99, &mut col), CcStatus::OutOfRange);

        let mut m = vec![0.0; rows];
        assert_eq!(cc_run_copy_column(run, 1, m.as_mut_ptr(), rows), CcStatus::Ok);
        assert_eq!(m[0], 1e3);
        assert!(m[rows - 1] < m[0]);
        assert_eq!(cc_run_copy_column(run, 1, m.as_mut_ptr(), rows - 1), CcStatus::OutOfRange);
        let mut v = 0.0;
        assert_eq!(cc_run_value(run, rows - 1, 1, &mut v), CcStatus::Ok);
        assert_eq!(v, m[rows - 1]);

        let report = CStr::from_ptr(cc_run_report_json(run)).to_str().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(report).unwrap();
        assert_eq!(parsed["scenario"], "common");

        let mut json = ptr::null_mut();
        assert_eq!(cc_config_to_json(cfg, &mut json), CcStatus::Ok);
        let mut cfg2 = ptr::null_mut();
        assert_eq!(cc_config_from_json(json, &mut cfg2), CcStatus::Ok);
        cc_string_free(json);
        cc_config_free(cfg2);

        cc_run_free(run);
        cc_config_free(cfg);
    }
}

#[test]
fn bad_config_json() {
    let text = CString::new("{\"scenario\": \"common\"}").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { cc_config_from_json(text.as_ptr(), &mut cfg) }, CcStatus::InvalidConfig);
    assert!(cfg.is_null());
    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { cc_config_from_preset(name.as_ptr(), &mut cfg) }, CcStatus::InvalidConfig);
    assert!(last_error().contains("unknown preset"));
}

#[test]
fn errors_are_thread_local() {
    let name = CString::new("nope").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe { cc_config_from_preset(name.as_ptr(), &mut cfg) };
    std::thread::spawn(|| assert!(cc_last_error().is_null())).join().unwrap();
}
