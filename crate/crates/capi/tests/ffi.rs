//! Exercise the C surface from Rust, the way a foreign host would.

use std::ffi::{CStr, CString};
use std::ptr;

use orbifock_capi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    of_string_free(p);
    s
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(of_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

#[test]
fn series_handles_roundtrip() {
    unsafe {
        let mut a: *mut OfSeries = ptr::null_mut();
        let text = cstr("3/2*z^(-1/2) + z^(1) @window[-1/2,4]");
        assert_eq!(of_series_parse(text.as_ptr(), &mut a), OfStatus::Ok);
        let mut b: *mut OfSeries = ptr::null_mut();
        let text = cstr("z^(-1/2) @window[-inf,inf]");
        assert_eq!(of_series_parse(text.as_ptr(), &mut b), OfStatus::Ok);
        let mut sum: *mut OfSeries = ptr::null_mut();
        assert_eq!(of_series_add(a, b, &mut sum), OfStatus::Ok);
        let mut rendered: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_series_to_string(sum, &mut rendered), OfStatus::Ok);
        let s = take_string(rendered);
        assert_eq!(s, "5/2*z^(-1/2) + z^(1) @window[-1/2,4]");
        // residue of the derivative of anything vanishes
        let mut d: *mut OfSeries = ptr::null_mut();
        assert_eq!(of_series_derivative(sum, &mut d), OfStatus::Ok);
        let mut r: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_series_residue(d, &mut r), OfStatus::Ok);
        assert_eq!(take_string(r), "0");
        of_series_free(a);
        of_series_free(b);
        of_series_free(sum);
        of_series_free(d);
    }
}

#[test]
fn series_compose_and_errors() {
    unsafe {
        let mut outer: *mut OfSeries = ptr::null_mut();
        let t = cstr("z^(2) @window[-inf,inf]");
        assert_eq!(of_series_parse(t.as_ptr(), &mut outer), OfStatus::Ok);
        let mut inner: *mut OfSeries = ptr::null_mut();
        let t = cstr("z^(1/2) + z^(1) @window[1/2,4]");
        assert_eq!(of_series_parse(t.as_ptr(), &mut inner), OfStatus::Ok);
        let mut c: *mut OfSeries = ptr::null_mut();
        assert_eq!(of_series_compose(outer, inner, &mut c), OfStatus::Ok);
        let mut rendered: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_series_to_string(c, &mut rendered), OfStatus::Ok);
        let s = take_string(rendered);
        assert!(s.starts_with("z^(1) + 2*z^(3/2) + z^(2)"), "{}", s);
        // malformed input reports through the status and the error message
        let mut bad: *mut OfSeries = ptr::null_mut();
        let t = cstr("nonsense");
        assert_eq!(
            of_series_parse(t.as_ptr(), &mut bad),
            OfStatus::InvalidArgument
        );
        let msg = CStr::from_ptr(of_last_error()).to_str().unwrap();
        assert!(!msg.is_empty());
        of_series_free(outer);
        of_series_free(inner);
        of_series_free(c);
    }
}

#[test]
fn delta_table_json() {
    unsafe {
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_delta_table(2, &mut out), OfStatus::Ok);
        let text = take_string(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let rows = v["coefficients"].as_array().unwrap();
        assert!(rows
            .iter()
            .any(|r| r["m"] == 1 && r["n"] == 1 && r["value"] == "1/16"));
    }
}

#[test]
fn verify_and_blocks() {
    unsafe {
        let suite = cstr("parity");
        let params = cstr(r#"{"pole_bound": 5}"#);
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            of_verify(suite.as_ptr(), params.as_ptr(), &mut out),
            OfStatus::Ok
        );
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["ok"], true);

        let cfg = cstr(
            r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],
                "degree_cutoff":2,"pole_bound":5}"#,
        );
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_blocks(cfg.as_ptr(), &mut out), OfStatus::Ok);
        let table: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(table["stabilized"], true);
        assert_eq!(table["dims"][0][1], 1);

        // invalid configuration surfaces as an argument error
        let cfg = cstr(r#"{"marked":[],"degree_cutoff":1,"pole_bound":2}"#);
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(of_blocks(cfg.as_ptr(), &mut out), OfStatus::InvalidArgument);
    }
}
