use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pqcycles_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = pq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    pq_string_free(s);
    out
}

unsafe fn expand(system: &str, tau: &str, order: u32, n: u32) -> *mut PqJet {
    let mut jet = ptr::null_mut();
    let st = pq_jet_expand(c(system).as_ptr(), c(tau).as_ptr(), order, n, &mut jet);
    assert_eq!(st, PqStatus::Ok, "{}", last_error());
    jet
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(pq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn jet_ladder_and_count() {
    unsafe {
        let jet = expand("s1", "0", 1, 15);
        assert_eq!(pq_jet_order(jet), 1);
        assert_eq!(pq_jet_radial_order(jet), 15);

        let mut s = ptr::null_mut();
        assert_eq!(pq_jet_coefficient(jet, 1, 1, &mut s), PqStatus::Ok);
        assert!(!take(s).is_empty());

        let mut ladder = ptr::null_mut();
        assert_eq!(pq_ladder_build(jet, ptr::null(), &mut ladder), PqStatus::Ok);
        let mut report = PqCountReport::default();
        assert_eq!(pq_ladder_count(ladder, &mut report), PqStatus::Ok);
        assert_eq!(report.order, 1);
        assert_eq!(report.total, 5);
        assert_eq!(report.simple_zeros + 1, report.free_count);
        pq_ladder_free(ladder);
        pq_jet_free(jet);
    }
}

#[test]
fn json_round_trip_through_the_boundary() {
    unsafe {
        let jet = expand("s2", "1/2", 1, 8);
        let mut doc = ptr::null_mut();
        assert_eq!(pq_jet_to_json(jet, &mut doc), PqStatus::Ok);
        let text = take(doc);

        let mut back = ptr::null_mut();
        assert_eq!(pq_jet_from_json(c(&text).as_ptr(), &mut back), PqStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(pq_jet_to_json(back, &mut again), PqStatus::Ok);
        assert_eq!(take(again), text);
        pq_jet_free(back);
        pq_jet_free(jet);
    }
}

#[test]
fn prediction_tracks_the_oracle() {
    unsafe {
        let jet = expand("s2", "1/2", 1, 10);
        let mut params = ptr::null_mut();
        assert_eq!(pq_params_new(c("1/2").as_ptr(), 1e-4, &mut params), PqStatus::Ok);
        assert_eq!(pq_params_set(params, c("a+10").as_ptr(), c("1/5").as_ptr()), PqStatus::Ok);
        assert_eq!(pq_params_set_f64(params, c("b-11").as_ptr(), -0.5), PqStatus::Ok);
        for r in [0.02, 0.05, 0.1] {
            let (mut d, mut p) = (0.0, 0.0);
            assert_eq!(pq_displacement(c("s2").as_ptr(), params, r, &mut d), PqStatus::Ok);
            assert_eq!(pq_predicted_delta(jet, params, r, &mut p), PqStatus::Ok);
            assert!((d - p).abs() <= 1e-3 * p.abs() + 1e-12, "r = {r}: {d} vs {p}");
        }
        let mut closure = 1.0;
        assert_eq!(pq_center_closure(c("s3").as_ptr(), c("-1").as_ptr(), 0.05, &mut closure), PqStatus::Ok);
        assert!(closure < 1e-12);
        pq_params_free(params);
        pq_jet_free(jet);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let mut jet = ptr::null_mut();
        assert_eq!(pq_jet_expand(c("s9").as_ptr(), c("1/2").as_ptr(), 1, 5, &mut jet), PqStatus::InvalidArgument);
        assert!(last_error().contains("s9"));
        assert!(jet.is_null());

        assert_eq!(pq_jet_expand(c("s1").as_ptr(), c("1/x").as_ptr(), 1, 5, &mut jet), PqStatus::Parse);
        assert_eq!(pq_jet_expand(ptr::null(), c("1/2").as_ptr(), 1, 5, &mut jet), PqStatus::NullPointer);
        assert_eq!(pq_jet_expand(c("s1").as_ptr(), c("1/2").as_ptr(), 1, 5, ptr::null_mut()), PqStatus::NullPointer);
        assert_eq!(pq_jet_expand(c("s1").as_ptr(), c("1/2").as_ptr(), 3, 5, &mut jet), PqStatus::InvalidArgument);

        let bad = [0xffu8, 0];
        assert_eq!(pq_jet_expand(bad.as_ptr().cast(), c("1/2").as_ptr(), 1, 5, &mut jet), PqStatus::Utf8);

        assert_eq!(pq_jet_from_json(c("{not json").as_ptr(), &mut jet), PqStatus::Parse);
        assert_eq!(pq_jet_from_json(c(r#"{"schema":"other"}"#).as_ptr(), &mut jet), PqStatus::Parse);

        let mut params = ptr::null_mut();
        assert_eq!(pq_params_new(c("0").as_ptr(), f64::NAN, &mut params), PqStatus::InvalidArgument);
        assert_eq!(pq_params_new(c("0").as_ptr(), 0.0, &mut params), PqStatus::Ok);
        assert_ne!(pq_params_set(params, c("tau").as_ptr(), c("1").as_ptr()), PqStatus::Ok);
        pq_params_free(params);

        let ok = expand("s1", "0", 1, 4);
        let mut s = ptr::null_mut();
        assert_ne!(pq_jet_coefficient(ok, 9, 9, &mut s), PqStatus::Ok);
        assert!(s.is_null());
        // A successful call clears the message.
        assert_eq!(pq_jet_coefficient(ok, 1, 1, &mut s), PqStatus::Ok);
        assert!(pq_last_error().is_null());
        pq_string_free(s);
        pq_jet_free(ok);

        assert_eq!(pq_jet_order(ptr::null()), 0);
        pq_jet_free(ptr::null_mut());
        pq_ladder_free(ptr::null_mut());
        pq_params_free(ptr::null_mut());
        pq_string_free(ptr::null_mut());
    }
}
