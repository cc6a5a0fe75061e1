use std::ffi::{CStr, CString};
use std::ptr;

use forchheimer_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fh_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn two_term_law_values() {
    let mut law = ptr::null_mut();
    unsafe {
        assert_eq!(fh_law_two_term(&mut law), FhStatus::Ok);
        let mut k = 0.0;
        assert_eq!(fh_law_eval_k(law, 2.0, &mut k), FhStatus::Ok);
        assert!((k - 0.5).abs() < 1e-12);
        assert_eq!(fh_law_eval_k_prime(law, 0.0, &mut k), FhStatus::Ok);
        assert!((k + 1.0).abs() < 1e-12);
        assert_eq!(fh_law_eval_h(law, 0.0, &mut k), FhStatus::Ok);
        assert_eq!(k, 0.0);
        let mut e = FhExponents { a: 0.0, beta: 0.0, lambda: 0.0, gamma: 0.0 };
        assert_eq!(fh_law_derived_exponents(law, &mut e), FhStatus::Ok);
        assert!((e.beta - 1.5).abs() < 1e-15);
        fh_law_free(law);
    }
}

#[test]
fn custom_law_and_rejection() {
    let exps = [0.0, 1.0, 2.0];
    let coefs = [1.0, 1.0, 1.0];
    let mut law = ptr::null_mut();
    unsafe {
        assert_eq!(fh_law_new(exps.as_ptr(), coefs.as_ptr(), 3, &mut law), FhStatus::Ok);
        let mut k = 0.0;
        // s = 1 solves s(1 + s + s²) = 3.
        assert_eq!(fh_law_eval_k(law, 3.0, &mut k), FhStatus::Ok);
        assert!((k - 1.0 / 3.0).abs() < 1e-12);
        fh_law_free(law);

        let bad = [0.0, 1.0];
        let mut rejected = ptr::null_mut();
        assert_eq!(fh_law_new(exps.as_ptr(), bad.as_ptr(), 2, &mut rejected), FhStatus::InvalidArgument);
        assert!(rejected.is_null());
        assert!(!last_error().is_empty());
        let mut k = 0.0;
        let mut law = ptr::null_mut();
        fh_law_two_term(&mut law);
        assert_eq!(fh_law_eval_k(law, -1.0, &mut k), FhStatus::InvalidArgument);
        fh_law_free(law);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut k = 0.0;
        assert_eq!(fh_law_eval_k(ptr::null(), 1.0, &mut k), FhStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(fh_law_two_term(ptr::null_mut()), FhStatus::NullPointer);
        assert_eq!(fh_run_l2_error(ptr::null(), &mut k), FhStatus::NullPointer);
        let mut out = ptr::null_mut();
        assert_eq!(fh_run_case(ptr::null(), ptr::null(), 2, 1, 0.5, 1.0, &mut out), FhStatus::NullPointer);
        fh_law_free(ptr::null_mut());
        fh_run_free(ptr::null_mut());
    }
}

#[test]
fn constant_case_run() {
    let name = CString::new("constant").unwrap();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(fh_run_case(name.as_ptr(), ptr::null(), 4, 2, 0.25, 1.0, &mut run), FhStatus::Ok);
        let mut e = 1.0;
        assert_eq!(fh_run_l2_error(run, &mut e), FhStatus::Ok);
        assert!(e < 1e-10);
        assert_eq!(fh_run_grad_error(run, &mut e), FhStatus::Ok);
        assert!(e < 1e-10);
        let mut steps = 0usize;
        assert_eq!(fh_run_step_count(run, &mut steps), FhStatus::Ok);
        assert_eq!(steps, 4);
        let mut len = 0usize;
        assert_eq!(fh_run_final_coefficients(run, ptr::null_mut(), 0, &mut len), FhStatus::Ok);
        assert_eq!(len, 81);
        let mut buf = vec![0.0; 10];
        assert_eq!(fh_run_final_coefficients(run, buf.as_mut_ptr(), buf.len(), &mut len), FhStatus::Ok);
        assert_eq!(len, 81);
        let expected = forchheimer::cases::constant(1.0);
        let c = (expected.rho0)([0.3, 0.3]);
        assert!(buf.iter().all(|v| (v - c).abs() < 1e-12));
        fh_run_free(run);
    }
}

#[test]
fn bad_run_arguments() {
    let unknown = CString::new("nope").unwrap();
    let example = CString::new("example2").unwrap();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(fh_run_case(unknown.as_ptr(), ptr::null(), 2, 1, 0.5, 1.0, &mut run), FhStatus::Config);
        assert!(last_error().contains("nope"));
        assert_eq!(fh_run_case(example.as_ptr(), ptr::null(), 2, 1, -0.5, 1.0, &mut run), FhStatus::Config);
        assert_eq!(fh_run_case(example.as_ptr(), ptr::null(), 0, 1, 0.5, 1.0, &mut run), FhStatus::InvalidArgument);
        assert!(run.is_null());
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/forchheimer.h");
    for symbol in ["fh_law_new", "fh_run_case", "fh_run_final_coefficients", "fh_last_error_message", "FhStatus"] {
        assert!(header.contains(symbol), "{symbol}");
    }
}
