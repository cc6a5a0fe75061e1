//! C ABI for the forchheimer library.
//!
//! Objects cross the boundary as opaque handles created by `fh_*_new` style calls
//! and released with the matching `fh_*_free`. Every fallible call returns an
//! [`FhStatus`]; on failure the message is available from [`fh_last_error_message`]
//! on the same thread. Panics are caught and reported as `FH_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use forchheimer::analysis::error_at_final_time;
use forchheimer::cases::case_by_name;
use forchheimer::{Error, FeSpace, GeneralizedPolynomial, Mesh, RunReport, SolverConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the operation (including invalid laws).
    InvalidArgument = 2,
    /// Invalid configuration, such as an unknown case name or a bad time step.
    Config = 3,
    /// Nonlinear iteration hit its cap.
    NonConvergence = 4,
    /// Linear solver or quadrature breakdown.
    Solver = 5,
    Panic = 6,
}

/// Exponents derived from the law: `a = α_N/(α_N+1)`, `β = 2-a`, `λ = β/(β-1)`, `γ = a/β`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FhExponents {
    pub a: f64,
    pub beta: f64,
    pub lambda: f64,
    pub gamma: f64,
}

/// Opaque handle to a generalized polynomial law.
pub struct FhLaw(GeneralizedPolynomial);

/// Opaque handle to a finished simulation run with its final-time errors.
pub struct FhRun {
    report: RunReport,
    l2_error: f64,
    grad_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|cell| *cell.borrow_mut() = c);
}

fn status_of(e: &Error) -> FhStatus {
    match e {
        Error::Domain(_) => FhStatus::InvalidArgument,
        Error::Config(_) | Error::Io(_) => FhStatus::Config,
        Error::NonConvergence { .. } => FhStatus::NonConvergence,
        Error::Step { source, .. } => status_of(source),
        Error::Solver(_) => FhStatus::Solver,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (FhStatus, String)>) -> FhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FhStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            FhStatus::Panic
        }
    }
}

fn lib(e: Error) -> (FhStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FhStatus, String) {
    (FhStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|cell| cell.borrow().as_ptr())
}

/// Creates the law `g(s) = Σ coefficients[i] s^exponents[i]` with `len` terms.
#[no_mangle]
pub unsafe extern "C" fn fh_law_new(
    exponents: *const f64,
    coefficients: *const f64,
    len: usize,
    out: *mut *mut FhLaw,
) -> FhStatus {
    guard(|| {
        if exponents.is_null() || coefficients.is_null() {
            return Err(null("exponents or coefficients"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let e = std::slice::from_raw_parts(exponents, len);
        let c = std::slice::from_raw_parts(coefficients, len);
        let pairs: Vec<(f64, f64)> = e.iter().copied().zip(c.iter().copied()).collect();
        let law = GeneralizedPolynomial::new(&pairs).map_err(lib)?;
        *out = Box::into_raw(Box::new(FhLaw(law)));
        Ok(())
    })
}

/// Creates the two-term law `g(s) = 1 + s`.
#[no_mangle]
pub unsafe extern "C" fn fh_law_two_term(out: *mut *mut FhLaw) -> FhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(FhLaw(GeneralizedPolynomial::forchheimer_two_term())));
        Ok(())
    })
}

/// Releases a law; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fh_law_free(law: *mut FhLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

unsafe fn eval(law: *const FhLaw, out: *mut f64, f: impl FnOnce(&GeneralizedPolynomial) -> forchheimer::Result<f64>) -> FhStatus {
    guard(|| {
        let law = law.as_ref().ok_or_else(|| null("law"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f(&law.0).map_err(lib)?;
        Ok(())
    })
}

/// `K(ξ)` for `ξ ≥ 0`.
#[no_mangle]
pub unsafe extern "C" fn fh_law_eval_k(law: *const FhLaw, xi: f64, out: *mut f64) -> FhStatus {
    eval(law, out, |l| l.eval_k(xi))
}

/// `K′(ξ)` for `ξ ≥ 0`.
#[no_mangle]
pub unsafe extern "C" fn fh_law_eval_k_prime(law: *const FhLaw, xi: f64, out: *mut f64) -> FhStatus {
    eval(law, out, |l| l.eval_k_prime(xi))
}

/// `H(ξ) = ∫₀^{ξ²} K(√s) ds`.
#[no_mangle]
pub unsafe extern "C" fn fh_law_eval_h(law: *const FhLaw, xi: f64, out: *mut f64) -> FhStatus {
    eval(law, out, |l| l.eval_h(xi))
}

#[no_mangle]
pub unsafe extern "C" fn fh_law_derived_exponents(law: *const FhLaw, out: *mut FhExponents) -> FhStatus {
    guard(|| {
        let law = law.as_ref().ok_or_else(|| null("law"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = law.0.derived_exponents();
        *out = FhExponents { a: d.a, beta: d.beta, lambda: d.lambda, gamma: d.gamma };
        Ok(())
    })
}

/// Runs the named manufactured case (`"example1"`, `"example2"`, `"constant"`,
/// `"steady_linear"`) with `law` on the `n×n` mesh with elements of `order`,
/// Picard iteration and step `dt` up to `t_final`. A null `law` selects the
/// law the case was built for.
#[no_mangle]
pub unsafe extern "C" fn fh_run_case(
    case_name: *const c_char,
    law: *const FhLaw,
    n: usize,
    order: usize,
    dt: f64,
    t_final: f64,
    out: *mut *mut FhRun,
) -> FhStatus {
    guard(|| {
        if case_name.is_null() {
            return Err(null("case_name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(case_name)
            .to_str()
            .map_err(|_| (FhStatus::InvalidArgument, "case_name is not UTF-8".to_string()))?;
        let case = case_by_name(name).map_err(lib)?;
        let law = law.as_ref().map(|l| l.0.clone()).unwrap_or_else(|| case.law.clone());
        let space = Arc::new(FeSpace::new(Mesh::unit_square(n).map_err(lib)?, order).map_err(lib)?);
        let config = SolverConfig::new(dt, t_final);
        let report = forchheimer::run_simulation(&space, &law, &case, &config).map_err(lib)?;
        let errors = error_at_final_time(&report, &case).map_err(lib)?;
        *out = Box::into_raw(Box::new(FhRun {
            report,
            l2_error: errors.l2_error,
            grad_error: errors.grad_lbeta_error,
        }));
        Ok(())
    })
}

/// Releases a run; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fh_run_free(run: *mut FhRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// `‖ρ(T) - ρh(T)‖_{L²}`.
#[no_mangle]
pub unsafe extern "C" fn fh_run_l2_error(run: *const FhRun, out: *mut f64) -> FhStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = run.l2_error;
        Ok(())
    })
}

/// `‖∇(ρ(T) - ρh(T))‖_{L^β}`.
#[no_mangle]
pub unsafe extern "C" fn fh_run_grad_error(run: *const FhRun, out: *mut f64) -> FhStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = run.grad_error;
        Ok(())
    })
}

/// Number of time steps taken.
#[no_mangle]
pub unsafe extern "C" fn fh_run_step_count(run: *const FhRun, out: *mut usize) -> FhStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = run.report.steps.len();
        Ok(())
    })
}

/// Copies up to `capacity` final-time coefficients into `buffer` and stores the
/// total count in `len`. Pass a null buffer to query the count only.
#[no_mangle]
pub unsafe extern "C" fn fh_run_final_coefficients(
    run: *const FhRun,
    buffer: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> FhStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let coeffs = run.report.final_field.coeffs();
        *len.as_mut().ok_or_else(|| null("len"))? = coeffs.len();
        if !buffer.is_null() {
            let k = capacity.min(coeffs.len());
            std::ptr::copy_nonoverlapping(coeffs.as_ptr(), buffer, k);
        }
        Ok(())
    })
}
