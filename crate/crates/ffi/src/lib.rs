//! C interface to `halfspace_thermal`.
//!
//! Problems live behind the opaque [`HtProblem`] handle. Every fallible call
//! returns an [`HtStatus`]; the message of the most recent failure on the
//! calling thread is available through [`ht_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use halfspace_thermal::fd::{validate_field, FdGrid, ValidationPlan};
use halfspace_thermal::field::{temperature, temperature_at};
use halfspace_thermal::{identity_integral, kernel_g, Error, EvalConfig, ForcingProfile, ProblemConfig, ProblemSpec};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Numerical = 4,
    ValidationFailed = 5,
    Panic = 6,
}

/// A configured problem together with its numerical settings.
pub struct HtProblem {
    spec: ProblemSpec,
    eval: EvalConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> HtStatus {
    match e {
        Error::InvalidInput(_) | Error::OutsideHalfSpace { .. } => HtStatus::InvalidInput,
        Error::Config(_) => HtStatus::Config,
        _ => HtStatus::Numerical,
    }
}

fn fail(e: Error) -> HtStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> HtStatus) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            HtStatus::Panic
        }
    }
}

fn guard_ptr(f: impl FnOnce() -> Result<HtProblem, Error>) -> *mut HtProblem {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(p)) => Box::into_raw(Box::new(p)),
        Ok(Err(e)) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

fn wrap(spec: ProblemSpec) -> HtProblem {
    HtProblem {
        spec,
        eval: EvalConfig::default(),
    }
}

/// Parse a JSON problem configuration. Returns NULL on failure.
///
/// # Safety
/// `json` must be NULL or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ht_problem_from_json(json: *const c_char) -> *mut HtProblem {
    if json.is_null() {
        set_error("json is NULL");
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("json is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    guard_ptr(|| ProblemConfig::from_json(text)?.problem().map(wrap))
}

/// Step temperature `t0` on `y > 0` and step flux `t0_prime` on `y < 0`.
#[no_mangle]
pub extern "C" fn ht_problem_new_step(t0: f64, t0_prime: f64) -> *mut HtProblem {
    guard_ptr(|| ProblemSpec::new(t0, t0_prime, ForcingProfile::UnitStep, ForcingProfile::UnitStep).map(wrap))
}

/// Ramp up on `[a, b]` and down on `[b, 2b - a]` superposed on a step
/// temperature; step flux.
#[no_mangle]
pub extern "C" fn ht_problem_new_ramp(t0: f64, t0_prime: f64, a: f64, b: f64) -> *mut HtProblem {
    guard_ptr(|| ProblemSpec::new(t0, t0_prime, ForcingProfile::ramp(a, b)?, ForcingProfile::UnitStep).map(wrap))
}

/// # Safety
/// `problem` must be NULL or a handle from one of the constructors, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ht_problem_free(problem: *mut HtProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Relative tolerance of the β-quadrature, in `[1e-14, 1e-2]`.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ht_problem_set_rel_tol(problem: *mut HtProblem, rel_tol: f64) -> HtStatus {
    let Some(p) = problem.as_mut() else {
        set_error("problem is NULL");
        return HtStatus::NullPointer;
    };
    let eval = p.eval.with_rel_tol(rel_tol);
    if let Err(e) = eval.validate() {
        return fail(e);
    }
    p.eval = eval;
    HtStatus::Ok
}

unsafe fn write_result(value: *mut f64, error_estimate: *mut f64, v: f64, e: f64) {
    *value = v;
    if !error_estimate.is_null() {
        *error_estimate = e;
    }
}

/// Temperature at `(x, y)` and time `t` in scaled units.
///
/// # Safety
/// `problem` must be a live handle and `value` writable. `error_estimate`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ht_temperature(
    problem: *const HtProblem,
    x: f64,
    y: f64,
    t: f64,
    value: *mut f64,
    error_estimate: *mut f64,
) -> HtStatus {
    let (Some(p), false) = (problem.as_ref(), value.is_null()) else {
        set_error("problem or value is NULL");
        return HtStatus::NullPointer;
    };
    guard(|| match temperature_at(x, y, t, &p.spec, &p.eval) {
        Ok(f) => {
            write_result(value, error_estimate, f.value, f.error_estimate);
            HtStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Temperature at polar position `(r, theta)`, `theta ∈ [-π/2, π/2]`.
///
/// # Safety
/// As [`ht_temperature`].
#[no_mangle]
pub unsafe extern "C" fn ht_temperature_polar(
    problem: *const HtProblem,
    r: f64,
    theta: f64,
    t: f64,
    value: *mut f64,
    error_estimate: *mut f64,
) -> HtStatus {
    let (Some(p), false) = (problem.as_ref(), value.is_null()) else {
        set_error("problem or value is NULL");
        return HtStatus::NullPointer;
    };
    guard(|| match temperature(r, theta, t, &p.spec, &p.eval) {
        Ok(f) => {
            write_result(value, error_estimate, f.value, f.error_estimate);
            HtStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Temperatures at `n` points `(xs[i], ys[i])`, all at time `t`. Stops at
/// the first failure; entries before it are filled in.
///
/// # Safety
/// `xs`, `ys` and `values` must each hold `n` elements; `error_estimates`
/// is NULL or holds `n` elements.
#[no_mangle]
pub unsafe extern "C" fn ht_temperature_many(
    problem: *const HtProblem,
    xs: *const f64,
    ys: *const f64,
    n: usize,
    t: f64,
    values: *mut f64,
    error_estimates: *mut f64,
) -> HtStatus {
    let Some(p) = problem.as_ref() else {
        set_error("problem is NULL");
        return HtStatus::NullPointer;
    };
    if n == 0 {
        return HtStatus::Ok;
    }
    if xs.is_null() || ys.is_null() || values.is_null() {
        set_error("coordinate or output array is NULL");
        return HtStatus::NullPointer;
    }
    let xs = std::slice::from_raw_parts(xs, n);
    let ys = std::slice::from_raw_parts(ys, n);
    guard(|| {
        for i in 0..n {
            match temperature_at(xs[i], ys[i], t, &p.spec, &p.eval) {
                Ok(f) => {
                    *values.add(i) = f.value;
                    if !error_estimates.is_null() {
                        *error_estimates.add(i) = f.error_estimate;
                    }
                }
                Err(e) => return fail(e),
            }
        }
        HtStatus::Ok
    })
}

/// `(1/(π√2)) ∫_1^∞ G(β, θ) dβ`, which equals `1 - H(θ)`.
///
/// # Safety
/// `value` must be writable; `error_estimate` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ht_identity_integral(
    theta: f64,
    rel_tol: f64,
    value: *mut f64,
    error_estimate: *mut f64,
) -> HtStatus {
    if value.is_null() {
        set_error("value is NULL");
        return HtStatus::NullPointer;
    }
    guard(|| {
        let cfg = EvalConfig::default().with_rel_tol(rel_tol).quadrature;
        match identity_integral(theta, &cfg) {
            Ok(r) => {
                write_result(value, error_estimate, r.value, r.error_estimate);
                HtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The contour kernel `G(β, θ)` for `β > 1`.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ht_kernel_g(beta: f64, theta: f64, value: *mut f64) -> HtStatus {
    if value.is_null() {
        set_error("value is NULL");
        return HtStatus::NullPointer;
    }
    guard(|| match kernel_g(beta, theta) {
        Ok(g) => {
            *value = g;
            HtStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Run the finite-difference solver to `t` on a grid of spacing `h` and
/// step `dt` (graded mesh), and compare it with the semi-analytical field
/// on the slices `x = 0.05, 0.2`, 41 points of `y ∈ [-1, 1]`.
/// Returns `HT_STATUS_VALIDATION_FAILED` when the largest difference
/// exceeds `tolerance`; `max_diff` is written in both cases.
///
/// # Safety
/// `problem` must be a live handle; `max_diff` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ht_validate(
    problem: *const HtProblem,
    t: f64,
    h: f64,
    dt: f64,
    tolerance: f64,
    max_diff: *mut f64,
) -> HtStatus {
    let Some(p) = problem.as_ref() else {
        set_error("problem is NULL");
        return HtStatus::NullPointer;
    };
    guard(|| {
        let grid = FdGrid::with_resolution(h, dt);
        let plan = ValidationPlan {
            t,
            tolerance,
            ..ValidationPlan::default()
        };
        match validate_field(&p.spec, &grid, &plan, &p.eval) {
            Ok(report) => {
                let c = report.comparison;
                if !max_diff.is_null() {
                    *max_diff = c.max_diff;
                }
                if c.passed {
                    HtStatus::Ok
                } else {
                    set_error(format!("max diff {:e} exceeds {:e}", c.max_diff, c.tolerance));
                    HtStatus::ValidationFailed
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be NULL or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ht_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
