//! C interface to `pqcycles`.
//!
//! Every fallible function returns a [`PqStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! can be read with [`pq_last_error`]. Objects are opaque handles owned by
//! the caller and released with the matching `*_free` function; strings
//! returned by the library are released with [`pq_string_free`].
//!
//! Rational inputs such as `tau` and coefficient values are UTF-8 strings
//! of the form `p/q` or `p`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pqcycles::analysis::ladder::{first_order_count, Ladder, PivotPolicy};
use pqcycles::expansion::{difference_jet, DifferenceJet, Route};
use pqcycles::numeric::{self, NumericParams};
use pqcycles::systems::{make_piecewise, parse_tau, CaseName};
use pqcycles::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Malformed input text such as a fraction or a JSON document.
    Parse = 3,
    /// Well-formed but unacceptable input, such as an unknown system.
    InvalidArgument = 4,
    /// The computation ran but could not produce a result.
    Computation = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// First-order cycle count of a ladder.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PqCountReport {
    pub order: u32,
    pub free_count: u32,
    pub simple_zeros: u32,
    pub pseudo_hopf: u32,
    pub total: u32,
}

/// Difference-function jet of one system on one switching line.
pub struct PqJet(DifferenceJet);

/// Independence ladder built from a jet.
pub struct PqLadder(Ladder);

/// Parameter set for the numeric oracle.
pub struct PqParams(NumericParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match root(&e) {
            Error::Parse(_) | Error::Json(_) => PqStatus::Parse,
            Error::UnknownSystem(_) | Error::Invalid(_) | Error::CapExceeded(_) => PqStatus::InvalidArgument,
            _ => PqStatus::Computation,
        };
        Fail(code, e.to_string())
    }
}

fn root(e: &Error) -> &Error {
    match e {
        Error::Stage { source, .. } => root(source),
        other => other,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PqStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            PqStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(PqStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|e| Fail(PqStatus::Computation, e.to_string()))
}

fn to_u32(n: usize) -> u32 {
    u32::try_from(n).unwrap_or(u32::MAX)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn pq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Computes the jet of `system` (`s1`..`s4`, `s1s2`) on the line with
/// slope parameter `tau`, to perturbation order `order` (1 or 2) and
/// radial order `n`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_expand(
    system: *const c_char,
    tau: *const c_char,
    order: u32,
    n: u32,
    out: *mut *mut PqJet,
) -> PqStatus {
    guard(|| {
        let name: CaseName = text(system, "system")?.parse()?;
        let tau = parse_tau(text(tau, "tau")?)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let pc = make_piecewise(name, &tau)?;
        let jet = difference_jet(&pc, order as usize, n as usize, Route::default())?;
        put(out, Box::into_raw(Box::new(PqJet(jet))))
    })
}

/// Reads a jet from its JSON document.
///
/// # Safety
/// `json` must be null or NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_from_json(json: *const c_char, out: *mut *mut PqJet) -> PqStatus {
    guard(|| {
        let v: serde_json::Value = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        let jet = DifferenceJet::from_json(&v)?;
        put(out, Box::into_raw(Box::new(PqJet(jet))))
    })
}

/// Serializes a jet; free the result with [`pq_string_free`].
///
/// # Safety
/// `jet` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_to_json(jet: *const PqJet, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        let jet = handle(jet, "jet")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        put(out, c_string(jet.0.to_json().to_string())?)
    })
}

/// Perturbation order of a jet, or 0 for a null handle.
///
/// # Safety
/// `jet` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_order(jet: *const PqJet) -> u32 {
    jet.as_ref().map_or(0, |j| to_u32(j.0.order))
}

/// Radial order of a jet, or 0 for a null handle.
///
/// # Safety
/// `jet` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_radial_order(jet: *const PqJet) -> u32 {
    jet.as_ref().map_or(0, |j| to_u32(j.0.n))
}

/// Coefficient `psi_{i,j}` rendered as text, e.g. `-1/2*pi*a+10 + b-01`.
/// Free the result with [`pq_string_free`].
///
/// # Safety
/// `jet` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_coefficient(jet: *const PqJet, i: u32, j: u32, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        let jet = handle(jet, "jet")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let c = jet.0.get(i as usize, j as usize)?;
        put(out, c_string(c.to_string())?)
    })
}

/// Releases a jet. Null is ignored.
///
/// # Safety
/// `jet` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_jet_free(jet: *mut PqJet) {
    if !jet.is_null() {
        drop(Box::from_raw(jet));
    }
}

/// Builds the first-order independence ladder of a jet. `policy` is
/// `canonical` or `paper`; null means `canonical`.
///
/// # Safety
/// `jet` must be null or a live handle, `policy` null or NUL-terminated,
/// `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_ladder_build(
    jet: *const PqJet,
    policy: *const c_char,
    out: *mut *mut PqLadder,
) -> PqStatus {
    guard(|| {
        let jet = handle(jet, "jet")?;
        let policy: PivotPolicy = if policy.is_null() { PivotPolicy::Canonical } else { text(policy, "policy")?.parse()? };
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let l = Ladder::build(&jet.0, policy)?;
        put(out, Box::into_raw(Box::new(PqLadder(l))))
    })
}

/// Cycle count guaranteed by the ladder's free coefficients.
///
/// # Safety
/// `ladder` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_ladder_count(ladder: *const PqLadder, out: *mut PqCountReport) -> PqStatus {
    guard(|| {
        let r = first_order_count(&handle(ladder, "ladder")?.0)?;
        put(
            out,
            PqCountReport {
                order: to_u32(r.order),
                free_count: to_u32(r.free_count),
                simple_zeros: to_u32(r.simple_zeros),
                pseudo_hopf: to_u32(r.pseudo_hopf),
                total: to_u32(r.total),
            },
        )
    })
}

/// Releases a ladder. Null is ignored.
///
/// # Safety
/// `ladder` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_ladder_free(ladder: *mut PqLadder) {
    if !ladder.is_null() {
        drop(Box::from_raw(ladder));
    }
}

/// New numeric parameter set on line `tau` with perturbation size `eps`
/// and all coefficients zero.
///
/// # Safety
/// `tau` must be null or NUL-terminated; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_params_new(tau: *const c_char, eps: f64, out: *mut *mut PqParams) -> PqStatus {
    guard(|| {
        let tau = parse_tau(text(tau, "tau")?)?;
        if !eps.is_finite() {
            return Err(Fail(PqStatus::InvalidArgument, format!("eps must be finite, got {eps}")));
        }
        put(out, Box::into_raw(Box::new(PqParams(NumericParams::new(tau, eps)))))
    })
}

/// Sets a perturbation coefficient by name (`a+10`, `b-02`, ...) to an
/// exact rational value.
///
/// # Safety
/// `params` must be null or a live handle; strings null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pq_params_set(params: *mut PqParams, name: *const c_char, value: *const c_char) -> PqStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        let v = parse_tau(text(value, "value")?)?;
        p.0.set(text(name, "name")?, v)?;
        Ok(())
    })
}

/// Sets a perturbation coefficient by name to the exact value of a double.
///
/// # Safety
/// `params` must be null or a live handle; `name` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pq_params_set_f64(params: *mut PqParams, name: *const c_char, value: f64) -> PqStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        p.0.set_f64(text(name, "name")?, value)?;
        Ok(())
    })
}

/// Releases a parameter set. Null is ignored.
///
/// # Safety
/// `params` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_params_free(params: *mut PqParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Integrated displacement `Delta(r, eps)` of the perturbed system.
///
/// # Safety
/// `system` must be null or NUL-terminated, `params` null or a live
/// handle, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_displacement(
    system: *const c_char,
    params: *const PqParams,
    r: f64,
    out: *mut f64,
) -> PqStatus {
    guard(|| {
        let name: CaseName = text(system, "system")?.parse()?;
        let p = handle(params, "params")?;
        let d = numeric::displacement(name, &p.0, r)?;
        put(out, d.delta)
    })
}

/// Displacement predicted by a jet at the given parameters.
///
/// # Safety
/// Handles must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_predicted_delta(
    jet: *const PqJet,
    params: *const PqParams,
    r: f64,
    out: *mut f64,
) -> PqStatus {
    guard(|| {
        let jet = handle(jet, "jet")?;
        let p = handle(params, "params")?;
        put(out, numeric::predicted_delta(&jet.0, &p.0, r))
    })
}

/// `|Delta(r, 0)|` of the unperturbed system, which vanishes for a center.
///
/// # Safety
/// Strings must be null or NUL-terminated; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_center_closure(system: *const c_char, tau: *const c_char, r: f64, out: *mut f64) -> PqStatus {
    guard(|| {
        let name: CaseName = text(system, "system")?.parse()?;
        let tau = parse_tau(text(tau, "tau")?)?;
        put(out, numeric::center_closure(name, &tau, r)?)
    })
}
