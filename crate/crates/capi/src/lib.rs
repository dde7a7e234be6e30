//! C ABI for the separability toolkit. Handles are opaque pointers owned
//! by the caller and released with the matching `_free`; every function
//! returns a status code, and `ksep_last_error` fetches a human-readable
//! message for the most recent failure on the calling thread.
//!
//! The generated header lands in `include/ksep.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};

use ksep::criteria::{classify_with_eps, theorem1_with_eps};
use ksep::probes::{Probe, catalog};
use ksep::scan::analytic_w_threshold;
use ksep::states::{FamilyPoint, family_state};
use ksep::tensor::DensityOperator;

/// Result of any API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KsepStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null or an argument was structurally unusable.
    InvalidArgument = 1,
    /// The input was parsed but violated a documented invariant.
    ValidationFailed = 2,
    /// An unexpected internal failure; treat the handle set as poisoned.
    InternalError = 3,
}

/// An immutable n-partite density operator.
pub struct KsepState(DensityOperator);

/// An immutable probe: one (base, flipped) vector pair per site.
pub struct KsepProbe(Probe);

/// One evaluation of the level-k separability inequality.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KsepReport {
    pub k: usize,
    pub lhs: f64,
    pub rhs_pair: f64,
    pub rhs_diag: f64,
    pub margin: f64,
    /// True when the margin exceeds the detection threshold, certifying
    /// that the state is not k-separable.
    pub detected: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: KsepStatus, message: impl AsRef<str>) -> KsepStatus {
    let text = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("nul bytes stripped");
    });
    status
}

fn guard<F: FnOnce() -> KsepStatus>(body: F) -> KsepStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(KsepStatus::InternalError, "internal panic"),
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, KsepStatus> {
    if text.is_null() {
        return Err(fail(KsepStatus::InvalidArgument, "string argument is null"));
    }
    unsafe { CStr::from_ptr(text) }
        .to_str()
        .map_err(|_| fail(KsepStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn ksep_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a state from the JSON file format (dims plus a dense matrix or a
/// pure-state ensemble). On success `*out` owns the new handle.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksep_state_from_json(
    json: *const c_char,
    out: *mut *mut KsepState,
) -> KsepStatus {
    guard(|| {
        if out.is_null() {
            return fail(KsepStatus::InvalidArgument, "out pointer is null");
        }
        let text = match unsafe { read_str(json) } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match ksep::io::state_from_json(text) {
            Ok(rho) => {
                unsafe { *out = Box::into_raw(Box::new(KsepState(rho))) };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Build a state from a named family: "gw" (p1=alpha, p2=beta), "w-noise"
/// (p1=beta, p2 ignored), or "w-antiw" (p1=a, p2=b).
///
/// # Safety
/// `family` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksep_state_family(
    family: *const c_char,
    n: usize,
    p1: f64,
    p2: f64,
    out: *mut *mut KsepState,
) -> KsepStatus {
    guard(|| {
        if out.is_null() {
            return fail(KsepStatus::InvalidArgument, "out pointer is null");
        }
        let family = match unsafe { read_str(family) } {
            Ok(text) => text,
            Err(status) => return status,
        };
        let point = match family {
            "gw" => FamilyPoint::GhzW {
                n,
                alpha: p1,
                beta: p2,
            },
            "w-noise" => FamilyPoint::WNoise { n, beta: p1 },
            "w-antiw" => FamilyPoint::WAntiW { n, a: p1, b: p2 },
            other => {
                return fail(
                    KsepStatus::InvalidArgument,
                    format!("unknown family {other:?}; expected gw, w-noise, or w-antiw"),
                );
            }
        };
        match family_state(&point) {
            Ok(rho) => {
                unsafe { *out = Box::into_raw(Box::new(KsepState(rho))) };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Build a stock probe ("computational", "45", or "phase-flip") matched to
/// the state's dimensions.
///
/// # Safety
/// `state` must be a live handle; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ksep_probe_named(
    state: *const KsepState,
    name: *const c_char,
    out: *mut *mut KsepProbe,
) -> KsepStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return fail(KsepStatus::InvalidArgument, "state or out pointer is null");
        }
        let name = match unsafe { read_str(name) } {
            Ok(text) => text,
            Err(status) => return status,
        };
        let dims = unsafe { &*state }.0.dims();
        let probe = match name {
            "computational" => Probe::computational(dims),
            "45" => Probe::diagonal_45(dims),
            "phase-flip" => Probe::phase_flip(dims),
            other => {
                return fail(
                    KsepStatus::InvalidArgument,
                    format!("unknown probe {other:?}; expected computational, 45, or phase-flip"),
                );
            }
        };
        match probe {
            Ok(probe) => {
                unsafe { *out = Box::into_raw(Box::new(KsepProbe(probe))) };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Build the seeded Haar-random probe for the state's dimensions.
///
/// # Safety
/// `state` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ksep_probe_random(
    state: *const KsepState,
    seed: u64,
    out: *mut *mut KsepProbe,
) -> KsepStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return fail(KsepStatus::InvalidArgument, "state or out pointer is null");
        }
        match Probe::random(unsafe { &*state }.0.dims(), seed) {
            Ok(probe) => {
                unsafe { *out = Box::into_raw(Box::new(KsepProbe(probe))) };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Evaluate the level-k inequality. `eps` is the detection threshold on
/// the margin; pass 1e-9 for the library default.
///
/// # Safety
/// `state` and `probe` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ksep_evaluate(
    state: *const KsepState,
    probe: *const KsepProbe,
    k: usize,
    eps: f64,
    out: *mut KsepReport,
) -> KsepStatus {
    guard(|| {
        if state.is_null() || probe.is_null() || out.is_null() {
            return fail(KsepStatus::InvalidArgument, "state, probe, or out pointer is null");
        }
        let (state, probe) = unsafe { (&*state, &*probe) };
        match theorem1_with_eps(&state.0, &probe.0, k, eps) {
            Ok(report) => {
                unsafe {
                    *out = KsepReport {
                        k: report.k,
                        lhs: report.lhs,
                        rhs_pair: report.rhs_pair,
                        rhs_diag: report.rhs_diag,
                        margin: report.margin,
                        detected: report.detected,
                    };
                }
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Smallest k in 2..=n detected by the stock probe catalog, or 0 when
/// nothing is detected.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ksep_classify_min_k(
    state: *const KsepState,
    eps: f64,
    out: *mut usize,
) -> KsepStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return fail(KsepStatus::InvalidArgument, "state or out pointer is null");
        }
        let rho = &unsafe { &*state }.0;
        let probes = match catalog(rho.dims()) {
            Ok(probes) => probes,
            Err(e) => return fail(KsepStatus::ValidationFailed, e.to_string()),
        };
        match classify_with_eps(rho, &probes, eps) {
            Ok(result) => {
                unsafe { *out = result.min_k.unwrap_or(0) };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// The exact noise threshold beta* = n(2n-k-1)/(2^n(k-1)+n(2n-k-1)) above
/// which the W-plus-noise family is detectably k-nonseparable.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ksep_w_noise_threshold(n: usize, k: usize, out: *mut f64) -> KsepStatus {
    guard(|| {
        if out.is_null() {
            return fail(KsepStatus::InvalidArgument, "out pointer is null");
        }
        match analytic_w_threshold(n, k) {
            Ok(threshold) => {
                unsafe { *out = threshold.value() };
                KsepStatus::Ok
            }
            Err(e) => fail(KsepStatus::ValidationFailed, e.to_string()),
        }
    })
}

/// Number of local measurement settings the plan needs for n sites:
/// 5(n^2-n)/2 + n + 1.
#[no_mangle]
pub extern "C" fn ksep_plan_settings_count(n: usize) -> usize {
    ksep::measurement::expected_settings(n)
}

/// Release a state handle. Null is a safe no-op.
///
/// # Safety
/// `state` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ksep_state_free(state: *mut KsepState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Release a probe handle. Null is a safe no-op.
///
/// # Safety
/// `probe` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ksep_probe_free(probe: *mut KsepProbe) {
    if !probe.is_null() {
        drop(unsafe { Box::from_raw(probe) });
    }
}
