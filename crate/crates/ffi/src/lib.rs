//! C interface to `polling-core`.
//!
//! Specs live behind an opaque [`PollingSpecHandle`] created from plan text
//! and released with [`polling_spec_free`]. Every fallible call returns a
//! [`PollingStatus`]; on failure the message is available from
//! [`polling_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use polling_core::experiment::{self, MomentClass, Verdict};
use polling_core::fluid::{fluid_empty_time, FluidOptions, FluidState};
use polling_core::lyapunov::{self, KOptions, S0Options, S0Outcome};
use polling_core::model::ValidatedSpec;
use polling_core::plan::{self, ClassifyParams};
use polling_core::stream::RegimeStream;
use polling_core::Error;

/// Opaque validated system description.
pub struct PollingSpecHandle {
    spec: ValidatedSpec,
    seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollingStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    InvalidArgument = 5,
    Io = 6,
    Numerical = 7,
    Unsupported = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollingS0Kind {
    /// `s0 = 0`: the system is transient.
    AtZero = 0,
    /// `s0` lies in `[lo, hi]`.
    Bracket = 1,
    /// `s0 >= lo`.
    LowerBound = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollingVerdict {
    Transient = 0,
    NullRecurrent = 1,
    PositiveRecurrent = 2,
    /// Recurrent, with the first moment of the emptying time unresolved.
    Recurrent = 3,
    Undecided = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PollingStatus {
    match e {
        Error::Parse { .. } => PollingStatus::Parse,
        Error::Validation(_) | Error::RegimeShape { .. } | Error::InvalidState(_) => PollingStatus::Validation,
        Error::InvalidArgument(_) | Error::InsufficientTail(_) => PollingStatus::InvalidArgument,
        Error::Io { .. } => PollingStatus::Io,
        Error::Unsupported(_) => PollingStatus::Unsupported,
        _ => PollingStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (PollingStatus, String)>>(f: F) -> PollingStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PollingStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PollingStatus::Panic
        }
    }
}

fn core<T>(r: polling_core::Result<T>) -> Result<T, (PollingStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PollingStatus, String) {
    (PollingStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PollingStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (PollingStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn spec_arg<'a>(h: *const PollingSpecHandle) -> Result<&'a PollingSpecHandle, (PollingStatus, String)> {
    h.as_ref().ok_or_else(|| null("spec handle"))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PollingStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn store_handle(p: plan::ExperimentPlan, out: &mut *mut PollingSpecHandle) {
    *out = Box::into_raw(Box::new(PollingSpecHandle { spec: p.spec, seed: p.seed }));
}

/// Parses plan text (the same format the `polling` CLI reads) and keeps its
/// system and seed. The action section is parsed but not used.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polling_spec_from_plan_text(
    text: *const c_char,
    out: *mut *mut PollingSpecHandle,
) -> PollingStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let p = core(plan::parse_plan(str_arg(text, "text")?))?;
        store_handle(p, out);
        Ok(())
    })
}

/// As [`polling_spec_from_plan_text`], reading the plan from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polling_spec_from_plan_file(
    path: *const c_char,
    out: *mut *mut PollingSpecHandle,
) -> PollingStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let p = core(plan::load_plan(Path::new(str_arg(path, "path")?)))?;
        store_handle(p, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from one of the constructors and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn polling_spec_free(h: *mut PollingSpecHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of stations, `d + 1`. Returns 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polling_spec_stations(h: *const PollingSpecHandle) -> usize {
    h.as_ref().map_or(0, |h| h.spec.stations())
}

/// Seed from the plan's `seed` section.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polling_spec_seed(h: *const PollingSpecHandle) -> u64 {
    h.as_ref().map_or(0, |h| h.seed)
}

/// Top Lyapunov exponent of the cycle-matrix products, per cycle.
///
/// # Safety
/// `h` must be a live handle; `lambda` and `std_err` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn polling_top_exponent(
    h: *const PollingSpecHandle,
    n: usize,
    replicas: usize,
    seed: u64,
    lambda: *mut f64,
    std_err: *mut f64,
) -> PollingStatus {
    guard(|| {
        let h = spec_arg(h)?;
        let (lambda, std_err) = (out_arg(lambda, "lambda")?, out_arg(std_err, "std_err")?);
        let t = core(lyapunov::estimate_top_exponent(&h.spec, n, replicas, seed))?;
        *lambda = t.lambda;
        *std_err = t.stderr;
        Ok(())
    })
}

/// Moment growth rate `k(s)` from `replicas` products of `n` cycles.
///
/// # Safety
/// `h` must be a live handle; `k` and `std_err` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn polling_estimate_k(
    h: *const PollingSpecHandle,
    s: f64,
    n: usize,
    replicas: usize,
    seed: u64,
    k: *mut f64,
    std_err: *mut f64,
) -> PollingStatus {
    guard(|| {
        let h = spec_arg(h)?;
        let (k, std_err) = (out_arg(k, "k")?, out_arg(std_err, "std_err")?);
        let est = core(lyapunov::estimate_k(&h.spec, s, KOptions::new(n, replicas, seed)))?;
        *k = est.k_hat;
        *std_err = est.stderr;
        Ok(())
    })
}

/// Searches for `s0` on `[0, s_max]` with default settings. For
/// [`PollingS0Kind::LowerBound`] only `lo` is meaningful; for
/// [`PollingS0Kind::AtZero`] both are 0.
///
/// # Safety
/// `h` must be a live handle; the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn polling_estimate_s0(
    h: *const PollingSpecHandle,
    s_max: f64,
    seed: u64,
    kind: *mut PollingS0Kind,
    lo: *mut f64,
    hi: *mut f64,
) -> PollingStatus {
    guard(|| {
        let h = spec_arg(h)?;
        let (kind, lo, hi) = (out_arg(kind, "kind")?, out_arg(lo, "lo")?, out_arg(hi, "hi")?);
        let top = core(lyapunov::estimate_top_exponent(&h.spec, 1000, 64, polling_core::seed::derive(seed, "top", 0)))?;
        let opts = S0Options { s_max, seed, ..S0Options::default() };
        let r = core(lyapunov::estimate_s0(&h.spec, &top, opts))?;
        (*kind, *lo, *hi) = match r.outcome {
            S0Outcome::AtZero => (PollingS0Kind::AtZero, 0.0, 0.0),
            S0Outcome::Bracket { lo, hi } => (PollingS0Kind::Bracket, lo, hi),
            S0Outcome::LowerBound(m) => (PollingS0Kind::LowerBound, m, f64::INFINITY),
        };
        Ok(())
    })
}

/// Full classification with default parameters.
///
/// # Safety
/// `h` must be a live handle and `verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polling_classify(
    h: *const PollingSpecHandle,
    seed: u64,
    verdict: *mut PollingVerdict,
) -> PollingStatus {
    guard(|| {
        let h = spec_arg(h)?;
        let verdict = out_arg(verdict, "verdict")?;
        let params = ClassifyParams { grid_step: 0.0, ..ClassifyParams::default() };
        let v = core(experiment::classify(&h.spec, &params, seed))?;
        *verdict = match (v.verdict, v.moment_class) {
            (Verdict::Transient, _) => PollingVerdict::Transient,
            (Verdict::Undecided, _) => PollingVerdict::Undecided,
            (_, Some(MomentClass::NullRecurrent)) => PollingVerdict::NullRecurrent,
            (_, Some(MomentClass::PositiveRecurrent | MomentClass::AllTestedMomentsFinite)) => {
                PollingVerdict::PositiveRecurrent
            }
            _ => PollingVerdict::Recurrent,
        };
        Ok(())
    })
}

/// Fluid emptying time from the `d` levels `x[0..len]` (relative to the station
/// visited at `epoch`). Sets `*diverged` to 1 and `*time` to infinity when
/// the fluid run grows without bound.
///
/// # Safety
/// `h` must be a live handle, `x` must point to `len` doubles, and `time`
/// and `diverged` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn polling_fluid_empty_time(
    h: *const PollingSpecHandle,
    x: *const f64,
    len: usize,
    epoch: usize,
    seed: u64,
    time: *mut f64,
    diverged: *mut i32,
) -> PollingStatus {
    guard(|| {
        let h = spec_arg(h)?;
        if x.is_null() {
            return Err(null("x"));
        }
        let (time, diverged) = (out_arg(time, "time")?, out_arg(diverged, "diverged")?);
        let levels = std::slice::from_raw_parts(x, len).to_vec();
        let stream = RegimeStream::new(&h.spec, seed);
        let run = core(fluid_empty_time(&h.spec, &FluidState::new(epoch, levels), &stream, FluidOptions::default()))?;
        match run.outcome.total() {
            Some(t) => (*time, *diverged) = (t, 0),
            None => (*time, *diverged) = (f64::INFINITY, 1),
        }
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn polling_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn polling_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
