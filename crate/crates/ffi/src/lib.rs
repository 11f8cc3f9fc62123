//! C ABI for `roughmarket`.
//!
//! Paths are opaque `RmPath` handles created by one of the `rm_path_*`
//! constructors and released with `rm_path_free`. Every fallible call
//! returns an `RmStatus`; on failure `rm_last_error_message` describes the
//! error of the most recent failing call on the current thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use roughmarket::paths::{generate, read_path, GeneratorSpec, PathError, PricePath};
use roughmarket::strategies::{doob_strategy, prop3_case, run_simple, upper_prob_singleton, StrategyError};
use roughmarket::variation::{crossings, var_phi, var_signed, VariationError, VariationFunctional};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPath = 3,
    Io = 4,
    Variation = 5,
    Strategy = 6,
    /// The capital bound was computed but does not hold.
    BoundViolated = 7,
    Panic = 99,
}

/// Opaque price path.
pub struct RmPath(PricePath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RmStatus, String);

impl From<PathError> for Failure {
    fn from(e: PathError) -> Self {
        let status = match e {
            PathError::Io(_) => RmStatus::Io,
            _ => RmStatus::InvalidPath,
        };
        Failure(status, e.to_string())
    }
}

impl From<VariationError> for Failure {
    fn from(e: VariationError) -> Self {
        Failure(RmStatus::Variation, e.to_string())
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        let status = match e {
            StrategyError::BoundViolated { .. } => RmStatus::BoundViolated,
            StrategyError::Path(_) => RmStatus::InvalidPath,
            StrategyError::Variation(_) => RmStatus::Variation,
            _ => RmStatus::Strategy,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RmStatus::Panic
        }
    }
}

unsafe fn path_ref<'a>(path: *const RmPath) -> Result<&'a PricePath, Failure> {
    path.as_ref().map(|p| &p.0).ok_or_else(|| null("path"))
}

unsafe fn out_ref<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    out.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(RmStatus::InvalidArgument, format!("{what}: {e}")))
}

unsafe fn emit(out: *mut *mut RmPath, path: PricePath) -> Result<(), Failure> {
    *out_ref(out, "out")? = Box::into_raw(Box::new(RmPath(path)));
    Ok(())
}

/// Builds a path from `n` samples. `times` may be null for a uniform grid
/// on `[0, horizon]`.
///
/// # Safety
/// `values` (and `times` if non-null) must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_path_new(
    times: *const f64,
    values: *const f64,
    n: usize,
    horizon: f64,
    out: *mut *mut RmPath,
) -> RmStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let v = std::slice::from_raw_parts(values, n).to_vec();
        let path = if times.is_null() {
            PricePath::uniform(v, horizon)?
        } else {
            PricePath::new(std::slice::from_raw_parts(times, n).to_vec(), v, horizon)?
        };
        emit(out, path)
    })
}

/// Generates a path from a JSON generator spec such as
/// `{"kind": "exp-fractional", "hurst": 0.4, "n_samples": 1025, "seed": 7}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_path_generate_json(spec_json: *const c_char, out: *mut *mut RmPath) -> RmStatus {
    guard(|| {
        let text = c_str(spec_json, "spec_json")?;
        let spec: GeneratorSpec = serde_json::from_str(text)
            .map_err(|e| Failure(RmStatus::InvalidArgument, format!("generator spec: {e}")))?;
        emit(out, generate(&spec)?)
    })
}

/// Reads a `t,x` CSV path file.
///
/// # Safety
/// `file` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_path_read_csv(file: *const c_char, out: *mut *mut RmPath) -> RmStatus {
    guard(|| emit(out, read_path(c_str(file, "file")?)?))
}

/// # Safety
/// `path` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_path_free(path: *mut RmPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_path_len(path: *const RmPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// Sample values, valid while the handle lives; null for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rm_path_values(path: *const RmPath) -> *const f64 {
    path.as_ref().map_or(std::ptr::null(), |p| p.0.values().as_ptr())
}

/// `var_p` of the path.
///
/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_var_power(path: *const RmPath, p: f64, out: *mut f64) -> RmStatus {
    guard(|| {
        let v = var_phi(path_ref(path)?, &VariationFunctional::power(p))?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Variation with Taylor's gauge `u² / (2 ln* ln* u)`.
///
/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_var_psi(path: *const RmPath, out: *mut f64) -> RmStatus {
    guard(|| {
        let v = var_phi(path_ref(path)?, &VariationFunctional::TaylorPsi)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Total, positive and negative variation of the path.
///
/// # Safety
/// `path` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_var_signed(
    path: *const RmPath,
    var: *mut f64,
    plus: *mut f64,
    minus: *mut f64,
) -> RmStatus {
    guard(|| {
        let s = var_signed(path_ref(path)?.values());
        *out_ref(var, "var")? = s.var;
        *out_ref(plus, "plus")? = s.plus;
        *out_ref(minus, "minus")? = s.minus;
        Ok(())
    })
}

/// Upcrossings and downcrossings of `(a, b)`.
///
/// # Safety
/// `path` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_crossings(path: *const RmPath, a: f64, b: f64, up: *mut u64, down: *mut u64) -> RmStatus {
    guard(|| {
        let c = crossings(path_ref(path)?.values(), a, b)?;
        *out_ref(up, "up")? = c.up;
        *out_ref(down, "down")? = c.down;
        Ok(())
    })
}

/// Upper probability of the singleton `{ω}` for a positive path.
///
/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_upper_prob(path: *const RmPath, out: *mut f64) -> RmStatus {
    guard(|| {
        let v = upper_prob_singleton(path_ref(path)?)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Terminal capital of Doob's strategy on `(a, b)`.
///
/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_doob_terminal(path: *const RmPath, a: f64, b: f64, out: *mut f64) -> RmStatus {
    guard(|| {
        let trace = run_simple(&doob_strategy(a, b)?, path_ref(path)?)?;
        *out_ref(out, "out")? = trace.terminal();
        Ok(())
    })
}

/// Runs the level mixture on the path sampled at `n` intervals and checks
/// its terminal capital against the variation bound. `terminal` and `rhs`
/// are written whenever they were computed, including on
/// `RM_STATUS_BOUND_VIOLATED`.
///
/// # Safety
/// `path` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rm_prop3_verify(
    path: *const RmPath,
    epsilon: f64,
    delta: f64,
    n: usize,
    terminal: *mut f64,
    rhs: *mut f64,
) -> RmStatus {
    guard(|| {
        let terminal = out_ref(terminal, "terminal")?;
        let rhs = out_ref(rhs, "rhs")?;
        let r = prop3_case(path_ref(path)?, epsilon, delta, n)?;
        *terminal = r.terminal_capital;
        *rhs = r.rhs;
        if r.pass {
            Ok(())
        } else {
            Err(StrategyError::BoundViolated { terminal: r.terminal_capital, rhs: r.rhs }.into())
        }
    })
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}
