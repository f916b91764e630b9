//! C ABI for the mu-entropy library.
//!
//! Callers parse a JSON experiment document into an opaque handle, run
//! computations against the handle, and read scalar results through
//! out-parameters. Every function returns a status code; on a nonzero code,
//! [`muent_last_error`] yields a human-readable message for the calling
//! thread. Handles are freed with [`muent_experiment_free`] and must not be
//! shared across threads without external synchronization.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mu_entropy::config::ExperimentConfig;
use mu_entropy::entropy::{
    exact_entropy_sb, partition_entropy, sb_truncation, truncation_entropy_series,
    DEFAULT_DIVERGENCE_EPS, DEFAULT_DP_BUDGET,
};
use mu_entropy::operators::truncate;
use mu_entropy::Error;

/// Success.
pub const MUENT_OK: i32 = 0;
/// A required pointer argument was null.
pub const MUENT_ERR_NULL: i32 = 1;
/// Configuration problem: invalid JSON, bad measure/operator/partition data.
pub const MUENT_ERR_CONFIG: i32 = 2;
/// Enumeration budget exceeded.
pub const MUENT_ERR_BUDGET: i32 = 3;
/// Numerical failure or a matrix outside the semibistochastic class.
pub const MUENT_ERR_NUMERICAL: i32 = 4;
/// A callee panicked; the handle may be in an unusable state.
pub const MUENT_ERR_PANIC: i32 = 5;

/// Opaque experiment handle: a parsed configuration document.
pub struct MuentExperiment {
    cfg: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => MUENT_ERR_BUDGET,
        Error::Numerical(_) | Error::NotSemibistochastic(_) => MUENT_ERR_NUMERICAL,
        _ => MUENT_ERR_CONFIG,
    }
}

fn guarded(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            MUENT_ERR_PANIC
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn muent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse a JSON experiment document into a handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle.
#[no_mangle]
pub unsafe extern "C" fn muent_experiment_parse(
    json: *const c_char,
    out: *mut *mut MuentExperiment,
) -> i32 {
    guarded(|| {
        if json.is_null() || out.is_null() {
            set_error("null argument");
            return MUENT_ERR_NULL;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("config is not valid UTF-8");
                return MUENT_ERR_CONFIG;
            }
        };
        match ExperimentConfig::from_json(text) {
            Ok(cfg) => {
                unsafe { *out = Box::into_raw(Box::new(MuentExperiment { cfg })) };
                MUENT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                code_of(&e)
            }
        }
    })
}

/// Release a handle obtained from [`muent_experiment_parse`]. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by
/// [`muent_experiment_parse`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn muent_experiment_free(handle: *mut MuentExperiment) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

unsafe fn with_experiment(
    handle: *const MuentExperiment,
    out: *mut f64,
    f: impl FnOnce(&ExperimentConfig) -> Result<f64, Error>,
) -> i32 {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            set_error("null argument");
            return MUENT_ERR_NULL;
        }
        let cfg = unsafe { &(*handle).cfg };
        match f(cfg) {
            Ok(v) => {
                unsafe { *out = v };
                MUENT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                code_of(&e)
            }
        }
    })
}

/// μ-norm ‖U_J‖²_μ of the truncated operator.
///
/// # Safety
/// `handle` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muent_mu_norm_sq(
    handle: *const MuentExperiment,
    out: *mut f64,
) -> i32 {
    unsafe {
        with_experiment(handle, out, |cfg| {
            let u = truncate(&cfg.build_spec()?, cfg.dimension()?)?;
            Ok(mu_entropy::mu_norm::mu_norm_sq(&u))
        })
    }
}

/// Exact finite-dimensional entropy 𝔥(U_J) in nats via the closed form.
///
/// # Safety
/// `handle` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muent_exact_entropy(
    handle: *const MuentExperiment,
    out: *mut f64,
) -> i32 {
    unsafe {
        with_experiment(handle, out, |cfg| {
            let spec = cfg.build_spec()?;
            let j = cfg.dimension()?;
            let b = sb_truncation(&spec, j)?;
            Ok(exact_entropy_sb(&b, &spec.measure().prefix(j)?)?.value)
        })
    }
}

/// Partition entropy 𝔥(U,χ,n) in nats; `n` overrides `params.n` when
/// positive.
///
/// # Safety
/// `handle` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muent_partition_entropy(
    handle: *const MuentExperiment,
    n: u32,
    out: *mut f64,
) -> i32 {
    unsafe {
        with_experiment(handle, out, |cfg| {
            let n = if n > 0 {
                n as usize
            } else {
                cfg.params.n.ok_or_else(|| Error::Config("params.n is required".into()))?
            };
            let u = truncate(&cfg.build_spec()?, cfg.dimension()?)?;
            let chi = cfg.build_partition()?;
            let budget = cfg.params.budget.unwrap_or(DEFAULT_DP_BUDGET);
            partition_entropy(&u, &chi, n, budget)
        })
    }
}

/// Final value of the truncation entropy series 𝔥(U_J), J = 1..=Jmax, in
/// nats; `*divergent` (optional) reports the growth flag as 0/1.
///
/// # Safety
/// `handle` must be a live handle; `out` must be a valid pointer;
/// `divergent` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muent_truncation_entropy(
    handle: *const MuentExperiment,
    out: *mut f64,
    divergent: *mut i32,
) -> i32 {
    unsafe {
        with_experiment(handle, out, |cfg| {
            let spec = cfg.build_spec()?;
            let jmax = cfg.params.jmax.or(cfg.params.j).unwrap_or(cfg.dimension()?);
            let eps = cfg.params.divergence_eps.unwrap_or(DEFAULT_DIVERGENCE_EPS);
            let r = truncation_entropy_series(&spec, jmax, eps)?;
            if !divergent.is_null() {
                *divergent = i32::from(r.diagnostics.divergent);
            }
            Ok(r.value)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn parse(json: &str) -> *mut MuentExperiment {
        let c = CString::new(json).unwrap();
        let mut h: *mut MuentExperiment = ptr::null_mut();
        let code = unsafe { muent_experiment_parse(c.as_ptr(), &mut h) };
        assert_eq!(code, MUENT_OK);
        assert!(!h.is_null());
        h
    }

    #[test]
    fn parse_compute_free() {
        let h = parse(
            r#"{
                "measure": {"kind": "explicit", "weights": [0.25, 0.25, 0.25, 0.25]},
                "operator": {"kind": "block_b_alpha", "sizes": [2, 2]},
                "params": {}
            }"#,
        );
        let mut v = f64::NAN;
        // two 2-blocks of entries 1/2: Σ_j μ_j Σ_k |1/2|² = 4 · 1/4 · 1/2
        assert_eq!(unsafe { muent_mu_norm_sq(h, &mut v) }, MUENT_OK);
        assert!((v - 0.5).abs() < 1e-12);
        assert_eq!(unsafe { muent_exact_entropy(h, &mut v) }, MUENT_OK);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(unsafe { muent_partition_entropy(h, 2, &mut v) }, MUENT_OK);
        assert!(v >= 0.0);
        let mut divergent = -1;
        assert_eq!(unsafe { muent_truncation_entropy(h, &mut v, &mut divergent) }, MUENT_OK);
        assert_eq!(divergent, 0);
        unsafe { muent_experiment_free(h) };
    }

    #[test]
    fn bad_json_reports_config_error() {
        let c = CString::new("{not json").unwrap();
        let mut h: *mut MuentExperiment = ptr::null_mut();
        let code = unsafe { muent_experiment_parse(c.as_ptr(), &mut h) };
        assert_eq!(code, MUENT_ERR_CONFIG);
        assert!(h.is_null());
        let msg = unsafe { CStr::from_ptr(muent_last_error()) };
        assert!(!msg.to_bytes().is_empty());
    }

    #[test]
    fn null_arguments_rejected() {
        let mut v = 0.0;
        assert_eq!(unsafe { muent_mu_norm_sq(ptr::null(), &mut v) }, MUENT_ERR_NULL);
        let h = parse(
            r#"{
                "measure": {"kind": "explicit", "weights": [0.5, 0.5]},
                "operator": {"kind": "koopman", "permutation": [1, 0]},
                "params": {}
            }"#,
        );
        assert_eq!(unsafe { muent_exact_entropy(h, ptr::null_mut()) }, MUENT_ERR_NULL);
        unsafe { muent_experiment_free(h) };
        unsafe { muent_experiment_free(ptr::null_mut()) };
    }

    #[test]
    fn budget_error_code() {
        let h = parse(
            r#"{
                "measure": {"kind": "explicit", "weights": [0.25, 0.25, 0.25, 0.25]},
                "operator": {"kind": "koopman", "permutation": [1, 2, 3, 0]},
                "params": {"budget": 1}
            }"#,
        );
        let mut v = 0.0;
        assert_eq!(unsafe { muent_partition_entropy(h, 3, &mut v) }, MUENT_ERR_BUDGET);
        unsafe { muent_experiment_free(h) };
    }

    #[test]
    fn numerical_error_code() {
        let h = parse(
            r#"{
                "measure": {"kind": "geometric", "ratio": 0.5},
                "operator": {"kind": "shift_right"},
                "params": {"j": 4}
            }"#,
        );
        let mut v = 0.0;
        assert_eq!(unsafe { muent_exact_entropy(h, &mut v) }, MUENT_ERR_NUMERICAL);
        unsafe { muent_experiment_free(h) };
    }
}
