//! C ABI for condcov.
//!
//! Every fallible entry point returns a [`CcStatus`]; on failure a message is
//! stored per thread and can be copied out with [`cc_last_error_message`].
//! Handles returned through out-pointers are owned by the caller and must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use condcov::bounds::{
    adversarial_floor, corrected_alpha_split, cvplus_pac_bound, split_pac_bound, CorrectedAlpha,
};
use condcov::conformal::{cv_plus, full_conformal_ridge_exact, jackknife_plus, split_conformal};
use condcov::regressors::{Ridge, RidgeConfig};
use condcov::{make_folds, Dataset, Error, PredictionSet};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NumericalFailure = 4,
    Panic = 5,
}

/// Opaque training or calibration sample.
pub struct CcDataset {
    inner: Dataset,
}

/// Opaque prediction set: a sorted union of disjoint closed intervals.
pub struct CcPredictionSet {
    inner: PredictionSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend_from_slice(msg.as_bytes());
    });
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::FoldMismatch { .. } => CcStatus::DimensionMismatch,
        Error::Singular => CcStatus::NumericalFailure,
        _ => CcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CcStatus>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            CcStatus::Panic
        }
    }
}

fn fail(e: Error) -> CcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> CcStatus {
    set_error(&format!("{what} is null"));
    CcStatus::NullPointer
}

unsafe fn dataset_ref<'a>(p: *const CcDataset, what: &str) -> Result<&'a Dataset, CcStatus> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null(what))
}

unsafe fn point<'a>(x: *const f64, dim: usize, train: &Dataset) -> Result<&'a [f64], CcStatus> {
    if x.is_null() {
        return Err(null("x"));
    }
    if dim != train.dim() {
        return Err(fail(Error::DimensionMismatch {
            expected: train.dim(),
            found: dim,
        }));
    }
    Ok(slice::from_raw_parts(x, dim))
}

unsafe fn emit_set(out: *mut *mut CcPredictionSet, set: PredictionSet) {
    *out = Box::into_raw(Box::new(CcPredictionSet { inner: set }));
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), CcStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated). Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a dataset from `n` row-major feature rows of width `dim` and `n`
/// labels. Both arrays are copied.
///
/// # Safety
/// `xs` must hold `n * dim` values, `ys` must hold `n`, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_dataset_new(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut CcDataset,
) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n > 0 && ((dim > 0 && xs.is_null()) || ys.is_null()) {
            return Err(null("data"));
        }
        let total = n.checked_mul(dim).ok_or_else(|| {
            set_error("n * dim overflows");
            CcStatus::InvalidArgument
        })?;
        let xs = if total == 0 {
            Vec::new()
        } else {
            slice::from_raw_parts(xs, total).to_vec()
        };
        let ys = if n == 0 {
            Vec::new()
        } else {
            slice::from_raw_parts(ys, n).to_vec()
        };
        let data = Dataset::from_flat(dim, xs, ys).map_err(fail)?;
        *out = Box::into_raw(Box::new(CcDataset { inner: data }));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from [`cc_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_dataset_free(data: *mut CcDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_dataset_len(data: *const CcDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.len())
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_dataset_dim(data: *const CcDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.dim())
}

/// # Safety
/// `set` must be null or a handle returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_set_free(set: *mut CcPredictionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of disjoint intervals (0 for the empty set or a null handle).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_set_num_intervals(set: *const CcPredictionSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.intervals().len())
}

/// Endpoints of interval `index`; unbounded ends are reported as infinities.
///
/// # Safety
/// `set` must be a live handle, `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_set_interval(
    set: *const CcPredictionSet,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> CcStatus {
    guard(|| {
        let s = set.as_ref().ok_or_else(|| null("set"))?;
        let iv = s.inner.intervals().get(index).ok_or_else(|| {
            set_error(&format!("interval {index} out of range"));
            CcStatus::InvalidArgument
        })?;
        write_out(lo, iv.lo)?;
        write_out(hi, iv.hi)
    })
}

/// 1 if `y` lies in the set, 0 otherwise (including a null handle).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_set_contains(set: *const CcPredictionSet, y: f64) -> i32 {
    set.as_ref().map_or(0, |s| s.inner.contains(y) as i32)
}

/// Lebesgue measure of the set (infinite for unbounded sets).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_set_measure(set: *const CcPredictionSet) -> f64 {
    set.as_ref().map_or(0.0, |s| s.inner.measure())
}

/// Split conformal with ridge: fit on `train`, calibrate on `calibration`.
///
/// # Safety
/// Handles must be live, `x` must hold `dim` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_split_ridge(
    train: *const CcDataset,
    calibration: *const CcDataset,
    lambda: f64,
    x: *const f64,
    dim: usize,
    alpha: f64,
    out: *mut *mut CcPredictionSet,
) -> CcStatus {
    guard(|| {
        let train = dataset_ref(train, "train")?;
        let cal = dataset_ref(calibration, "calibration")?;
        let x = point(x, dim, train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ridge = Ridge::with_lambda(lambda).map_err(fail)?;
        let fitted = split_conformal(train, cal, &ridge, alpha).map_err(fail)?;
        emit_set(out, fitted.prediction_set(x));
        Ok(())
    })
}

/// Exact full conformal set for ridge at `x`.
///
/// # Safety
/// As for [`cc_split_ridge`].
#[no_mangle]
pub unsafe extern "C" fn cc_full_ridge(
    train: *const CcDataset,
    lambda: f64,
    x: *const f64,
    dim: usize,
    alpha: f64,
    out: *mut *mut CcPredictionSet,
) -> CcStatus {
    guard(|| {
        let train = dataset_ref(train, "train")?;
        let x = point(x, dim, train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = RidgeConfig::new(lambda).map_err(fail)?;
        let set = full_conformal_ridge_exact(train, x, config, alpha).map_err(fail)?;
        emit_set(out, set);
        Ok(())
    })
}

/// Jackknife+ interval for ridge at `x`.
///
/// # Safety
/// As for [`cc_split_ridge`].
#[no_mangle]
pub unsafe extern "C" fn cc_jackknife_plus_ridge(
    train: *const CcDataset,
    lambda: f64,
    x: *const f64,
    dim: usize,
    alpha: f64,
    out: *mut *mut CcPredictionSet,
) -> CcStatus {
    guard(|| {
        let train = dataset_ref(train, "train")?;
        let x = point(x, dim, train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ridge = Ridge::with_lambda(lambda).map_err(fail)?;
        emit_set(out, jackknife_plus(train, x, &ridge, alpha).map_err(fail)?);
        Ok(())
    })
}

/// CV+ interval for ridge at `x` with `folds` equal folds drawn from `seed`.
///
/// # Safety
/// As for [`cc_split_ridge`].
#[no_mangle]
pub unsafe extern "C" fn cc_cv_plus_ridge(
    train: *const CcDataset,
    lambda: f64,
    x: *const f64,
    dim: usize,
    alpha: f64,
    folds: usize,
    seed: u64,
    out: *mut *mut CcPredictionSet,
) -> CcStatus {
    guard(|| {
        let train = dataset_ref(train, "train")?;
        let x = point(x, dim, train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ridge = Ridge::with_lambda(lambda).map_err(fail)?;
        let partition = make_folds(train.len(), folds, seed).map_err(fail)?;
        emit_set(
            out,
            cv_plus(train, x, &ridge, alpha, &partition).map_err(fail)?,
        );
        Ok(())
    })
}

/// Miscoverage level that split conformal exceeds with probability at most
/// `delta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_split_pac_bound(
    alpha: f64,
    delta: f64,
    n1: usize,
    out: *mut f64,
) -> CcStatus {
    guard(|| write_out(out, split_pac_bound(alpha, delta, n1).map_err(fail)?))
}

/// CV+ training-conditional bound for `folds` folds of size `fold_size`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_cvplus_pac_bound(
    alpha: f64,
    delta: f64,
    folds: usize,
    fold_size: usize,
    out: *mut f64,
) -> CcStatus {
    guard(|| {
        write_out(
            out,
            cvplus_pac_bound(alpha, delta, folds, fold_size).map_err(fail)?,
        )
    })
}

/// Lower bound on the worst-case training-conditional miscoverage.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_adversarial_floor(alpha: f64, n: usize, out: *mut f64) -> CcStatus {
    guard(|| write_out(out, adversarial_floor(alpha, n).map_err(fail)?))
}

/// Level to run split conformal at for a PAC guarantee at `alpha`.
/// `feasible` is set to 0 when no level exists; `value` then holds the
/// correction that was too large.
///
/// # Safety
/// `value` and `feasible` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_corrected_alpha_split(
    alpha: f64,
    delta: f64,
    n1: usize,
    value: *mut f64,
    feasible: *mut i32,
) -> CcStatus {
    guard(
        || match corrected_alpha_split(alpha, delta, n1).map_err(fail)? {
            CorrectedAlpha::Feasible { alpha, .. } => {
                write_out(value, alpha)?;
                write_out(feasible, 1)
            }
            CorrectedAlpha::Infeasible { correction } => {
                write_out(value, correction)?;
                write_out(feasible, 0)
            }
        },
    )
}

/// Width of the modular window used by the clock adversary.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_compute_m1(
    n: usize,
    cells: usize,
    alpha: f64,
    out: *mut usize,
) -> CcStatus {
    guard(|| {
        write_out(
            out,
            condcov::adversary::compute_m1(n, cells, alpha).map_err(fail)?,
        )
    })
}
