//! C interface to `torusdiv`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Results come back as JSON reports.
//! Every entry point returns a [`TdStatus`]; on failure
//! [`td_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::{json, Value};
use torusdiv::analysis::{
    bbs_conclusion, certify_gene, certify_morphism, erdos, scan_ideal_inclusion, AnalysisError, BbsOptions,
    MorphismOptions, ProblemInstance, ScanError,
};
use torusdiv::arith::{ArithError, FactorConfig};
use torusdiv::counting::{counting_function, unreduced_count, CountingConfig, CountingError, LatticeZeroSet};
use torusdiv::laurent::{stabilizer, LaurentError, LaurentPoly};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    /// The computation ran and the answer is a refusal or a counterexample.
    Negative = 1,
    InvalidArgument = 2,
    Parse = 3,
    Factorization = 4,
    Internal = 5,
}

/// A parsed problem instance.
pub struct TdInstance {
    inner: ProblemInstance,
}

/// A JSON report with a NUL-terminated copy for C callers.
pub struct TdReport {
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

struct Failure(TdStatus, String);

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let status = match &e {
            AnalysisError::Arith(ArithError::Factorization(_)) | AnalysisError::Scan(ScanError::Factorization { .. }) => {
                TdStatus::Factorization
            }
            AnalysisError::Arith(ArithError::RationalParse(_)) | AnalysisError::Laurent(LaurentError::Parse(_)) => {
                TdStatus::Parse
            }
            _ => TdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<CountingError> for Failure {
    fn from(e: CountingError) -> Self {
        let status = match e {
            CountingError::InvalidZeroSet(_) => TdStatus::Parse,
            _ => TdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<LaurentError> for Failure {
    fn from(e: LaurentError) -> Self {
        let status = match e {
            LaurentError::Parse(_) => TdStatus::Parse,
            _ => TdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(TdStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<TdStatus, Failure>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            TdStatus::Internal
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string valid for the call.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for a write.
unsafe fn emit(out: *mut *mut TdReport, status: TdStatus, v: Value) -> Result<TdStatus, Failure> {
    if out.is_null() {
        return Err(invalid("report pointer is null"));
    }
    let json = CString::new(v.to_string()).map_err(|_| Failure(TdStatus::Internal, "NUL in report".into()))?;
    *out = Box::into_raw(Box::new(TdReport { json }));
    Ok(status)
}

fn from_certificate<T: serde::Serialize>(r: Result<T, torusdiv::analysis::Diagnostic>) -> (TdStatus, Value) {
    match r {
        Ok(c) => (TdStatus::Ok, json!({ "certificate": c })),
        Err(d) => (TdStatus::Negative, json!({ "diagnostic": d })),
    }
}

/// # Safety
/// `inst` is null or a live handle from [`td_instance_from_json`].
unsafe fn instance<'a>(inst: *const TdInstance) -> Result<&'a ProblemInstance, Failure> {
    inst.as_ref().map(|i| &i.inner).ok_or_else(|| invalid("instance is null"))
}

/// Message for the last failure on this thread; empty if none. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance `{s_primes, g1, g2, F1, F2, components1?, components2?}`.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_instance_from_json(json: *const c_char, out: *mut *mut TdInstance) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let inner = ProblemInstance::from_json(text(json, "json")?).map_err(|e| match e {
            AnalysisError::Input(m) | AnalysisError::Instance(m) => Failure(TdStatus::Parse, m),
            other => other.into(),
        })?;
        *out = Box::into_raw(Box::new(TdInstance { inner }));
        Ok(TdStatus::Ok)
    })
}

/// # Safety
/// `inst` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_instance_free(inst: *mut TdInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// The report text, owned by `report`.
///
/// # Safety
/// `report` is null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn td_report_json(report: *const TdReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_report_free(report: *mut TdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Reconstructs a monomial map; `Negative` with a diagnostic on refusal.
///
/// # Safety
/// `inst` is a live instance handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_certify_morphism(inst: *const TdInstance, n_max: u64, out: *mut *mut TdReport) -> TdStatus {
    guard(|| {
        let opts = MorphismOptions {
            n_max,
            ..MorphismOptions::default()
        };
        let (s, v) = from_certificate(certify_morphism(instance(inst)?, &opts)?);
        emit(out, s, v)
    })
}

/// # Safety
/// `inst` is a live instance handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_certify_gene(inst: *const TdInstance, out: *mut *mut TdReport) -> TdStatus {
    guard(|| {
        let (s, v) = from_certificate(certify_gene(instance(inst)?)?);
        emit(out, s, v)
    })
}

/// # Safety
/// `inst` is a live instance handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_bbs_conclusion(inst: *const TdInstance, n_max: u64, out: *mut *mut TdReport) -> TdStatus {
    guard(|| {
        let opts = BbsOptions {
            n_max,
            ..BbsOptions::default()
        };
        let (s, v) = from_certificate(bbs_conclusion(instance(inst)?, &opts)?);
        emit(out, s, v)
    })
}

/// All `n ≤ n_max` with `F1(g1ⁿ) | F2(g2ⁿ)` in the S-integers.
///
/// # Safety
/// `inst` is a live instance handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_scan_ideal(inst: *const TdInstance, n_max: u64, out: *mut *mut TdReport) -> TdStatus {
    guard(|| {
        let hits = scan_ideal_inclusion(instance(inst)?, n_max).map_err(AnalysisError::from)?;
        emit(out, TdStatus::Ok, json!({ "n_max": n_max, "hits": hits }))
    })
}

/// Prime support of `xⁿ − 1` inside that of `yⁿ − 1` for `n ≤ n_max`;
/// `Negative` when a violation or a factorization failure stops the scan.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_erdos(x: u64, y: u64, n_max: u64, out: *mut *mut TdReport) -> TdStatus {
    guard(|| {
        let r = erdos(x, y, n_max, &FactorConfig::default())?;
        let s = if r.inclusion_holds() { TdStatus::Ok } else { TdStatus::Negative };
        emit(out, s, serde_json::to_value(&r).map_err(|e| Failure(TdStatus::Internal, e.to_string()))?)
    })
}

/// Stabilizer of `poly = 0` in `G_m^dim`. `factors` may be null; otherwise
/// it receives up to `cap` invariant factors (saturating at `u64::MAX`) and
/// `n_factors` the total count.
///
/// # Safety
/// `poly` is NUL-terminated; `dimension` and `n_factors` are valid for a
/// write; `factors` is null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn td_stabilizer(
    poly: *const c_char,
    dim: usize,
    dimension: *mut usize,
    factors: *mut u64,
    cap: usize,
    n_factors: *mut usize,
) -> TdStatus {
    guard(|| {
        if dimension.is_null() || n_factors.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let f = LaurentPoly::parse(text(poly, "poly")?, dim)?;
        let info = stabilizer(&f)?;
        *dimension = info.dimension;
        *n_factors = info.invariant_factors.len();
        if !factors.is_null() {
            for (i, q) in info.invariant_factors.iter().take(cap).enumerate() {
                *factors.add(i) = u64::try_from(q).unwrap_or(u64::MAX);
            }
        }
        Ok(TdStatus::Ok)
    })
}

/// `N(r)` for a zero set in the JSON form `{parts: [{offset, periods}]}`.
///
/// # Safety
/// `zero_set` is NUL-terminated; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_counting_function(zero_set: *const c_char, r: f64, out: *mut f64) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let z = LatticeZeroSet::from_json(text(zero_set, "zero_set")?)?;
        *out = counting_function(&z, r, &CountingConfig::default())?;
        Ok(TdStatus::Ok)
    })
}

/// Number of distinct zeros with `|z| ≤ t`.
///
/// # Safety
/// `zero_set` is NUL-terminated; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn td_unreduced_count(zero_set: *const c_char, t: f64, out: *mut u64) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let z = LatticeZeroSet::from_json(text(zero_set, "zero_set")?)?;
        *out = unreduced_count(&z, t, &CountingConfig::default())?;
        Ok(TdStatus::Ok)
    })
}
