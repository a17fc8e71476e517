//! C interface to the identity suite and the expression evaluator.
//!
//! Every function returns an [`EwStatus`]; on failure a description is kept
//! per thread and can be read with [`ew_last_error`]. Handles are opaque and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ewcheck::cli::tensor_json;
use ewcheck::dsl::{self, BindFile, CheckedExpression, SymbolTable};
use ewcheck::invariants::{self, FamilyId, IdentityReport, Suite, SuiteConfig};
use ewcheck::tensor::{Statistics, Tensor};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Expression failed to parse or violates the index rules.
    Expression = 4,
    Computation = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Result of a verify or relations run.
pub struct EwReport {
    report: IdentityReport,
}

/// A checked expression with its symbol table.
pub struct EwExpression {
    expr: CheckedExpression,
    table: SymbolTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: EwStatus, message: impl Into<String>) -> EwStatus {
    let text = CString::new(message.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn guard(f: impl FnOnce() -> Result<(), EwStatus>) -> EwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(EwStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, EwStatus> {
    if p.is_null() {
        return Err(fail(EwStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EwStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn statistics(s: &str) -> Result<Vec<Statistics>, EwStatus> {
    match s {
        "both" => Ok(vec![Statistics::Bosonic, Statistics::Fermionic]),
        _ => Statistics::parse(s)
            .map(|x| vec![x])
            .ok_or_else(|| fail(EwStatus::InvalidArgument, format!("unknown statistics '{s}'"))),
    }
}

fn config(stat: *const c_char, samples: u32, seed: u64) -> Result<SuiteConfig, EwStatus> {
    if samples == 0 {
        return Err(fail(EwStatus::InvalidArgument, "samples must be positive"));
    }
    Ok(SuiteConfig {
        seed,
        samples: samples as usize,
        statistics: statistics(unsafe { text(stat, "statistics")? })?,
        ..SuiteConfig::default()
    })
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), EwStatus> {
    if out.is_null() {
        return Err(fail(EwStatus::NullPointer, "output pointer is null"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn computation(e: impl std::fmt::Display) -> EwStatus {
    fail(EwStatus::Computation, e.to_string())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ew_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Runs a check suite (`all`, `geometry`, `qed`, `ew` or a family name) with
/// statistics `bosonic`, `fermionic` or `both`.
///
/// # Safety
/// `suite` and `statistics` must be null or NUL-terminated strings; `out`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ew_verify(
    suite: *const c_char,
    statistics: *const c_char,
    samples: u32,
    seed: u64,
    out: *mut *mut EwReport,
) -> EwStatus {
    guard(|| {
        let name = text(suite, "suite")?;
        let suite = Suite::parse(name).ok_or_else(|| fail(EwStatus::InvalidArgument, format!("unknown suite '{name}'")))?;
        let cfg = SuiteConfig {
            suite,
            ..config(statistics, samples, seed)?
        };
        let report = invariants::run_identity_suite(&cfg).map_err(computation)?;
        store(out, EwReport { report })
    })
}

/// Nullspace search over one family.
///
/// # Safety
/// As for [`ew_verify`].
#[no_mangle]
pub unsafe extern "C" fn ew_relations(
    family: *const c_char,
    statistics: *const c_char,
    samples: u32,
    seed: u64,
    out: *mut *mut EwReport,
) -> EwStatus {
    guard(|| {
        let name = text(family, "family")?;
        let f = FamilyId::parse(name).ok_or_else(|| fail(EwStatus::InvalidArgument, format!("unknown family '{name}'")))?;
        let report = invariants::run_relation_discovery(f, &config(statistics, samples, seed)?).map_err(computation)?;
        store(out, EwReport { report })
    })
}

/// # Safety
/// `report` must be a live handle from [`ew_verify`] or [`ew_relations`].
#[no_mangle]
pub unsafe extern "C" fn ew_report_passed(report: *const EwReport, passed: *mut bool) -> EwStatus {
    if report.is_null() || passed.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    *passed = (*report).report.passed();
    EwStatus::Ok
}

/// Number of checks and the largest relative residual among them.
///
/// # Safety
/// `report` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_report_summary(report: *const EwReport, checks: *mut usize, max_residual: *mut f64) -> EwStatus {
    if report.is_null() || checks.is_null() || max_residual.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    let r = &(*report).report;
    *checks = r.checks.len();
    *max_residual = r.checks.iter().map(|c| c.max_rel_residual).fold(0.0, f64::max);
    EwStatus::Ok
}

/// Nullspace dimension of relation block `index`.
///
/// # Safety
/// `report` must be a live handle; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_report_nullspace_dim(report: *const EwReport, index: usize, dim: *mut usize) -> EwStatus {
    if report.is_null() || dim.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    let r = &(*report).report;
    match r.relations.get(index) {
        Some(r) => {
            *dim = r.nullspace_dim;
            EwStatus::Ok
        }
        None => fail(EwStatus::InvalidArgument, format!("no relation block {index}")),
    }
}

/// The JSON report. Free the string with [`ew_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_report_json(report: *const EwReport, out: *mut *mut c_char) -> EwStatus {
    if report.is_null() || out.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    string_out((*report).report.to_json(), out)
}

unsafe fn string_out(s: String, out: *mut *mut c_char) -> EwStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            EwStatus::Ok
        }
        Err(_) => fail(EwStatus::Computation, "output contains a nul byte"),
    }
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_report_free(report: *mut EwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and checks one expression. `bind_json` may be null for the
/// standard field table; otherwise it is a bind file as accepted by the
/// command line tool.
///
/// # Safety
/// `source` must be a NUL-terminated string, `bind_json` null or one;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_expression_parse(
    source: *const c_char,
    bind_json: *const c_char,
    out: *mut *mut EwExpression,
) -> EwStatus {
    guard(|| {
        let src = text(source, "source")?;
        let bind = if bind_json.is_null() {
            BindFile::default()
        } else {
            BindFile::from_json(text(bind_json, "bind_json")?).map_err(|e| fail(EwStatus::InvalidArgument, e.to_string()))?
        };
        let table = bind.symbol_table().map_err(|e| fail(EwStatus::InvalidArgument, e.to_string()))?;
        let free = bind.free_indices().map_err(|e| fail(EwStatus::InvalidArgument, e.to_string()))?;
        let expr = dsl::parse_expression(src, &table, &free).map_err(|e| fail(EwStatus::Expression, e.to_string()))?;
        store(out, EwExpression { expr, table })
    })
}

/// Number of components of the value (1 for a scalar).
///
/// # Safety
/// `expr` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_expression_len(expr: *const EwExpression, len: *mut usize) -> EwStatus {
    if expr.is_null() || len.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    *len = (*expr).expr.free_slots().iter().map(|s| s.dim()).product();
    EwStatus::Ok
}

fn evaluate(e: &EwExpression, seed: u64) -> Result<Tensor, EwStatus> {
    let bindings = dsl::bind_symbols(&e.expr, &e.table, seed).map_err(computation)?;
    dsl::evaluate(&e.expr, &bindings, &e.table).map_err(computation)
}

/// Evaluates with symbols sampled from `seed` and writes the Grassmann body
/// of each component as interleaved `re, im` pairs (row-major). `cap` is the
/// number of doubles available at `values`.
///
/// # Safety
/// `expr` must be a live handle; `values` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ew_expression_eval(expr: *const EwExpression, seed: u64, values: *mut f64, cap: usize) -> EwStatus {
    if expr.is_null() || values.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    guard(|| {
        let t = evaluate(&*expr, seed)?;
        let data = t.data();
        if cap < 2 * data.len() {
            return Err(fail(EwStatus::BufferTooSmall, format!("need {} doubles", 2 * data.len())));
        }
        let out = std::slice::from_raw_parts_mut(values, 2 * data.len());
        for (k, v) in data.iter().enumerate() {
            let b = v.body();
            out[2 * k] = b.re;
            out[2 * k + 1] = b.im;
        }
        Ok(())
    })
}

/// Full value, Grassmann monomials included, as JSON. Free with
/// [`ew_string_free`].
///
/// # Safety
/// `expr` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ew_expression_eval_json(expr: *const EwExpression, seed: u64, out: *mut *mut c_char) -> EwStatus {
    if expr.is_null() || out.is_null() {
        return fail(EwStatus::NullPointer, "null argument");
    }
    guard(|| {
        let t = evaluate(&*expr, seed)?;
        match string_out(tensor_json(&t).to_string(), out) {
            EwStatus::Ok => Ok(()),
            s => Err(s),
        }
    })
}

/// # Safety
/// `expr` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ew_expression_free(expr: *mut EwExpression) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}
