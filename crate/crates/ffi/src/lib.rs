//! C ABI over `nc_ergodic`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `nce_*_from_*` or `nce_run` call and released by the matching
//! `nce_*_free`. Fallible calls return an [`NceStatus`]; on failure the
//! message is available from [`nce_last_error`] on the same thread.
//! Strings handed out through `char **` parameters belong to the caller and
//! must be released with [`nce_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nc_ergodic::scenario::{self, OutputFormat, Report, Scenario};
use nc_ergodic::{Error, NeveuDecomposition};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    Validation = 4,
    Numerical = 5,
    Io = 6,
    NotFound = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

pub struct NceScenario {
    inner: Scenario,
}

pub struct NceReport {
    inner: Report,
}

pub struct NceDecomposition {
    inner: NeveuDecomposition,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (NceStatus, String);

fn status_of(e: &Error) -> NceStatus {
    match e {
        Error::Schema { .. } | Error::Json(_) => NceStatus::Schema,
        Error::Io(_) => NceStatus::Io,
        Error::NonConvergence { .. } | Error::BudgetInfeasible(_) => NceStatus::Numerical,
        _ => NceStatus::Validation,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            NceStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            NceStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((NceStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NceStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (NceStatus::NullPointer, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err((NceStatus::NullPointer, "out is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err((NceStatus::NullPointer, "out is null".into()));
    }
    let c = CString::new(s).map_err(|_| (NceStatus::Validation, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Copies `values` into `buf` when it is large enough; `needed` always
/// receives the required length.
unsafe fn fill(values: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        *needed = values.len();
    }
    if buf.is_null() || len < values.len() {
        return Err((
            NceStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn nce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_from_json(json: *const c_char, out: *mut *mut NceScenario) -> NceStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let inner = scenario::parse_scenario(text).map_err(fail)?;
        put(out, NceScenario { inner })
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_from_file(path: *const c_char, out: *mut *mut NceScenario) -> NceStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = scenario::load_scenario(path).map_err(fail)?;
        put(out, NceScenario { inner })
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_from_gallery(name: *const c_char, out: *mut *mut NceScenario) -> NceStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let inner = scenario::gallery_item(name)
            .ok_or_else(|| (NceStatus::NotFound, format!("no gallery item named {name:?}")))?;
        put(out, NceScenario { inner })
    })
}

/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_set_seed(s: *mut NceScenario, seed: u64) -> NceStatus {
    guard(|| {
        let s = s.as_mut().ok_or((NceStatus::NullPointer, "scenario is null".to_string()))?;
        s.inner.seed = Some(seed);
        Ok(())
    })
}

/// Serialized scenario (pretty JSON).
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_to_json(s: *const NceScenario, out: *mut *mut c_char) -> NceStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        put_string(out, s.inner.to_json())
    })
}

/// # Safety
/// `s` must be null or a scenario handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nce_scenario_free(s: *mut NceScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn nce_gallery_count() -> usize {
    scenario::GALLERY_NAMES.len()
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_gallery_name(index: usize, out: *mut *mut c_char) -> NceStatus {
    guard(|| {
        let name = scenario::GALLERY_NAMES
            .get(index)
            .ok_or_else(|| (NceStatus::NotFound, format!("gallery index {index} out of range")))?;
        put_string(out, name.to_string())
    })
}

/// Runs every task of the scenario. Task failures are recorded in the
/// report; only an invalid scenario returns an error.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_run(s: *const NceScenario, out: *mut *mut NceReport) -> NceStatus {
    guard(|| {
        let s = ref_arg(s, "scenario")?;
        let inner = scenario::run(&s.inner).map_err(fail)?;
        put(out, NceReport { inner })
    })
}

/// True when every check and task verdict passed; false for null.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn nce_report_all_pass(r: *const NceReport) -> bool {
    r.as_ref().is_some_and(|r| r.inner.all_pass())
}

/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_report_to_json(r: *const NceReport, out: *mut *mut c_char) -> NceStatus {
    guard(|| {
        let r = ref_arg(r, "report")?;
        put_string(out, r.inner.to_json())
    })
}

/// Writes the report in `format` (`report-json`, `decay-csv` or
/// `spectrum-csv`) into directory `dir`.
///
/// # Safety
/// `r` must be a live report handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nce_report_emit(r: *const NceReport, format: *const c_char, dir: *const c_char) -> NceStatus {
    guard(|| {
        let r = ref_arg(r, "report")?;
        let format: OutputFormat = str_arg(format, "format")?
            .parse()
            .map_err(|m| (NceStatus::Validation, m))?;
        let dir = str_arg(dir, "dir")?;
        scenario::emit(&r.inner, format, dir).map_err(fail)?;
        Ok(())
    })
}

/// Copies the decomposition computed by the report's `decompose` (or
/// `stochastic`) task. `NotFound` when none ran successfully.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nce_report_decomposition(r: *const NceReport, out: *mut *mut NceDecomposition) -> NceStatus {
    guard(|| {
        let r = ref_arg(r, "report")?;
        let inner = r
            .inner
            .decomposition()
            .cloned()
            .ok_or_else(|| (NceStatus::NotFound, "report has no decomposition".to_string()))?;
        put(out, NceDecomposition { inner })
    })
}

/// # Safety
/// `r` must be null or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nce_report_free(r: *mut NceReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Total matrix size `N` (sum of block sizes); 0 for null.
///
/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_size(d: *const NceDecomposition) -> usize {
    d.as_ref().map_or(0, |d| d.inner.e1.as_operator().to_dense().nrows())
}

/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_rank_e1(d: *const NceDecomposition) -> usize {
    d.as_ref().map_or(0, |d| d.inner.e1.rank())
}

/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_rank_e2(d: *const NceDecomposition) -> usize {
    d.as_ref().map_or(0, |d| d.inner.e2.rank())
}

/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_passed(d: *const NceDecomposition) -> bool {
    d.as_ref().is_some_and(|d| d.inner.verdict.is_pass())
}

fn dense_interleaved(op: &nc_ergodic::Operator) -> Vec<f64> {
    let m = op.to_dense();
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// `e₁` (`which = 1`) or `e₂` (`which = 2`) as a dense `N × N` row-major
/// matrix of interleaved `(re, im)` pairs: `2N²` doubles.
///
/// # Safety
/// `d` must be a live decomposition handle; `buf` must hold `len` doubles;
/// `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_projection(
    d: *const NceDecomposition,
    which: u32,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> NceStatus {
    guard(|| {
        let d = ref_arg(d, "decomposition")?;
        let p = match which {
            1 => &d.inner.e1,
            2 => &d.inner.e2,
            _ => return Err((NceStatus::NotFound, format!("projection {which} (expected 1 or 2)"))),
        };
        fill(&dense_interleaved(p.as_operator()), buf, len, needed)
    })
}

/// Decay table as `(a, norm)` pairs: `2 · points` doubles.
///
/// # Safety
/// As for [`nce_decomposition_projection`].
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_decay(
    d: *const NceDecomposition,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> NceStatus {
    guard(|| {
        let d = ref_arg(d, "decomposition")?;
        let values: Vec<f64> = d.inner.decay.points.iter().flat_map(|&(a, v)| [a as f64, v]).collect();
        fill(&values, buf, len, needed)
    })
}

/// # Safety
/// `d` must be null or a decomposition handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nce_decomposition_free(d: *mut NceDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}
