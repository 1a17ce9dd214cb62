//! C ABI for the confluence analyzer.
//!
//! A system is parsed into an opaque [`CrsHandle`]; every call returns a
//! [`CrsStatus`] and writes results through out-pointers. On failure the
//! calling thread's last error message is set and can be read with
//! [`crs_last_error_message`]. Strings returned to the caller must be
//! released with [`crs_string_free`], handles with [`crs_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crs_core::criteria::{run_pipeline, Analysis, Verdict};
use crs_core::engine::{Budget, DepthIndex, Engine, TriBool};
use crs_core::peaks::compute_critical_peaks;
use crs_core::report::analysis_json;
use crs_core::syntax::{parse_spec, parse_term, Spec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    TermError = 4,
    InvalidArgument = 5,
    Internal = 6,
}

/// Outcome of a confluence check.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrsVerdict {
    Confluent = 0,
    NotConfluent = 1,
    Unknown = 2,
}

/// Three-valued answer of a decision query.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrsAnswer {
    Yes = 0,
    No = 1,
    Undecided = 2,
}

/// A parsed system together with its budget and cached analysis.
pub struct CrsHandle {
    spec: Spec,
    budget: Budget,
    analysis: Option<Analysis>,
}

impl CrsHandle {
    fn analysis(&mut self) -> &Analysis {
        let (spec, budget) = (&self.spec, self.budget);
        self.analysis
            .get_or_insert_with(|| run_pipeline(&spec.crs, &spec.assumptions, budget))
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CrsStatus, String);

type Result<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> Result<()>) -> CrsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            CrsStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str> {
    if p.is_null() {
        return Err(Failure(CrsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CrsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(h: *mut CrsHandle) -> Result<&'a mut CrsHandle> {
    h.as_mut()
        .ok_or_else(|| Failure(CrsStatus::NullPointer, "handle is null".into()))
}

fn out<T>(p: *mut T) -> Result<*mut T> {
    if p.is_null() {
        Err(Failure(
            CrsStatus::NullPointer,
            "output pointer is null".into(),
        ))
    } else {
        Ok(p)
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on this thread, or null.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn crs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a system specification. On success `*out_handle` receives a new handle.
///
/// # Safety
/// `spec_text` must be null or a valid NUL-terminated string; `out_handle` must be
/// null or point to writable storage for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn crs_parse(
    spec_text: *const c_char,
    out_handle: *mut *mut CrsHandle,
) -> CrsStatus {
    guard(|| {
        let slot = out(out_handle)?;
        *slot = ptr::null_mut();
        let src = text(spec_text, "specification")?;
        let spec = parse_spec(src).map_err(|ds| {
            let msg = ds
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            Failure(CrsStatus::ParseError, msg)
        })?;
        let h = Box::new(CrsHandle {
            spec,
            budget: Budget::default(),
            analysis: None,
        });
        *slot = Box::into_raw(h);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from [`crs_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crs_free(h: *mut CrsHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Replaces the search budget; zero keeps the current value of a field.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crs_set_budget(
    h: *mut CrsHandle,
    max_steps: usize,
    max_term_size: usize,
    max_strata: u32,
    max_depth: usize,
) -> CrsStatus {
    guard(|| {
        let h = handle(h)?;
        let b = &mut h.budget;
        let keep = |new: usize, old: usize| if new == 0 { old } else { new };
        b.max_steps = keep(max_steps, b.max_steps);
        b.max_term_size = keep(max_term_size, b.max_term_size);
        b.max_depth = keep(max_depth, b.max_depth);
        if max_strata != 0 {
            b.max_strata = max_strata;
        }
        h.analysis = None;
        Ok(())
    })
}

/// Number of critical peaks of the system.
///
/// # Safety
/// `h` must be null or a live handle; `count` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn crs_peak_count(h: *mut CrsHandle, count: *mut usize) -> CrsStatus {
    guard(|| {
        let h = handle(h)?;
        let slot = out(count)?;
        *slot = compute_critical_peaks(&h.spec.crs).len();
        Ok(())
    })
}

/// Runs the full analysis and reports its verdict.
///
/// # Safety
/// `h` must be null or a live handle; `verdict` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn crs_check(h: *mut CrsHandle, verdict: *mut CrsVerdict) -> CrsStatus {
    guard(|| {
        let h = handle(h)?;
        let slot = out(verdict)?;
        *slot = match h.analysis().verdict {
            Verdict::Confluent { .. } => CrsVerdict::Confluent,
            Verdict::NotConfluent(_) => CrsVerdict::NotConfluent,
            Verdict::Unknown { .. } => CrsVerdict::Unknown,
        };
        Ok(())
    })
}

/// The analysis report as a JSON object. Free it with [`crs_string_free`].
///
/// # Safety
/// `h` must be null or a live handle; `json` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn crs_report_json(h: *mut CrsHandle, json: *mut *mut c_char) -> CrsStatus {
    guard(|| {
        let slot = out(json)?;
        *slot = ptr::null_mut();
        let h = handle(h)?;
        let crs = h.spec.crs.clone();
        let report = analysis_json(&crs, h.analysis()).to_string();
        let s = CString::new(report)
            .map_err(|_| Failure(CrsStatus::Internal, "report contains NUL".into()))?;
        *slot = s.into_raw();
        Ok(())
    })
}

/// Decides joinability of two ground or instantiable terms at `depth`
/// (`n`, `w`, `w+n` or `w+w`; null means `w+w`).
///
/// # Safety
/// `h` must be null or a live handle; string arguments must be null or valid
/// NUL-terminated strings; `answer` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn crs_joinable(
    h: *mut CrsHandle,
    t0: *const c_char,
    t1: *const c_char,
    depth: *const c_char,
    answer: *mut CrsAnswer,
) -> CrsStatus {
    guard(|| {
        let h = handle(h)?;
        let slot = out(answer)?;
        let crs = &h.spec.crs;
        let term = |p, what| -> Result<_> {
            parse_term(crs, text(p, what)?)
                .map_err(|d| Failure(CrsStatus::TermError, format!("{what}: {d}")))
        };
        let (a, b) = (term(t0, "t0")?, term(t1, "t1")?);
        if a.sort(&crs.signature) != b.sort(&crs.signature) {
            return Err(Failure(
                CrsStatus::TermError,
                "terms have different sorts".into(),
            ));
        }
        let d = if depth.is_null() {
            DepthIndex::OmegaOmega
        } else {
            text(depth, "depth")?
                .parse()
                .map_err(|e| Failure(CrsStatus::InvalidArgument, e))?
        };
        let mut engine = Engine::new(crs, h.budget);
        *slot = match engine.joinable(&a, &b, d).answer {
            TriBool::Yes => CrsAnswer::Yes,
            TriBool::No => CrsAnswer::No,
            TriBool::Unknown => CrsAnswer::Undecided,
        };
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
