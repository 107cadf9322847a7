//! C ABI for the flowsynth engine.
//!
//! Conventions: opaque handles (`FsDomain`, `FsResult`) created and freed
//! by this library; functions return an `FsStatus` code or a count;
//! `fs_last_error` retrieves a thread-local message for the most recent
//! failure; strings returned by the library must be released with
//! `fs_string_free`. The generated header lives at `include/flowsynth.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use flowsynth::domain::{DomainModel, UniverseMode};
use flowsynth::sltl::{self, Formula};
use flowsynth::synthesis::{self, SynthesisProblem, SynthesisResult};

/// Status codes returned by fallible functions.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    /// Operation succeeded.
    FsOk = 0,
    /// A domain or semantic error; see `fs_last_error`.
    FsErrDomain = 1,
    /// An I/O or parse error; see `fs_last_error`.
    FsErrParse = 2,
    /// A null pointer or invalid UTF-8 argument.
    FsErrArgument = 3,
}

/// Universe semantics selector.
#[repr(C)]
#[derive(Clone, Copy)]
pub enum FsMode {
    /// Outputs replace the state.
    FsPipelining = 0,
    /// Outputs are unioned into the state.
    FsAccumulating = 1,
}

/// Opaque domain-model handle.
pub struct FsDomain {
    model: DomainModel,
}

/// Opaque synthesis-result handle.
pub struct FsResult {
    problem: SynthesisProblem,
    result: SynthesisResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl std::fmt::Display) {
    let text = CString::new(msg.to_string().replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn arg_str<'a>(ptr: *const c_char) -> Result<&'a str, FsStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(FsStatus::FsErrArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FsStatus::FsErrArgument
    })
}

/// Message for the most recent error on this thread, or null if none.
/// The pointer stays valid until the next failing call on the thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Load the bundled 22-service example domain. Never fails.
#[no_mangle]
pub extern "C" fn fs_domain_bundled() -> *mut FsDomain {
    clear_error();
    Box::into_raw(Box::new(FsDomain {
        model: flowsynth::bundled::domain(),
    }))
}

/// Load a domain model from a JSON file. Returns null on failure; see
/// `fs_last_error`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_load_file(path: *const c_char) -> *mut FsDomain {
    clear_error();
    let Ok(path) = arg_str(path) else {
        return ptr::null_mut();
    };
    match DomainModel::load_file(Path::new(path)) {
        Ok(model) => Box::into_raw(Box::new(FsDomain { model })),
        Err(e) => {
            set_error(e);
            ptr::null_mut()
        }
    }
}

/// Number of services in the domain.
///
/// # Safety
/// `domain` must be a live handle from `fs_domain_bundled`/`fs_domain_load_file`.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_service_count(domain: *const FsDomain) -> usize {
    if domain.is_null() {
        return 0;
    }
    (*domain).model.services.len()
}

/// Release a domain handle. Null is a no-op.
///
/// # Safety
/// `domain` must be null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_free(domain: *mut FsDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Synthesize workflows between a source and a sink service, under an
/// optional constraint (SLTL text, or null for none). On success writes a
/// result handle to `out_result` and returns `FsOk`.
///
/// # Safety
/// `domain` must be a live handle; `source`/`sink` valid strings;
/// `constraint` null or a valid string; `out_result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_synthesize(
    domain: *const FsDomain,
    source: *const c_char,
    sink: *const c_char,
    constraint: *const c_char,
    max_depth: usize,
    mode: FsMode,
    filter_permutations: bool,
    out_result: *mut *mut FsResult,
) -> FsStatus {
    clear_error();
    if domain.is_null() || out_result.is_null() {
        set_error("null handle argument");
        return FsStatus::FsErrArgument;
    }
    let model = &(*domain).model;
    let (source, sink) = match (arg_str(source), arg_str(sink)) {
        (Ok(s), Ok(t)) => (s, t),
        _ => return FsStatus::FsErrArgument,
    };
    let formula = if constraint.is_null() {
        Formula::True
    } else {
        let Ok(text) = arg_str(constraint) else {
            return FsStatus::FsErrArgument;
        };
        match sltl::parse_constraint_file(text, model) {
            Ok(f) => f,
            Err(e @ sltl::SltlError::Syntax { .. }) => {
                set_error(e);
                return FsStatus::FsErrParse;
            }
            Err(e) => {
                set_error(e);
                return FsStatus::FsErrDomain;
            }
        }
    };
    let mode = match mode {
        FsMode::FsPipelining => UniverseMode::Pipelining,
        FsMode::FsAccumulating => UniverseMode::Accumulating,
    };
    let mut problem = match synthesis::derive_problem(model, source, sink, formula, max_depth, mode)
    {
        Ok(p) => p,
        Err(e) => {
            set_error(e);
            return FsStatus::FsErrDomain;
        }
    };
    problem.filter_permutations = filter_permutations;
    match synthesis::synthesize(model, &problem) {
        Ok(result) => {
            *out_result = Box::into_raw(Box::new(FsResult { problem, result }));
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e);
            FsStatus::FsErrDomain
        }
    }
}

/// Number of solutions in a result. Null yields 0.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_result_solution_count(result: *const FsResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).result.solutions.len()
}

/// Whether the search hit a resource cap.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_result_truncated(result: *const FsResult) -> bool {
    !result.is_null() && (*result).result.truncated
}

/// The services of solution `index` as a `" -> "`-joined string, or null
/// if out of range. Free with `fs_string_free`.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_result_solution(result: *const FsResult, index: usize) -> *mut c_char {
    if result.is_null() {
        set_error("null result handle");
        return ptr::null_mut();
    }
    let r = &(*result).result;
    match r.solutions.get(index) {
        Some(s) => {
            let text = r.service_names(s).join(" -> ");
            CString::new(text).unwrap().into_raw()
        }
        None => {
            set_error(format!("solution index {index} out of range"));
            ptr::null_mut()
        }
    }
}

/// The whole result as a JSON document. Free with `fs_string_free`.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_result_json(result: *const FsResult) -> *mut c_char {
    if result.is_null() {
        set_error("null result handle");
        return ptr::null_mut();
    }
    let r = &*result;
    let doc = serde_json::to_string_pretty(&r.result.to_json(&r.problem)).unwrap();
    CString::new(doc.replace('\0', " ")).unwrap().into_raw()
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string obtained from this library.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a result handle. Null is a no-op.
///
/// # Safety
/// `result` must be null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_result_free(result: *mut FsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
