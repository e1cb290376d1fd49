//! C ABI over the `schemamatch` library.
//!
//! Every fallible call returns an [`SmStatus`]. On failure the message is kept
//! per thread and read back with [`sm_last_error_message`]. Datasets and
//! sessions are opaque handles released with their `_free` function; strings
//! returned through out-parameters are released with [`sm_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::ptr;
use std::sync::atomic::{AtomicU64, Ordering};

use schemamatch::ensemble::rank_excluding;
use schemamatch::ingest::{load_dataset, read_dataset};
use schemamatch::model::{Dataset, MatcherConfig};
use schemamatch::schema::{RuleSet, edit_distance, sim_lev, sim_monge_elkan};
use schemamatch::session::MatchSession;
use schemamatch::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    MalformedInput = 4,
    InvalidConfig = 5,
    UnknownAttribute = 6,
    DuplicateConfirmation = 7,
    InsufficientData = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmConfig {
    pub ling_weights: [f64; 3],
    pub weights: [f64; 4],
    pub top_n: usize,
    pub bins: usize,
    pub seed: u64,
}

impl From<&SmConfig> for MatcherConfig {
    fn from(c: &SmConfig) -> Self {
        MatcherConfig {
            ling_weights: c.ling_weights,
            weights: c.weights,
            top_n: c.top_n,
            bins: c.bins,
            seed: c.seed,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SmPairScore {
    pub dk: f64,
    pub lin: f64,
    pub uni: f64,
    pub mul: f64,
    pub final_score: f64,
}

pub struct SmDataset(Dataset);

pub struct SmSession(MatchSession);

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => SmStatus::Io,
            Error::WeightSum { .. } | Error::NegativeWeight { .. } | Error::NonPositiveParam { .. } => {
                SmStatus::InvalidConfig
            }
            Error::UnknownAttribute(_) => SmStatus::UnknownAttribute,
            Error::DuplicateConfirmation { .. } => SmStatus::DuplicateConfirmation,
            Error::InsufficientData(_) => SmStatus::InsufficientData,
            _ => SmStatus::MalformedInput,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            SmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SmStatus::NullPointer, format!("{what} is null")));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(SmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| Failure(SmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or_else(|| Failure(SmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SmStatus::NullPointer, "output pointer is null".into()));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn sm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[unsafe(no_mangle)]
pub extern "C" fn sm_config_default() -> SmConfig {
    let d = MatcherConfig::default();
    SmConfig {
        ling_weights: d.ling_weights,
        weights: d.weights,
        top_n: d.top_n,
        bins: d.bins,
        seed: d.seed,
    }
}

/// # Safety
/// `path` and `name` must be NUL-terminated strings; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_dataset_load(
    path: *const c_char,
    name: *const c_char,
    out: *mut *mut SmDataset,
) -> SmStatus {
    guard(|| unsafe {
        let path = str_arg(path, "path")?;
        let name = str_arg(name, "name")?;
        let ds = load_dataset(path, name)?;
        write_out(out, Box::into_raw(Box::new(SmDataset(ds))))
    })
}

/// # Safety
/// `csv` and `name` must be NUL-terminated strings; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_dataset_from_csv(
    csv: *const c_char,
    name: *const c_char,
    out: *mut *mut SmDataset,
) -> SmStatus {
    guard(|| unsafe {
        let csv = str_arg(csv, "csv")?;
        let name = str_arg(name, "name")?;
        let ds = read_dataset(csv.as_bytes(), name)?;
        write_out(out, Box::into_raw(Box::new(SmDataset(ds))))
    })
}

/// Number of attributes, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_dataset_attribute_count(ds: *const SmDataset) -> usize {
    unsafe { ds.as_ref() }.map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_dataset_row_count(ds: *const SmDataset) -> usize {
    unsafe { ds.as_ref() }.map_or(0, |d| d.0.row_count())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_dataset_free(ds: *mut SmDataset) {
    if !ds.is_null() {
        drop(unsafe { Box::from_raw(ds) });
    }
}

/// Starts a session over copies of both datasets. `cfg` and `rules_json` may
/// be null for defaults.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_new(
    source: *const SmDataset,
    dest: *const SmDataset,
    cfg: *const SmConfig,
    rules_json: *const c_char,
    out: *mut *mut SmSession,
) -> SmStatus {
    guard(|| unsafe {
        let source = ref_arg(source, "source")?.0.clone();
        let dest = ref_arg(dest, "dest")?.0.clone();
        let cfg = cfg.as_ref().map(MatcherConfig::from).unwrap_or_default();
        let rules = if rules_json.is_null() {
            RuleSet::empty()
        } else {
            RuleSet::from_json_str(str_arg(rules_json, "rules_json")?)?
        };
        let id = format!("ffi-{}", NEXT_SESSION.fetch_add(1, Ordering::Relaxed));
        let session = MatchSession::new(id, source, dest, cfg, rules, Vec::new(), None)?;
        write_out(out, Box::into_raw(Box::new(SmSession(session))))
    })
}

/// # Safety
/// `session` must be live; strings NUL-terminated.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_confirm(
    session: *mut SmSession,
    source_attr: *const c_char,
    dest_attr: *const c_char,
) -> SmStatus {
    guard(|| unsafe {
        let s = mut_arg(session, "session")?;
        s.0.confirm(str_arg(source_attr, "source_attr")?, str_arg(dest_attr, "dest_attr")?)?;
        Ok(())
    })
}

/// # Safety
/// `session` must be live; strings NUL-terminated.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_reject(
    session: *mut SmSession,
    source_attr: *const c_char,
    dest_attr: *const c_char,
) -> SmStatus {
    guard(|| unsafe {
        let s = mut_arg(session, "session")?;
        s.0.reject(str_arg(source_attr, "source_attr")?, str_arg(dest_attr, "dest_attr")?)?;
        Ok(())
    })
}

/// # Safety
/// `session` must be live; strings NUL-terminated; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_pair_score(
    session: *const SmSession,
    source_attr: *const c_char,
    dest_attr: *const c_char,
    out: *mut SmPairScore,
) -> SmStatus {
    guard(|| unsafe {
        let s = ref_arg(session, "session")?;
        let (a, b) = (str_arg(source_attr, "source_attr")?, str_arg(dest_attr, "dest_attr")?);
        s.0.source().require(a)?;
        s.0.dest().require(b)?;
        let p = s
            .0
            .matrix()
            .get(a, b)
            .ok_or_else(|| Failure(SmStatus::UnknownAttribute, format!("no score for ({a}, {b})")))?;
        write_out(
            out,
            SmPairScore {
                dk: p.dk,
                lin: p.lin,
                uni: p.uni,
                mul: p.mul,
                final_score: p.final_score,
            },
        )
    })
}

/// Pending suggestions as JSON; free the string with [`sm_string_free`].
///
/// # Safety
/// `session` must be live; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_suggestions_json(
    session: *const SmSession,
    top_n: usize,
    out: *mut *mut c_char,
) -> SmStatus {
    guard(|| unsafe {
        let s = ref_arg(session, "session")?;
        if top_n == 0 {
            return Err(Failure(SmStatus::InvalidConfig, "top_n must be at least 1".into()));
        }
        let sugg = rank_excluding(s.0.matrix(), top_n, &s.0.exclusions());
        let json = serde_json::to_string(&sugg).map_err(Error::from)?;
        write_out(out, into_c_string(json))
    })
}

/// Full score matrix as CSV; free the string with [`sm_string_free`].
///
/// # Safety
/// `session` must be live; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_matrix_csv(session: *const SmSession, out: *mut *mut c_char) -> SmStatus {
    guard(|| unsafe {
        let s = ref_arg(session, "session")?;
        write_out(out, into_c_string(s.0.matrix().to_csv_string()))
    })
}

/// # Safety
/// `session` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_session_free(session: *mut SmSession) {
    if !session.is_null() {
        drop(unsafe { Box::from_raw(session) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// # Safety
/// Strings NUL-terminated; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_sim_lev(a: *const c_char, b: *const c_char, out: *mut f64) -> SmStatus {
    guard(|| unsafe { write_out(out, sim_lev(str_arg(a, "a")?, str_arg(b, "b")?)) })
}

/// # Safety
/// Strings NUL-terminated; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_edit_distance(a: *const c_char, b: *const c_char, out: *mut usize) -> SmStatus {
    guard(|| unsafe { write_out(out, edit_distance(str_arg(a, "a")?, str_arg(b, "b")?)) })
}

/// # Safety
/// Strings NUL-terminated; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn sm_monge_elkan(a: *const c_char, b: *const c_char, out: *mut f64) -> SmStatus {
    guard(|| unsafe { write_out(out, sim_monge_elkan(str_arg(a, "a")?, str_arg(b, "b")?)) })
}
