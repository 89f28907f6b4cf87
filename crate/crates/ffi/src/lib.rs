//! C ABI for the coopbandit simulator.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! calls and released with the matching `*_free`. Fallible calls return a
//! [`CbStatus`]; the message for the most recent failure on the calling
//! thread is available from [`cb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use coopbandit::graph::{generate, Graph, GraphSpec, GraphStats};
use coopbandit::{output, policy, run_experiment, AggregateResult, Error, ExperimentConfig};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    GraphError = 4,
    SimulationError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated experiment configuration.
pub struct CbExperiment {
    cfg: ExperimentConfig,
}

/// Aggregated regret curves from one experiment.
pub struct CbResult {
    res: AggregateResult,
}

/// A generated communication graph.
pub struct CbGraph {
    graph: Graph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CbStatus {
    match e {
        Error::GraphGeneration(_) | Error::InvalidGraph(_) | Error::Disconnected | Error::SizeLimit { .. } => {
            CbStatus::GraphError
        }
        Error::Config { .. } | Error::InvalidArms(_) | Error::Unsupported(_) => CbStatus::ConfigError,
        _ => CbStatus::SimulationError,
    }
}

fn fail(e: Error) -> CbStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, turning panics into `CbStatus::Panic`.
fn guard(f: impl FnOnce() -> CbStatus) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == CbStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CbStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CbStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(CbStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        CbStatus::InvalidUtf8
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if the last call
/// succeeded. Free with [`cb_string_free`].
#[no_mangle]
pub extern "C" fn cb_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Upper confidence index of an arm. Infinite when `count` is zero.
#[no_mangle]
pub extern "C" fn cb_ucb_index(mean: f64, count: u64, t: u64, xi: f64, sigma: f64) -> f64 {
    policy::ucb_index(mean, count, t, xi, sigma)
}

/// Parses and validates an experiment config in JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_from_json(json: *const c_char, out: *mut *mut CbExperiment) -> CbStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return CbStatus::NullPointer;
        }
        let text = try_status!(read_str(json));
        match ExperimentConfig::from_json(text).and_then(|cfg| cfg.validate().map(|_| cfg)) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(CbExperiment { cfg }));
                CbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Overrides the master seed.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_set_seed(exp: *mut CbExperiment, seed: u64) -> CbStatus {
    match exp.as_mut() {
        Some(e) => {
            e.cfg.master_seed = seed;
            CbStatus::Ok
        }
        None => CbStatus::NullPointer,
    }
}

/// Sets a sweepable numeric parameter such as `link_p` or `epsilon`.
///
/// # Safety
/// `exp` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_set_param(exp: *mut CbExperiment, name: *const c_char, value: f64) -> CbStatus {
    guard(|| {
        let Some(e) = exp.as_mut() else { return CbStatus::NullPointer };
        let name = try_status!(read_str(name));
        let mut cfg = e.cfg.clone();
        match cfg.set_param(name, value).and_then(|_| cfg.validate()) {
            Ok(()) => {
                e.cfg = cfg;
                CbStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Runs every repetition and aggregates the regret curves.
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_run(exp: *const CbExperiment, out: *mut *mut CbResult) -> CbStatus {
    guard(|| {
        let (Some(e), false) = (exp.as_ref(), out.is_null()) else {
            set_error("null argument");
            return CbStatus::NullPointer;
        };
        match run_experiment(&e.cfg) {
            Ok(res) => {
                *out = Box::into_raw(Box::new(CbResult { res }));
                CbStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// `exp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_free(exp: *mut CbExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of rounds in the result curves, 0 for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_result_horizon(res: *const CbResult) -> u64 {
    res.as_ref().map_or(0, |r| r.res.horizon())
}

/// Mean cumulative regret at the horizon, NaN for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_result_final_mean(res: *const CbResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.res.final_mean())
}

unsafe fn copy_curve(curve: &[f64], buf: *mut f64, len: usize) -> CbStatus {
    if buf.is_null() {
        return CbStatus::NullPointer;
    }
    if len < curve.len() {
        set_error(format!("buffer holds {len} values, {} needed", curve.len()));
        return CbStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(curve.as_ptr(), buf, curve.len());
    CbStatus::Ok
}

/// Copies the per-round mean curve into `buf`, which must hold at least
/// `cb_result_horizon` values.
///
/// # Safety
/// `res` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cb_result_copy_mean(res: *const CbResult, buf: *mut f64, len: usize) -> CbStatus {
    match res.as_ref() {
        Some(r) => copy_curve(&r.res.mean, buf, len),
        None => CbStatus::NullPointer,
    }
}

/// Copies the per-round standard deviation curve into `buf`.
///
/// # Safety
/// `res` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cb_result_copy_std(res: *const CbResult, buf: *mut f64, len: usize) -> CbStatus {
    match res.as_ref() {
        Some(r) => copy_curve(&r.res.std, buf, len),
        None => CbStatus::NullPointer,
    }
}

/// The result rendered as CSV. Free with [`cb_string_free`].
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_result_csv(res: *const CbResult) -> *mut c_char {
    res.as_ref().map_or(ptr::null_mut(), |r| into_c_string(output::csv_text(&r.res)))
}

/// # Safety
/// `res` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_result_free(res: *mut CbResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Generates a graph from a spec string such as `erdos_renyi(20,0.5)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_graph_generate(spec: *const c_char, seed: u64, out: *mut *mut CbGraph) -> CbStatus {
    guard(|| {
        if out.is_null() {
            return CbStatus::NullPointer;
        }
        let text = try_status!(read_str(spec));
        match text.parse::<GraphSpec>().and_then(|s| generate(&s, seed)) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(CbGraph { graph }));
                CbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_graph_node_count(g: *const CbGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.n())
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_graph_edge_count(g: *const CbGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// Graph statistics as `key=value` lines. Free with [`cb_string_free`].
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_graph_stats(g: *const CbGraph) -> *mut c_char {
    let Some(g) = g.as_ref() else { return ptr::null_mut() };
    match GraphStats::compute(&g.graph) {
        Ok(s) => into_c_string(s.to_key_values()),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `g` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_graph_free(g: *mut CbGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
