//! C ABI over the robocollab harness.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns an
//! [`RcStatus`]; on failure [`rc_last_error`] describes the cause. Panics
//! never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robocollab::harness::{replay, EpisodeMetrics, ReplayError};
use robocollab::policy::{Ablations, Backend, ChatConfig, PolicyConfig};
use robocollab::scenario::{generate, Layout};
use robocollab::tasks::TaskKind;
use robocollab::{run_episode, EpisodeConfig, EpisodeResult, Scenario};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ScenarioInvalid = 4,
    EpisodeFailed = 5,
    LogCorrupt = 6,
    DriftDetected = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcLayout {
    Kitchen = 0,
    Bathroom = 1,
    Bedroom = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcTask {
    PackObjects = 0,
    SortSolids = 1,
    MakeSandwich = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcBackend {
    Oracle = 0,
    AlwaysWait = 1,
    Chat = 2,
}

/// Episode settings. Start from [`rc_run_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcRunOptions {
    pub horizon: u32,
    pub seed: u64,
    /// An [`RcBackend`] value.
    pub backend: u32,
    pub no_feedback: bool,
    pub no_history: bool,
    pub no_mobile_robot: bool,
    /// Nullable; JSONL log destination.
    pub log_path: *const c_char,
    /// Required for the chat backend.
    pub endpoint: *const c_char,
    /// Required for the chat backend.
    pub model: *const c_char,
    pub temperature: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RcMetrics {
    pub success: bool,
    pub partial_success: f64,
    pub temporal_steps: u32,
    pub action_steps: u32,
    pub decisions: u32,
    pub parse_failures: u32,
    pub first_try_parses: u32,
    pub backend_errors: u32,
}

impl From<&EpisodeMetrics> for RcMetrics {
    fn from(m: &EpisodeMetrics) -> Self {
        Self {
            success: m.success,
            partial_success: m.partial_success,
            temporal_steps: m.temporal_steps,
            action_steps: m.action_steps,
            decisions: m.decisions,
            parse_failures: m.parse_failures,
            first_try_parses: m.first_try_parses,
            backend_errors: m.backend_errors,
        }
    }
}

/// Opaque scenario handle.
pub struct RcScenario {
    inner: Scenario,
    path: Option<std::path::PathBuf>,
}

/// Opaque finished-episode handle.
pub struct RcEpisode {
    inner: EpisodeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(RcStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: RcStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, records any error and converts panics into [`RcStatus::Panic`].
fn guard(f: impl FnOnce() -> FfiResult<()>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RcStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        return Ok(None);
    }
    // SAFETY: non-null and NUL-terminated per the contract above
    match unsafe { CStr::from_ptr(p) }.to_str() {
        Ok(s) => Ok(Some(s)),
        Err(_) => fail(RcStatus::InvalidUtf8, format!("{what} is not UTF-8")),
    }
}

/// # Safety
/// As [`opt_str`], but null is an error.
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    match unsafe { opt_str(p, what) }? {
        Some(s) => Ok(s),
        None => fail(RcStatus::NullPointer, format!("{what} is null")),
    }
}

fn check_out<T>(out: *mut T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        fail(RcStatus::NullPointer, format!("{what} is null"))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a scenario file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_load(path: *const c_char, out: *mut *mut RcScenario) -> RcStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = unsafe { req_str(path, "path") }?;
        let inner = Scenario::load(path).map_err(|e| Failure(RcStatus::ScenarioInvalid, e.to_string()))?;
        let issues = inner.validate();
        if !issues.is_empty() {
            return fail(RcStatus::ScenarioInvalid, issues.join("; "));
        }
        let handle = Box::new(RcScenario {
            inner,
            path: Some(path.into()),
        });
        // SAFETY: checked non-null above
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Builds one of the shipped configurations in memory. `layout` is an
/// [`RcLayout`] value, `task` an [`RcTask`] value.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_generate(
    layout: u32,
    task: u32,
    objects: u32,
    out: *mut *mut RcScenario,
) -> RcStatus {
    guard(|| {
        check_out(out, "out")?;
        if !(3..=6).contains(&objects) {
            return fail(
                RcStatus::InvalidArgument,
                format!("object count {objects} outside 3..=6"),
            );
        }
        let layout = match layout {
            x if x == RcLayout::Kitchen as u32 => Layout::Kitchen,
            x if x == RcLayout::Bathroom as u32 => Layout::Bathroom,
            x if x == RcLayout::Bedroom as u32 => Layout::Bedroom,
            x => return fail(RcStatus::InvalidArgument, format!("unknown layout {x}")),
        };
        let task = match task {
            x if x == RcTask::PackObjects as u32 => TaskKind::PackObjects,
            x if x == RcTask::SortSolids as u32 => TaskKind::SortSolids,
            x if x == RcTask::MakeSandwich as u32 => TaskKind::MakeSandwich,
            x => return fail(RcStatus::InvalidArgument, format!("unknown task {x}")),
        };
        let handle = Box::new(RcScenario {
            inner: generate(layout, task, objects as usize),
            path: None,
        });
        // SAFETY: checked non-null above
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// # Safety
/// `scenario` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_free(scenario: *mut RcScenario) {
    if !scenario.is_null() {
        // SAFETY: produced by Box::into_raw in this library
        drop(unsafe { Box::from_raw(scenario) });
    }
}

#[no_mangle]
pub extern "C" fn rc_run_options_default() -> RcRunOptions {
    RcRunOptions {
        horizon: robocollab::harness::DEFAULT_HORIZON,
        seed: 0,
        backend: RcBackend::Oracle as u32,
        no_feedback: false,
        no_history: false,
        no_mobile_robot: false,
        log_path: ptr::null(),
        endpoint: ptr::null(),
        model: ptr::null(),
        temperature: 0.5,
    }
}

unsafe fn policy_config(o: &RcRunOptions) -> FfiResult<PolicyConfig> {
    let backend = match o.backend {
        x if x == RcBackend::Oracle as u32 => Backend::ScriptedOracle,
        x if x == RcBackend::AlwaysWait as u32 => Backend::AlwaysWait,
        x if x == RcBackend::Chat as u32 => {
            let endpoint = unsafe { req_str(o.endpoint, "endpoint") }?;
            let model = unsafe { req_str(o.model, "model") }?;
            let mut c = ChatConfig::new(endpoint, model);
            c.temperature = o.temperature;
            c.check().map_err(|e| Failure(RcStatus::InvalidArgument, e))?;
            Backend::ChatModel(c)
        }
        x => return fail(RcStatus::InvalidArgument, format!("unknown backend {x}")),
    };
    Ok(PolicyConfig {
        backend,
        ablations: Ablations {
            no_feedback: o.no_feedback,
            no_history: o.no_history,
        },
    })
}

/// Runs one episode. `options` may be null for the defaults.
///
/// # Safety
/// `scenario` is a live handle; `options` is null or valid; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rc_run_episode(
    scenario: *const RcScenario,
    options: *const RcRunOptions,
    out: *mut *mut RcEpisode,
) -> RcStatus {
    guard(|| {
        check_out(out, "out")?;
        if scenario.is_null() {
            return fail(RcStatus::NullPointer, "scenario is null");
        }
        // SAFETY: non-null live handle per the contract
        let scenario = unsafe { &*scenario };
        let opts = if options.is_null() {
            rc_run_options_default()
        } else {
            // SAFETY: non-null and valid per the contract
            unsafe { *options }
        };
        let mut cfg = EpisodeConfig::new(scenario.inner.clone());
        cfg.scenario_path = scenario.path.clone();
        cfg.horizon = opts.horizon;
        cfg.seed = opts.seed;
        cfg.policy = unsafe { policy_config(&opts) }?;
        cfg.no_mobile_robot = opts.no_mobile_robot;
        cfg.log_path = unsafe { opt_str(opts.log_path, "log_path") }?.map(Into::into);
        let inner = run_episode(&cfg).map_err(|e| Failure(RcStatus::EpisodeFailed, e.to_string()))?;
        // SAFETY: checked non-null above
        unsafe { *out = Box::into_raw(Box::new(RcEpisode { inner })) };
        Ok(())
    })
}

/// # Safety
/// `episode` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rc_episode_metrics(episode: *const RcEpisode, out: *mut RcMetrics) -> RcStatus {
    guard(|| {
        check_out(out, "out")?;
        if episode.is_null() {
            return fail(RcStatus::NullPointer, "episode is null");
        }
        // SAFETY: both pointers checked; the handle is live per the contract
        unsafe { *out = RcMetrics::from(&(*episode).inner.metrics) };
        Ok(())
    })
}

/// The episode log as JSONL. Release with [`rc_string_free`].
///
/// # Safety
/// `episode` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rc_episode_log(episode: *const RcEpisode, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        check_out(out, "out")?;
        if episode.is_null() {
            return fail(RcStatus::NullPointer, "episode is null");
        }
        // SAFETY: live handle per the contract
        let text = unsafe { &*episode }.inner.log_text();
        let c = CString::new(text).map_err(|e| Failure(RcStatus::EpisodeFailed, e.to_string()))?;
        // SAFETY: checked non-null above
        unsafe { *out = c.into_raw() };
        Ok(())
    })
}

/// # Safety
/// `episode` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_episode_free(episode: *mut RcEpisode) {
    if !episode.is_null() {
        // SAFETY: produced by Box::into_raw in this library
        drop(unsafe { Box::from_raw(episode) });
    }
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this library
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Re-executes a log file. `out` may be null when only the verdict matters.
///
/// # Safety
/// `log_path` is a NUL-terminated string; `out` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn rc_replay(log_path: *const c_char, out: *mut RcMetrics) -> RcStatus {
    guard(|| {
        let path = unsafe { req_str(log_path, "log_path") }?;
        let result = replay(std::path::Path::new(path)).map_err(|e| match e {
            ReplayError::LogCorrupt(_) => Failure(RcStatus::LogCorrupt, e.to_string()),
            ReplayError::DriftDetected { .. } => Failure(RcStatus::DriftDetected, e.to_string()),
        })?;
        if !out.is_null() {
            // SAFETY: non-null and writable per the contract
            unsafe { *out = RcMetrics::from(&result.metrics) };
        }
        Ok(())
    })
}
