//! C ABI over the solver.
//!
//! Instances and reports live behind opaque handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns a
//! [`DcbppStatus`]; on failure [`dcbpp_last_error`] describes what went wrong
//! on the calling thread. Strings returned by the library are released with
//! [`dcbpp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dcbpp::{AnsatzKind, BppInstance, Error, ExperimentConfig, OptConfig, RunReport, RunStatus};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcbppStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    CoverInfeasible = 4,
    CapExceeded = 5,
    Overflow = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcbppAnsatz {
    Qaoa = 0,
    DcQaoa = 1,
    CdInspired = 2,
    CdMixer = 3,
}

impl From<DcbppAnsatz> for AnsatzKind {
    fn from(a: DcbppAnsatz) -> Self {
        match a {
            DcbppAnsatz::Qaoa => AnsatzKind::Qaoa,
            DcbppAnsatz::DcQaoa => AnsatzKind::DcQaoa,
            DcbppAnsatz::CdInspired => AnsatzKind::CdInspired,
            DcbppAnsatz::CdMixer => AnsatzKind::CdMixer,
        }
    }
}

/// Opaque instance handle.
pub struct DcbppInstance(BppInstance);

/// Opaque run report handle.
pub struct DcbppReport(RunReport);

/// Pipeline settings. Fill with [`dcbpp_run_config_default`] first.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DcbppRunConfig {
    pub ansatz: DcbppAnsatz,
    pub layers: usize,
    pub stepsize: f64,
    pub iterations: usize,
    pub trials: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Negative selects the default `2^-n`.
    pub threshold: f64,
    /// 0 reads exact distributions.
    pub shots: u64,
    pub cd_weighted: bool,
    pub penalty: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DcbppMetrics {
    pub fr: f64,
    pub fr_mean: f64,
    pub fr_std: f64,
    pub fps: usize,
    pub ips: usize,
    pub exact_fps: usize,
    /// False when the sampled blocks could not cover every item.
    pub cover_found: bool,
    /// Zero unless `cover_found`.
    pub m_opt: usize,
    pub fs_unordered: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DcbppOracle {
    pub fps: usize,
    pub m_opt: usize,
    pub fs_unordered: u64,
    pub fs_ordered: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DcbppGateCounts {
    pub parameterized: usize,
    pub cnot: usize,
    pub total: usize,
    pub reference_parameterized: usize,
    pub reference_cnot: usize,
    pub reference_total: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> DcbppStatus {
    match e {
        Error::InvalidInstance(_) | Error::Parse { .. } => DcbppStatus::InvalidInstance,
        Error::CoverInfeasible => DcbppStatus::CoverInfeasible,
        Error::CapExceeded { .. } | Error::QubitsOutOfRange(..) => DcbppStatus::CapExceeded,
        Error::Overflow(_) => DcbppStatus::Overflow,
        Error::Config(_) | Error::EmptySchedule { .. } | Error::Precondition(_) => DcbppStatus::InvalidArgument,
        _ => DcbppStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (DcbppStatus, String)>) -> DcbppStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DcbppStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DcbppStatus::Internal
        }
    }
}

fn lift(e: Error) -> (DcbppStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DcbppStatus, String) {
    (DcbppStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dcbpp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an instance from `n` weights.
///
/// # Safety
/// `weights` must point to `n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_instance_new(
    weights: *const u64,
    n: usize,
    capacity: u64,
    out: *mut *mut DcbppInstance,
) -> DcbppStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let w = std::slice::from_raw_parts(weights, n).to_vec();
        let inst = BppInstance::new(w, capacity).map_err(lift)?;
        *out = Box::into_raw(Box::new(DcbppInstance(inst)));
        Ok(())
    })
}

/// Parses an instance from JSON text (`{"capacity": C, "weights": [...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_instance_from_json(json: *const c_char, out: *mut *mut DcbppInstance) -> DcbppStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (DcbppStatus::InvalidArgument, e.to_string()))?;
        let inst = BppInstance::from_json(text).map_err(lift)?;
        *out = Box::into_raw(Box::new(DcbppInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_instance_free(inst: *mut DcbppInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Item count, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_instance_num_items(inst: *const DcbppInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.num_items())
}

/// Writes the library defaults into `out`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_run_config_default(out: *mut DcbppRunConfig) {
    if let Some(out) = out.as_mut() {
        let e = ExperimentConfig::default();
        *out = DcbppRunConfig {
            ansatz: DcbppAnsatz::CdMixer,
            layers: e.layers,
            stepsize: e.stepsize,
            iterations: e.opt.iterations,
            trials: e.opt.trials,
            learning_rate: e.opt.learning_rate,
            seed: e.opt.seed,
            threshold: -1.0,
            shots: e.shots,
            cd_weighted: e.cd_weighted,
            penalty: e.penalty_b,
        };
    }
}

fn experiment(c: &DcbppRunConfig) -> ExperimentConfig {
    ExperimentConfig {
        kind: c.ansatz.into(),
        layers: c.layers,
        stepsize: c.stepsize,
        penalty_b: c.penalty,
        threshold: (c.threshold >= 0.0).then_some(c.threshold),
        shots: c.shots,
        cd_weighted: c.cd_weighted,
        opt: OptConfig {
            iterations: c.iterations,
            learning_rate: c.learning_rate,
            trials: c.trials,
            seed: c.seed,
            ..OptConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

/// Runs the full pipeline. A run whose samples cannot cover every item still
/// produces a report; check `cover_found` in its metrics.
///
/// # Safety
/// `inst` and `cfg` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_run(
    inst: *const DcbppInstance,
    cfg: *const DcbppRunConfig,
    out: *mut *mut DcbppReport,
) -> DcbppStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = dcbpp::run_experiment(&inst.0, &experiment(cfg)).map_err(lift)?;
        *out = Box::into_raw(Box::new(DcbppReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_report_free(report: *mut DcbppReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_report_metrics(report: *const DcbppReport, out: *mut DcbppMetrics) -> DcbppStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = &r.0.metrics;
        *out = DcbppMetrics {
            fr: m.fr,
            fr_mean: m.fr_mean,
            fr_std: m.fr_std,
            fps: m.fps,
            ips: m.ips,
            exact_fps: m.exact_fps,
            cover_found: r.0.status == RunStatus::Ok,
            m_opt: m.m_opt.unwrap_or(0),
            fs_unordered: m.fs_unordered.unwrap_or(0),
        };
        Ok(())
    })
}

/// The full report as JSON, or null on failure. Free with [`dcbpp_string_free`].
///
/// # Safety
/// `report` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_report_to_json(report: *const DcbppReport) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        s = CString::new(r.0.to_json()).map_err(|e| (DcbppStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    });
    s
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Brute-force ground truth.
///
/// # Safety
/// `inst` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_oracle(inst: *const DcbppInstance, out: *mut DcbppOracle) -> DcbppStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = dcbpp::oracle(&inst.0, None).map_err(lift)?;
        let fs_ordered = u64::try_from(r.fs_ordered)
            .map_err(|_| (DcbppStatus::Overflow, "ordered count exceeds 64 bits".to_string()))?;
        *out = DcbppOracle { fps: r.fps, m_opt: r.m_opt, fs_unordered: r.fs_unordered, fs_ordered };
        Ok(())
    })
}

/// Per-layer gate counts for `n` items.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dcbpp_gate_counts(ansatz: DcbppAnsatz, n: usize, out: *mut DcbppGateCounts) -> DcbppStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let g = dcbpp::gate_counts(ansatz.into(), n).map_err(lift)?;
        *out = DcbppGateCounts {
            parameterized: g.parameterized,
            cnot: g.cnot,
            total: g.total,
            reference_parameterized: g.reference_parameterized,
            reference_cnot: g.reference_cnot,
            reference_total: g.reference_total,
        };
        Ok(())
    })
}
