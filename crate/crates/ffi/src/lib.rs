//! C ABI over the `modcool` library.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`ModcoolStatus`]; on failure [`modcool_last_error`] describes the most
//! recent error on the calling thread. Panics are caught at the boundary and
//! reported as [`ModcoolStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use modcool::cli::{execute, ExperimentConfig, Outputs};
use modcool::doppler::doppler_limit;
use modcool::protocol::{apply_round, optimize_epsilon, quantum_energy};
use modcool::semiclassical::{classical_energy, RoundParams};
use modcool::{Error, ErrorClass, FockSpace, FockState, ThermalSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModcoolStatus {
    Ok = 0,
    /// Invalid argument or configuration.
    Config = 2,
    /// Truncation, fit or other numerical failure.
    Numerical = 3,
    Io = 4,
    /// A required pointer was null.
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque oscillator density matrix.
pub struct ModcoolState {
    inner: FockState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> ModcoolStatus {
    match err.class() {
        ErrorClass::Config => ModcoolStatus::Config,
        ErrorClass::Numerical => ModcoolStatus::Numerical,
        ErrorClass::Io => ModcoolStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ModcoolStatus>) -> ModcoolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ModcoolStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            ModcoolStatus::Panic
        }
    }
}

fn check<T>(r: modcool::Result<T>) -> Result<T, ModcoolStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), ModcoolStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(ModcoolStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message of the last error on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn modcool_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn modcool_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Thermal state with mean occupation `nbar` truncated at `dim` levels.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn modcool_state_thermal(
    nbar: f64,
    dim: usize,
    out: *mut *mut ModcoolState,
) -> ModcoolStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = check(ThermalSpec::new(nbar))?;
        let inner = check(FockState::thermal(&spec, dim))?;
        *out = Box::into_raw(Box::new(ModcoolState { inner }));
        Ok(())
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn modcool_state_free(state: *mut ModcoolState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of Fock levels of `state`, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modcool_state_dim(state: *const ModcoolState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.dim())
}

/// `⟨n̂⟩` of `state`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn modcool_state_mean_occupation(
    state: *const ModcoolState,
    out: *mut f64,
) -> ModcoolStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(out, "out")?;
        *out = (*state).inner.mean_occupation();
        Ok(())
    })
}

/// Copies the Fock populations into `buf`, which must hold `len >= dim` values.
///
/// # Safety
/// `state` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn modcool_state_populations(
    state: *const ModcoolState,
    buf: *mut f64,
    len: usize,
) -> ModcoolStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(buf, "buf")?;
        let pops = (*state).inner.populations();
        if len < pops.len() {
            set_error(format!("buffer holds {len} values, need {}", pops.len()));
            return Err(ModcoolStatus::Config);
        }
        std::slice::from_raw_parts_mut(buf, pops.len()).copy_from_slice(&pops);
        Ok(())
    })
}

/// Applies one cooling round (position then momentum contraction) and
/// returns the result as a new handle; the input is left untouched.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn modcool_apply_round(
    state: *const ModcoolState,
    epsilon_q: f64,
    alpha_q: f64,
    epsilon_p: f64,
    alpha_p: f64,
    out: *mut *mut ModcoolState,
) -> ModcoolStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(out, "out")?;
        let s = &(*state).inner;
        let space = check(FockSpace::new(s.dim()))?;
        let q = RoundParams::position(epsilon_q, alpha_q);
        let p = RoundParams::momentum(epsilon_p, alpha_p);
        let inner = check(apply_round(&space, s, &q, &p))?;
        *out = Box::into_raw(Box::new(ModcoolState { inner }));
        Ok(())
    })
}

/// Quantum-optimal `(ε, α)` for a thermal state and the resulting energy ratio.
///
/// # Safety
/// The output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn modcool_optimize_epsilon(
    nbar: f64,
    epsilon: *mut f64,
    alpha: *mut f64,
    energy_ratio: *mut f64,
) -> ModcoolStatus {
    guard(|| {
        non_null(epsilon, "epsilon")?;
        non_null(alpha, "alpha")?;
        non_null(energy_ratio, "energy_ratio")?;
        let o = check(optimize_epsilon(&check(ThermalSpec::new(nbar))?))?;
        *epsilon = o.epsilon;
        *alpha = o.alpha;
        *energy_ratio = o.energy_ratio();
        Ok(())
    })
}

/// Mean energy in ħω after one round on a thermal state: the classical
/// formula if `quantum` is 0, the exact quantum one otherwise.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modcool_round_energy(
    nbar: f64,
    epsilon: f64,
    alpha: f64,
    quantum: i32,
    out: *mut f64,
) -> ModcoolStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = check(ThermalSpec::new(nbar))?;
        *out = if quantum != 0 {
            quantum_energy(epsilon, alpha, &spec)
        } else {
            classical_energy(epsilon, alpha, &spec)
        };
        Ok(())
    })
}

/// Doppler-optimal detuning and minimum occupation for linewidth `gamma`
/// and trap frequency `omega` (both rad/s).
///
/// # Safety
/// The output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn modcool_doppler_limit(
    gamma: f64,
    omega: f64,
    detuning: *mut f64,
    nbar_min: *mut f64,
) -> ModcoolStatus {
    guard(|| {
        non_null(detuning, "detuning")?;
        non_null(nbar_min, "nbar_min")?;
        let lim = check(doppler_limit(gamma, omega))?;
        *detuning = lim.detuning;
        *nbar_min = lim.nbar_min;
        Ok(())
    })
}

/// Runs the experiment described by the TOML file at `config_path`, writing
/// results into `out_dir` (or the config's own directory if null).
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn modcool_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
) -> ModcoolStatus {
    guard(|| {
        non_null(config_path, "config_path")?;
        let path = PathBuf::from(CStr::from_ptr(config_path).to_string_lossy().into_owned());
        let mut cfg = check(ExperimentConfig::load(&path))?;
        if !out_dir.is_null() {
            cfg.output.dir = PathBuf::from(CStr::from_ptr(out_dir).to_string_lossy().into_owned());
        }
        let mut outputs = check(Outputs::new(&cfg.output.dir))?;
        check(execute(&cfg, &mut outputs))
    })
}
