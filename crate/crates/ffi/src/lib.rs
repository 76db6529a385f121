//! C ABI over the photon-engine simulator.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every fallible call returns a [`PeStatus`]; on failure
//! the message is available from [`pe_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use photon_engine::constants::two_pi;
use photon_engine::dynamics::{build_generator, steady_state_numeric};
use photon_engine::engine::{run_cycle, CycleMode, CycleSchedule, ReservoirProgram};
use photon_engine::fock::{ergotropy, photon_statistics, von_neumann_entropy};
use photon_engine::reservoir::{
    atom_density_matrix, calibrate_theta, AtomEnsembleSpec, CavityAtomParams, PhaseMode, ReservoirDerived,
};
use photon_engine::{Error, FieldState};

/// All atoms share the pump phase.
pub const PE_PHASE_COHERENT: u32 = 0;
/// Pump phase is random from atom to atom.
pub const PE_PHASE_RANDOMIZED: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Gain exceeds cavity loss; no steady state exists.
    Masing = 3,
    Solver = 4,
    Panic = 5,
}

/// Cavity and beam parameters.
pub struct PeParams(CavityAtomParams);

/// Cavity field density matrix.
pub struct PeFieldState(FieldState);

/// Closed-form reservoir quantities for one operating point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeReservoir {
    pub rho_ee: f64,
    pub rho_gg: f64,
    pub rho_eg_re: f64,
    pub rho_eg_im: f64,
    /// Injection rate, 1/s.
    pub gamma_inj: f64,
    pub n_th: f64,
    /// Net damping rate, rad/s.
    pub gamma_r: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Reservoir temperature, K.
    pub t_r: f64,
}

/// Quasi-static cycle ledger. Stroke arrays follow A→B, B→C, C→D, D→A.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeCycleLedger {
    pub n_th: f64,
    pub n_sr: f64,
    pub w_out: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub eta: f64,
    pub t_c_sr: f64,
    pub t_c_th: f64,
    pub t_r: f64,
    pub work: [f64; 4],
    pub heat: [f64; 4],
    pub entropy_change: [f64; 4],
    pub ergotropy_change: [f64; 4],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PeStatus {
    match e {
        Error::GainExceedsLoss { .. } => PeStatus::Masing,
        Error::Domain(_) | Error::InvalidDimension(_) | Error::Calibration(_) => PeStatus::InvalidArgument,
        _ => PeStatus::Solver,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F>(f: F) -> PeStatus
where
    F: FnOnce() -> Result<(), (PeStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic in photon-engine");
            PeStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PeStatus, String) {
    (PeStatus::NullPointer, format!("{what} is null"))
}

fn parse_phase_mode(mode: u32) -> Result<PhaseMode, (PeStatus, String)> {
    match mode {
        PE_PHASE_COHERENT => Ok(PhaseMode::Coherent),
        PE_PHASE_RANDOMIZED => Ok(PhaseMode::Randomized),
        m => Err((PeStatus::InvalidArgument, format!("unknown phase mode {m}"))),
    }
}

unsafe fn params_ref<'a>(p: *const PeParams) -> Result<&'a CavityAtomParams, (PeStatus, String)> {
    // SAFETY: caller passes a live handle from pe_params_* or null.
    unsafe { p.as_ref() }.map(|p| &p.0).ok_or_else(|| null("params"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pe_version() -> *const c_char {
    const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Experimental cavity: (g, κ, γ)/2π = (334, 74, 25) kHz, gτ = 0.17, N̄ = 0.8.
#[no_mangle]
pub extern "C" fn pe_params_experimental() -> *mut PeParams {
    Box::into_raw(Box::new(PeParams(CavityAtomParams::experimental())))
}

/// Experimental cavity rescaled to the given `gτ` and `κτ`; null on invalid input.
#[no_mangle]
pub extern "C" fn pe_params_with_products(g_tau: f64, kappa_tau: f64, n_bar: f64) -> *mut PeParams {
    let p = CavityAtomParams::with_products(g_tau, kappa_tau, n_bar);
    match p.validate() {
        Ok(()) => Box::into_raw(Box::new(PeParams(p))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pe_params_set_n_bar(params: *mut PeParams, n_bar: f64) -> PeStatus {
    guard(|| {
        // SAFETY: see above
        let p = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        let next = p.0.with_n_bar(n_bar);
        next.validate().map_err(lib)?;
        p.0 = next;
        Ok(())
    })
}

/// Sets the atom-cavity detuning, rad/s.
///
/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pe_params_set_delta_ac(params: *mut PeParams, delta_ac: f64) -> PeStatus {
    guard(|| {
        // SAFETY: see above
        let p = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        let next = p.0.with_delta_ac(delta_ac);
        next.validate().map_err(lib)?;
        p.0 = next;
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pe_params_free(params: *mut PeParams) {
    if !params.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Bloch angle giving reservoir temperature `t_r` (K) at the current detuning.
///
/// # Safety
/// `params` must be a live handle and `theta_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pe_calibrate_theta(params: *const PeParams, t_r: f64, theta_out: *mut f64) -> PeStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        if theta_out.is_null() {
            return Err(null("theta_out"));
        }
        let theta = calibrate_theta(p, t_r).map_err(lib)?;
        // SAFETY: checked non-null
        unsafe { *theta_out = theta };
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pe_reservoir_derive(
    params: *const PeParams,
    theta: f64,
    phase_mode: u32,
    out: *mut PeReservoir,
) -> PeStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = parse_phase_mode(phase_mode)?;
        let spec = AtomEnsembleSpec::coherent(theta)
            .and_then(|s| s.with_mode(mode))
            .map_err(lib)?;
        let d = ReservoirDerived::compute(p, &atom_density_matrix(&spec)).map_err(lib)?;
        let r = PeReservoir {
            rho_ee: d.rho_ee,
            rho_gg: d.rho_gg,
            rho_eg_re: d.rho_eg.re,
            rho_eg_im: d.rho_eg.im,
            gamma_inj: d.gamma_inj,
            n_th: d.n_th,
            gamma_r: d.gamma_r,
            lambda_re: d.lambda_drive.re,
            lambda_im: d.lambda_drive.im,
            t_r: d.t_r,
        };
        // SAFETY: checked non-null
        unsafe { *out = r };
        Ok(())
    })
}

/// Numerical steady state at Fock truncation `dim`; the handle is written to `out`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pe_steady_state(
    params: *const PeParams,
    theta: f64,
    phase_mode: u32,
    dim: usize,
    out: *mut *mut PeFieldState,
) -> PeStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = parse_phase_mode(phase_mode)?;
        let spec = AtomEnsembleSpec::coherent(theta)
            .and_then(|s| s.with_mode(mode))
            .map_err(lib)?;
        let gen = build_generator(p, &atom_density_matrix(&spec), dim).map_err(lib)?;
        let rho = steady_state_numeric(&gen).map_err(lib)?;
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(PeFieldState(rho))) };
        Ok(())
    })
}

unsafe fn state_ref<'a>(s: *const PeFieldState) -> Result<&'a FieldState, (PeStatus, String)> {
    // SAFETY: caller passes a live handle or null
    unsafe { s.as_ref() }.map(|s| &s.0).ok_or_else(|| null("state"))
}

/// Fock dimension, 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pe_state_dim(state: *const PeFieldState) -> usize {
    unsafe { state_ref(state) }.map(|s| s.dim()).unwrap_or(0)
}

/// Writes `⟨a†a⟩` and `g²(0)`.
///
/// # Safety
/// `state` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_state_stats(state: *const PeFieldState, n_mean: *mut f64, g2_zero: *mut f64) -> PeStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if n_mean.is_null() || g2_zero.is_null() {
            return Err(null("output"));
        }
        let st = photon_statistics(s).map_err(lib)?;
        // SAFETY: checked non-null
        unsafe {
            *n_mean = st.n_mean;
            *g2_zero = st.g2_zero;
        }
        Ok(())
    })
}

/// Von Neumann entropy in units of k_B; NaN for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pe_state_entropy(state: *const PeFieldState) -> f64 {
    unsafe { state_ref(state) }.map(von_neumann_entropy).unwrap_or(f64::NAN)
}

/// Ergotropy for mode energy `hbar_omega` (J).
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pe_state_ergotropy(state: *const PeFieldState, hbar_omega: f64, out: *mut f64) -> PeStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = ergotropy(s, hbar_omega).map_err(lib)?;
        // SAFETY: checked non-null
        unsafe { *out = e };
        Ok(())
    })
}

/// Copies `min(len, dim)` Fock populations into `buf`.
///
/// # Safety
/// `state` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pe_state_populations(state: *const PeFieldState, buf: *mut f64, len: usize) -> PeStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        for (k, p) in s.populations().into_iter().take(len).enumerate() {
            // SAFETY: k < len
            unsafe { *buf.add(k) = p };
        }
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pe_state_free(state: *mut PeFieldState) {
    if !state.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Quasi-static cycle between detunings `delta_1_hz` and `delta_2_hz` (Hz).
/// `thermal_only` nonzero dephases the atoms on every stroke.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pe_cycle_run(
    params: *const PeParams,
    theta: f64,
    delta_1_hz: f64,
    delta_2_hz: f64,
    thermal_only: i32,
    out: *mut PeCycleLedger,
) -> PeStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let schedule = CycleSchedule::from_detunings(two_pi(delta_1_hz), two_pi(delta_2_hz), p.omega_a).map_err(lib)?;
        let program = if thermal_only != 0 {
            ReservoirProgram::thermal_only()
        } else {
            ReservoirProgram::superradiant()
        };
        let l = run_cycle(p, &schedule, theta, &program, CycleMode::QuasiStatic).map_err(lib)?;
        let mut r = PeCycleLedger {
            n_th: l.n_th,
            n_sr: l.n_sr,
            w_out: l.w_out,
            q_in: l.q_in,
            q_out: l.q_out,
            eta: l.eta,
            t_c_sr: l.t_c_sr,
            t_c_th: l.t_c_th,
            t_r: l.t_r,
            ..PeCycleLedger::default()
        };
        for (k, s) in l.strokes.iter().enumerate() {
            r.work[k] = s.work;
            r.heat[k] = s.heat;
            r.entropy_change[k] = s.entropy_change;
            r.ergotropy_change[k] = s.ergotropy_change;
        }
        // SAFETY: checked non-null
        unsafe { *out = r };
        Ok(())
    })
}
