//! C ABI over `spincat`.
//!
//! Every function returns a [`SpincatStatus`]; on failure the message is kept per thread and
//! can be copied out with [`spincat_last_error_message`]. Handles are opaque and owned by the
//! caller until passed to the matching `_free` function. Matrices are row-major, rows and
//! columns ordered m = -J..J.

use spincat::dynamics::{kitten_state, oat_closed_form};
use spincat::harness::{run_command, write_artifact, Command, HarnessError, OutputFormat, RunConfig, RunContext};
use spincat::linalg::{CMatrix, C64};
use spincat::measurement::{parity, projection_probs};
use spincat::metrology::parity_gain;
use spincat::tomography::wigner::{wigner, SphereGrid};
use spincat::{DensityMatrix, Direction, SpinError, SpinQuantumNumber};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpincatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpincatCommand {
    Evolve = 0,
    Parity = 1,
    Ramsey = 2,
    Hellinger = 3,
    Tomo = 4,
    Budget = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpincatFormat {
    Csv = 0,
    Json = 1,
}

/// Density matrix of one spin.
pub struct SpincatState(DensityMatrix);

/// Run configuration for the reproduction commands.
pub struct SpincatConfig(RunConfig);

struct Failure(SpincatStatus, String);

impl From<SpinError> for Failure {
    fn from(e: SpinError) -> Self {
        let status = if e.is_config_error() { SpincatStatus::InvalidArgument } else { SpincatStatus::Numerical };
        Failure(status, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let status = match e {
            HarnessError::Io(_) => SpincatStatus::Io,
            HarnessError::Config(_) => SpincatStatus::InvalidArgument,
            HarnessError::Numerical(_) | HarnessError::Integrity(_) => SpincatStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpincatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SpincatStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            SpincatStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SpincatStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SpincatStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < needed {
        return Err(Failure(SpincatStatus::BufferTooSmall, format!("{what} holds {len} values, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn spin(two_j: u32) -> Result<SpinQuantumNumber, Failure> {
    Ok(SpinQuantumNumber::from_twice(two_j)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spincat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, NUL excluded; 0 if none.
#[no_mangle]
pub extern "C" fn spincat_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message (NUL-terminated) into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn spincat_last_error_message(buf: *mut c_char, len: usize) -> SpincatStatus {
    if buf.is_null() {
        return SpincatStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[0u8][..], |s| s.as_bytes_with_nul());
        if bytes.len() > len {
            return SpincatStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        SpincatStatus::Ok
    })
}

/// Ideal kitten state (|-J> + i|J>)/√2 for spin `two_j`/2.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_kitten(two_j: u32, out: *mut *mut SpincatState) -> SpincatStatus {
    guard(|| store(out, SpincatState(DensityMatrix::from_pure(&kitten_state(spin(two_j)?)))))
}

/// |-J> evolved under the twisting Hamiltonian for a dimensionless time ωt.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_twisted(two_j: u32, omega_t: f64, out: *mut *mut SpincatState) -> SpincatStatus {
    guard(|| {
        if !omega_t.is_finite() {
            return Err(invalid("omega_t must be finite"));
        }
        store(out, SpincatState(DensityMatrix::from_pure(&oat_closed_form(spin(two_j)?, omega_t))))
    })
}

/// Identity / (2J+1).
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_maximally_mixed(two_j: u32, out: *mut *mut SpincatState) -> SpincatStatus {
    guard(|| store(out, SpincatState(DensityMatrix::maximally_mixed(spin(two_j)?))))
}

/// State from a row-major (2J+1)² density matrix given as real and imaginary parts.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_from_density(
    two_j: u32,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut SpincatState,
) -> SpincatStatus {
    guard(|| {
        let j = spin(two_j)?;
        let d = j.dim();
        if re.is_null() || im.is_null() {
            return Err(null("matrix data"));
        }
        if len != d * d {
            return Err(invalid(format!("expected {} entries, got {len}", d * d)));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let m = CMatrix::from_fn(d, d, |a, b| C64::new(re[a * d + b], im[a * d + b]));
        store(out, SpincatState(DensityMatrix::new(j, m)?))
    })
}

/// Releases a state handle; null is ignored.
///
/// # Safety
/// `state` must come from a `spincat_state_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_free(state: *mut SpincatState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Hilbert-space dimension 2J+1.
///
/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_dim(state: *const SpincatState, out: *mut usize) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *deref_mut(out, "out")? = s.0.dim();
        Ok(())
    })
}

/// Copies the density matrix, row-major, into `re` and `im` (each at least dim² doubles).
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_density(state: *const SpincatState, re: *mut f64, im: *mut f64, len: usize) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let d = s.0.dim();
        let re = out_slice(re, len, d * d, "re")?;
        let im = out_slice(im, len, d * d, "im")?;
        let e = s.0.elements();
        for a in 0..d {
            for b in 0..d {
                re[a * d + b] = e[(a, b)].re;
                im[a * d + b] = e[(a, b)].im;
            }
        }
        Ok(())
    })
}

unsafe fn write_probabilities(state: *const SpincatState, axis: Direction, out: *mut f64, len: usize) -> Result<(), Failure> {
    let s = deref(state, "state")?;
    let p = projection_probs(&s.0, axis).probabilities;
    out_slice(out, len, p.len(), "out")?.copy_from_slice(&p);
    Ok(())
}

/// Π_m along z, m = -J..J.
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_z_probabilities(state: *const SpincatState, out: *mut f64, len: usize) -> SpincatStatus {
    guard(|| write_probabilities(state, Direction::z(), out, len))
}

/// Π_m along the equatorial axis at azimuth `phi`.
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_equatorial_probabilities(
    state: *const SpincatState,
    phi: f64,
    out: *mut f64,
    len: usize,
) -> SpincatStatus {
    guard(|| write_probabilities(state, Direction::equatorial(phi), out, len))
}

/// Parity Σ(-1)^(J-m) Π_m along the equatorial axis at azimuth `phi`.
///
/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_parity(state: *const SpincatState, phi: f64, out: *mut f64) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *deref_mut(out, "out")? = parity(&projection_probs(&s.0, Direction::equatorial(phi)));
        Ok(())
    })
}

/// Overlap ⟨kitten|ρ|kitten⟩.
///
/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_kitten_fidelity(state: *const SpincatState, out: *mut f64) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let f = s.0.fidelity_with_pure(&kitten_state(s.0.j()))?;
        *deref_mut(out, "out")? = f;
        Ok(())
    })
}

/// 2|ρ_{-J,J}| / (ρ_{-J,-J} + ρ_{J,J}).
///
/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_coherence_ratio(state: *const SpincatState, out: *mut f64) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let r = s.0.coherence_ratio()?;
        *deref_mut(out, "out")? = r;
        Ok(())
    })
}

/// Wigner function on an `n_theta` × `n_phi` grid, row-major in θ.
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spincat_state_wigner(
    state: *const SpincatState,
    n_theta: usize,
    n_phi: usize,
    out: *mut f64,
    len: usize,
) -> SpincatStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let grid = SphereGrid::new(n_theta, n_phi)?;
        let dst = out_slice(out, len, n_theta * n_phi, "out")?;
        let field = wigner(&s.0, &grid);
        for (row, chunk) in field.values.iter().zip(dst.chunks_mut(n_phi)) {
            chunk.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Metrological gain (2J)·C² of a parity fringe with contrast C.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_parity_gain(two_j: u32, contrast: f64, out: *mut f64) -> SpincatStatus {
    guard(|| {
        let j = spin(two_j)?;
        if !(0.0..=1.0).contains(&contrast) {
            return Err(invalid("contrast must lie in [0, 1]"));
        }
        *deref_mut(out, "out")? = parity_gain(j, contrast);
        Ok(())
    })
}

/// Built-in default configuration.
///
/// # Safety
/// `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_default(out: *mut *mut SpincatConfig) -> SpincatStatus {
    guard(|| store(out, SpincatConfig(RunConfig::default())))
}

/// Configuration read from a JSON file and validated.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_load(path: *const c_char, out: *mut *mut SpincatConfig) -> SpincatStatus {
    guard(|| {
        let cfg = RunConfig::load(&path_arg(path, "path")?)?;
        cfg.validate()?;
        store(out, SpincatConfig(cfg))
    })
}

/// # Safety
/// `config` must come from a `spincat_config_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_free(config: *mut SpincatConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_set_seed(config: *mut SpincatConfig, seed: u64) -> SpincatStatus {
    guard(|| {
        deref_mut(config, "config")?.0.seed = Some(seed);
        Ok(())
    })
}

/// Atoms per measurement setting; 0 switches sampling off.
///
/// # Safety
/// `config` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_set_samples(config: *mut SpincatConfig, atoms: u64) -> SpincatStatus {
    guard(|| {
        deref_mut(config, "config")?.0.atom_total = (atoms > 0).then_some(atoms);
        Ok(())
    })
}

/// # Safety
/// `config` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spincat_config_set_format(config: *mut SpincatConfig, format: SpincatFormat) -> SpincatStatus {
    guard(|| {
        deref_mut(config, "config")?.0.format = match format {
            SpincatFormat::Csv => OutputFormat::Csv,
            SpincatFormat::Json => OutputFormat::Json,
        };
        Ok(())
    })
}

/// Runs one reproduction command and writes its artifacts under `out_dir`.
///
/// # Safety
/// `config` must be valid; `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spincat_run(config: *const SpincatConfig, command: SpincatCommand, out_dir: *const c_char) -> SpincatStatus {
    guard(|| {
        let mut cfg = deref(config, "config")?.0.clone();
        cfg.output_dir = path_arg(out_dir, "out_dir")?;
        let cmd = match command {
            SpincatCommand::Evolve => Command::Evolve,
            SpincatCommand::Parity => Command::Parity,
            SpincatCommand::Ramsey => Command::Ramsey,
            SpincatCommand::Hellinger => Command::Hellinger,
            SpincatCommand::Tomo => Command::Tomo,
            SpincatCommand::Budget => Command::Budget,
        };
        let artifacts = run_command(cmd, &cfg, None)?;
        let ctx = RunContext { out_dir: cfg.output_dir.clone(), format: cfg.format, config_hash: cfg.hash(), seed: cfg.seed() };
        for a in &artifacts {
            write_artifact(&ctx, a)?;
        }
        Ok(())
    })
}
