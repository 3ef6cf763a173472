//! C interface to the `vcsqse` library.
//!
//! Every function returns a [`VqStatus`]; on failure a message is kept per
//! thread and can be copied out with [`vq_last_error_message`]. Objects are
//! opaque handles owned by the caller and released with their `_free` function.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use vcsqse::channels::{lift_to_register, single_qubit_channel, ChannelKind, ChannelSpec};
use vcsqse::linalg::ComplexMatrix;
use vcsqse::molecule::{
    assemble_hamiltonian, fci_sector, parse_fcidump, read_fcidump, MolecularIntegrals,
};
use vcsqse::qse::{
    build_subspace_direct, fermionic_basis, qubit_basis, solve_subspace, ExcitationFilter,
};
use vcsqse::rdm::RdmSource;
use vcsqse::vcs::{Observables, VcsSolution, VcsSolver};

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Noise channel applied independently to every qubit.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VqChannel {
    Identity = 0,
    Dephasing = 1,
    AmplitudePhase = 2,
    Depolarizing = 3,
}

/// Expansion basis for the subspace calculation.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VqBasis {
    Fermionic = 0,
    Qubit = 1,
}

/// A molecular Hamiltonian in its dense qubit representation.
pub struct VqSystem {
    integrals: MolecularIntegrals,
    hamiltonian: ComplexMatrix,
}

/// Outcome of a variational channel-state solve.
pub struct VqVcsResult {
    solution: VcsSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(VqStatus, String);

impl Failure {
    fn new(status: VqStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VqStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".to_string());
        Err(Failure(VqStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            VqStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(VqStatus::NullPointer, format!("{what} is null")))
}

/// # Safety
/// `p` is null or points to a writable `T`.
unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(VqStatus::NullPointer, format!("{what} is null")))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            VqStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(VqStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn numerical(e: impl ToString) -> Failure {
    Failure::new(VqStatus::Numerical, e)
}

fn system_from(integrals: MolecularIntegrals) -> Result<Box<VqSystem>, Failure> {
    integrals
        .validate()
        .map_err(|e| Failure::new(VqStatus::Parse, e))?;
    let hamiltonian = assemble_hamiltonian(&integrals)
        .to_dense()
        .map_err(numerical)?;
    Ok(Box::new(VqSystem {
        integrals,
        hamiltonian,
    }))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated).
///
/// `*len` receives the message length excluding the terminator. With a null or
/// too-small buffer nothing is copied and `BufferTooSmall` is returned.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_last_error_message(
    buf: *mut c_char,
    capacity: usize,
    len: *mut usize,
) -> VqStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    if let Some(l) = unsafe { len.as_mut() } {
        *l = msg.len();
    }
    if buf.is_null() || capacity <= msg.len() {
        return VqStatus::BufferTooSmall;
    }
    // SAFETY: `buf` has room for `capacity > msg.len()` bytes.
    unsafe {
        ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
        *buf.add(msg.len()) = 0;
    }
    VqStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads an FCIDUMP file.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_from_fcidump(
    path: *const c_char,
    out: *mut *mut VqSystem,
) -> VqStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = c_str(path, "path")?;
        let integrals = read_fcidump(Path::new(path)).map_err(|e| {
            let status = match e {
                vcsqse::molecule::MoleculeError::Io { .. } => VqStatus::Io,
                _ => VqStatus::Parse,
            };
            Failure::new(status, e)
        })?;
        *out = Box::into_raw(system_from(integrals)?);
        Ok(())
    })
}

/// Parses FCIDUMP text held in memory.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_from_fcidump_text(
    text: *const c_char,
    out: *mut *mut VqSystem,
) -> VqStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = c_str(text, "text")?;
        let integrals = parse_fcidump(text).map_err(|e| Failure::new(VqStatus::Parse, e))?;
        *out = Box::into_raw(system_from(integrals)?);
        Ok(())
    })
}

/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_free(system: *mut VqSystem) {
    if !system.is_null() {
        // SAFETY: produced by Box::into_raw in a constructor above.
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Number of spin-orbitals (qubits).
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_mode_count(
    system: *const VqSystem,
    out: *mut usize,
) -> VqStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(system, "system")?.integrals.mode_count();
        Ok(())
    })
}

/// Electron count from the FCIDUMP header.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_electron_count(
    system: *const VqSystem,
    out: *mut usize,
) -> VqStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(system, "system")?.integrals.nelec;
        Ok(())
    })
}

/// Exact eigenvalues in the header's electron-number sector, ascending.
///
/// `*count` receives the number of levels; with `capacity` smaller than that
/// nothing is written and `BufferTooSmall` is returned.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_system_fci_levels(
    system: *const VqSystem,
    levels: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> VqStatus {
    guard(|| {
        let sys = non_null(system, "system")?;
        let count = out_ptr(count, "count")?;
        let spec = fci_sector(&sys.hamiltonian, sys.integrals.nelec).map_err(numerical)?;
        write_levels(&spec.eigenvalues, levels, capacity, count)
    })
}

unsafe fn write_levels(
    values: &[f64],
    out: *mut f64,
    capacity: usize,
    count: &mut usize,
) -> Result<(), Failure> {
    *count = values.len();
    if out.is_null() || capacity < values.len() {
        return Err(Failure::new(
            VqStatus::BufferTooSmall,
            format!("need room for {} values, got {capacity}", values.len()),
        ));
    }
    // SAFETY: `out` holds at least `capacity >= values.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
    Ok(())
}

/// Solves the variational channel-state problem for `channel` on every qubit.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_vcs_solve(
    system: *const VqSystem,
    channel: VqChannel,
    tp_over_t1: f64,
    tp_over_t2: f64,
    out: *mut *mut VqVcsResult,
) -> VqStatus {
    guard(|| {
        let sys = non_null(system, "system")?;
        let out = out_ptr(out, "out")?;
        let kind = match channel {
            VqChannel::Identity => ChannelKind::Identity,
            VqChannel::Dephasing => ChannelKind::Dephasing,
            VqChannel::AmplitudePhase => ChannelKind::AmplitudePhase,
            VqChannel::Depolarizing => ChannelKind::Depolarizing,
        };
        let invalid =
            |e: vcsqse::channels::ChannelError| Failure::new(VqStatus::InvalidArgument, e);
        let per_qubit = single_qubit_channel(&ChannelSpec::new(kind, tp_over_t1, tp_over_t2))
            .map_err(invalid)?;
        let modes = sys.integrals.mode_count();
        let lifted = lift_to_register(&per_qubit, modes).map_err(invalid)?;
        let solver = VcsSolver::new(sys.hamiltonian.clone(), lifted)
            .and_then(|s| s.with_observables(Observables::new(modes)?))
            .map_err(numerical)?;
        let solution = solver.solve(None).map_err(numerical)?;
        *out = Box::into_raw(Box::new(VqVcsResult { solution }));
        Ok(())
    })
}

/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_vcs_result_free(result: *mut VqVcsResult) {
    if !result.is_null() {
        // SAFETY: produced by Box::into_raw in vq_vcs_solve.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// `Tr[ρ_out H]` of the optimal input.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_vcs_energy(result: *const VqVcsResult, out: *mut f64) -> VqStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(result, "result")?.solution.energy;
        Ok(())
    })
}

/// `⟨ψ_in|ρ_out|ψ_in⟩` of the optimal input.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_vcs_fidelity(result: *const VqVcsResult, out: *mut f64) -> VqStatus {
    guard(|| {
        *out_ptr(out, "out")? = non_null(result, "result")?.solution.fidelity_io;
        Ok(())
    })
}

/// `⟨S²⟩` of the optimal input state.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_vcs_s_squared(result: *const VqVcsResult, out: *mut f64) -> VqStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        *out_ptr(out, "out")? = r
            .solution
            .symmetry_expectations
            .get("s_squared")
            .copied()
            .unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Subspace-expansion levels around the channel output of `result`.
///
/// `order` is 1 or 2. Output convention as for [`vq_system_fci_levels`].
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes described
/// above; handles come from this library and have not been freed.
#[no_mangle]
pub unsafe extern "C" fn vq_qse_levels(
    system: *const VqSystem,
    result: *const VqVcsResult,
    basis: VqBasis,
    order: usize,
    levels: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> VqStatus {
    guard(|| {
        let sys = non_null(system, "system")?;
        let r = non_null(result, "result")?;
        let count = out_ptr(count, "count")?;
        let modes = sys.integrals.mode_count();
        if r.solution.output_rho.dim() != sys.hamiltonian.dim() {
            return Err(Failure::new(
                VqStatus::InvalidArgument,
                "result belongs to a different system",
            ));
        }
        let invalid = |e: vcsqse::qse::QseError| Failure::new(VqStatus::InvalidArgument, e);
        let b = match basis {
            VqBasis::Fermionic => fermionic_basis(modes, order, true, ExcitationFilter::All),
            VqBasis::Qubit => qubit_basis(modes, order),
        }
        .map_err(invalid)?;
        let prob = build_subspace_direct(
            &b,
            &sys.hamiltonian,
            RdmSource::Mixed(&r.solution.output_rho),
            &BTreeMap::new(),
        )
        .map_err(numerical)?;
        let spec = solve_subspace(&prob, vcsqse::qse::QSE_METRIC_CUTOFF).map_err(numerical)?;
        write_levels(&spec.eigenvalues, levels, capacity, count)
    })
}
