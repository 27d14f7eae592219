//! C ABI over the `revqe` core library.
//!
//! Profiles and spectra cross the boundary as opaque handles created by a
//! `*_new`/`*_solve` function and released by the matching `*_free`. Every
//! fallible function returns a [`RevqeStatus`]; on failure the message is
//! kept per thread and read back with [`revqe_last_error_message`].
//! Results are written through out-pointers, which are left untouched on
//! failure.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use revqe::geometry::{build_profile, ProfileCurve, SurfaceSpec, TableSample};
use revqe::semiclassics::partition;
use revqe::spectral::{solve_modes, ModeSpectrum};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevqeStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument or input table was rejected.
    InvalidArgument = 2,
    /// A solver did not meet its tolerance.
    NumericalFailure = 3,
    /// An index or buffer length was out of range.
    OutOfBounds = 4,
    /// Rust panicked; the library state is unchanged.
    Internal = 5,
}

/// Meridian profile of a surface of revolution.
pub struct RevqeProfile {
    curve: ProfileCurve,
}

/// Lowest eigenpairs of one Fourier mode.
pub struct RevqeSpectrum {
    spectrum: ModeSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: RevqeStatus, msg: impl Into<String>) -> RevqeStatus {
    set_error(msg);
    status
}

fn from_core(err: revqe::Error) -> RevqeStatus {
    let status = if err.is_validation() { RevqeStatus::InvalidArgument } else { RevqeStatus::NumericalFailure };
    fail(status, err.to_string())
}

/// Runs `f`, converting panics into `Internal`.
fn guard(f: impl FnOnce() -> RevqeStatus) -> RevqeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(RevqeStatus::Internal, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(RevqeStatus::NullPointer, concat!("`", stringify!($p), "` is NULL"));
        })+
    };
}

fn emit_profile(spec: SurfaceSpec, out: *mut *mut RevqeProfile) -> RevqeStatus {
    match build_profile(&spec) {
        Ok(curve) => {
            // SAFETY: `out` was checked non-null by the caller of this helper.
            unsafe { *out = Box::into_raw(Box::new(RevqeProfile { curve })) };
            RevqeStatus::Ok
        }
        Err(e) => from_core(e),
    }
}

/// Message of the last failure on this thread, or NULL after a success.
///
/// The string stays valid until the next call into the library from the
/// same thread.
#[no_mangle]
pub extern "C" fn revqe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn revqe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Unit round sphere sampled with `grid_size` intervals.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_sphere(grid_size: usize, out: *mut *mut RevqeProfile) -> RevqeStatus {
    guard(|| {
        non_null!(out);
        emit_profile(SurfaceSpec::round_sphere(grid_size), out)
    })
}

/// Ellipsoid of revolution with polar semi-axis 1 and equatorial radius
/// `axis_ratio`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_ellipsoid(
    axis_ratio: f64,
    grid_size: usize,
    out: *mut *mut RevqeProfile,
) -> RevqeStatus {
    guard(|| {
        non_null!(out);
        emit_profile(SurfaceSpec::ellipsoid(axis_ratio, grid_size), out)
    })
}

/// Profile from a tabulated meridian `(t, R(t), z(t))` with `len` rows.
///
/// # Safety
/// `t`, `r` and `z` must each point to `len` readable doubles; `out` must be
/// a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_table(
    t: *const f64,
    r: *const f64,
    z: *const f64,
    len: usize,
    grid_size: usize,
    out: *mut *mut RevqeProfile,
) -> RevqeStatus {
    guard(|| {
        non_null!(t, r, z, out);
        // SAFETY: the caller guarantees `len` readable elements behind each pointer.
        let (t, r, z) =
            unsafe { (slice::from_raw_parts(t, len), slice::from_raw_parts(r, len), slice::from_raw_parts(z, len)) };
        let samples = (0..len).map(|i| TableSample { t: t[i], r: r[i], z: z[i] }).collect();
        emit_profile(SurfaceSpec::table(samples, grid_size), out)
    })
}

/// Releases a profile. NULL is ignored.
///
/// # Safety
/// `profile` must be NULL or a handle from a `revqe_profile_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_free(profile: *mut RevqeProfile) {
    if !profile.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Meridian length `L`.
///
/// # Safety
/// `profile` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_length(profile: *const RevqeProfile, out: *mut f64) -> RevqeStatus {
    guard(|| {
        non_null!(profile, out);
        // SAFETY: checked non-null; validity is the caller's contract.
        unsafe { *out = (*profile).curve.length() };
        RevqeStatus::Ok
    })
}

/// Profile radius `R(θ)` for `θ ∈ [0, L]`.
///
/// # Safety
/// `profile` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_radius(profile: *const RevqeProfile, theta: f64, out: *mut f64) -> RevqeStatus {
    guard(|| {
        non_null!(profile, out);
        // SAFETY: as above.
        match unsafe { (*profile).curve.radius(theta) } {
            Ok(v) => {
                unsafe { *out = v };
                RevqeStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Length `2πR(θ)` of the rotation orbit through `θ`.
///
/// # Safety
/// `profile` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_profile_orbit_volume(
    profile: *const RevqeProfile,
    theta: f64,
    out: *mut f64,
) -> RevqeStatus {
    guard(|| {
        non_null!(profile, out);
        // SAFETY: as above.
        match unsafe { (*profile).curve.orbit_volume(theta) } {
            Ok(v) => {
                unsafe { *out = v };
                RevqeStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Solves for the `count` lowest eigenpairs of mode `m` on `intervals`
/// finite-volume cells.
///
/// # Safety
/// `profile` must be a live handle and `out` a valid pointer to writable
/// storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn revqe_spectrum_solve(
    profile: *const RevqeProfile,
    m: i64,
    intervals: usize,
    count: usize,
    out: *mut *mut RevqeSpectrum,
) -> RevqeStatus {
    guard(|| {
        non_null!(profile, out);
        // SAFETY: as above.
        let curve = unsafe { &(*profile).curve };
        match solve_modes(curve, &[m], intervals, count) {
            Ok(mut s) => {
                let spectrum = s.pop().expect("one mode requested");
                unsafe { *out = Box::into_raw(Box::new(RevqeSpectrum { spectrum })) };
                RevqeStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Releases a spectrum. NULL is ignored.
///
/// # Safety
/// `spectrum` must be NULL or a handle from [`revqe_spectrum_solve`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn revqe_spectrum_free(spectrum: *mut RevqeSpectrum) {
    if !spectrum.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(spectrum) });
    }
}

/// Number of eigenpairs held, or 0 for NULL.
///
/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn revqe_spectrum_len(spectrum: *const RevqeSpectrum) -> usize {
    // SAFETY: as documented.
    unsafe { spectrum.as_ref() }.map_or(0, |s| s.spectrum.pairs.len())
}

/// Eigenvalue of the `k`-th pair (0-based, ascending).
///
/// # Safety
/// `spectrum` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_spectrum_eigenvalue(
    spectrum: *const RevqeSpectrum,
    k: usize,
    out: *mut f64,
) -> RevqeStatus {
    guard(|| {
        non_null!(spectrum, out);
        // SAFETY: as above.
        let pairs = unsafe { &(*spectrum).spectrum.pairs };
        match pairs.get(k) {
            Some(p) => {
                unsafe { *out = p.energy };
                RevqeStatus::Ok
            }
            None => fail(RevqeStatus::OutOfBounds, format!("pair {k} of {}", pairs.len())),
        }
    })
}

/// Copies the `k`-th eigenfunction's nodal values into `values` and their
/// θ-coordinates into `theta` (either may be NULL). `*len` is set to the
/// node count; the call fails with `OutOfBounds` if `capacity` is smaller,
/// so passing `capacity = 0` queries the size.
///
/// # Safety
/// Non-null `values`/`theta` must hold `capacity` writable doubles; `len`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn revqe_spectrum_eigenfunction(
    spectrum: *const RevqeSpectrum,
    k: usize,
    theta: *mut f64,
    values: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RevqeStatus {
    guard(|| {
        non_null!(spectrum, len);
        // SAFETY: as above.
        let pairs = unsafe { &(*spectrum).spectrum.pairs };
        let Some(p) = pairs.get(k) else {
            return fail(RevqeStatus::OutOfBounds, format!("pair {k} of {}", pairs.len()));
        };
        let n = p.f().len();
        unsafe { *len = n };
        if theta.is_null() && values.is_null() {
            return RevqeStatus::Ok;
        }
        if capacity < n {
            return fail(RevqeStatus::OutOfBounds, format!("buffer holds {capacity} values, need {n}"));
        }
        // SAFETY: capacity ≥ n writable elements per the contract.
        unsafe {
            if !theta.is_null() {
                ptr::copy_nonoverlapping(p.theta().as_ptr(), theta, n);
            }
            if !values.is_null() {
                ptr::copy_nonoverlapping(p.f().as_ptr(), values, n);
            }
        }
        RevqeStatus::Ok
    })
}

/// Associated Legendre function `P_l^m(x)` with the Condon–Shortley phase.
///
/// # Safety
/// `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_legendre_assoc(l: i64, m: i64, x: f64, out: *mut f64) -> RevqeStatus {
    guard(|| {
        non_null!(out);
        match revqe::specfun::legendre_assoc(l, m, x) {
            Ok(v) => {
                unsafe { *out = v };
                RevqeStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// θ-part of the normalized spherical harmonic `Y_l^m`, so that
/// `2π ∫ |f|² sin θ dθ = 1`.
///
/// # Safety
/// `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn revqe_ylm_radial(l: i64, m: i64, theta: f64, out: *mut f64) -> RevqeStatus {
    guard(|| {
        non_null!(out);
        match revqe::specfun::ylm_radial(l, m, theta) {
            Ok(v) => {
                unsafe { *out = v };
                RevqeStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Partitions the nondecreasing positive sequence `a[0..len]` into blocks
/// with exponent `beta`.
///
/// `p` receives `len` entries, `p[j-1] = P(j)` (1-based block starts). The
/// block starts themselves go to `jk` when it is non-NULL and `jk_capacity`
/// suffices; `*jk_len` always receives their count.
///
/// # Safety
/// `a` must hold `len` readable doubles, `p` `len` writable slots, non-null
/// `jk` `jk_capacity` writable slots, and `jk_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn revqe_partition(
    a: *const f64,
    len: usize,
    beta: f64,
    p: *mut usize,
    jk: *mut usize,
    jk_capacity: usize,
    jk_len: *mut usize,
) -> RevqeStatus {
    guard(|| {
        non_null!(a, p, jk_len);
        // SAFETY: per the contract.
        let a = unsafe { slice::from_raw_parts(a, len) };
        let result = match partition(a, beta) {
            Ok(r) => r,
            Err(e) => return from_core(e),
        };
        unsafe {
            *jk_len = result.jk.len();
            ptr::copy_nonoverlapping(result.p.as_ptr(), p, len);
        }
        if !jk.is_null() {
            if jk_capacity < result.jk.len() {
                return fail(
                    RevqeStatus::OutOfBounds,
                    format!("jk buffer holds {jk_capacity}, need {}", result.jk.len()),
                );
            }
            unsafe { ptr::copy_nonoverlapping(result.jk.as_ptr(), jk, result.jk.len()) };
        }
        RevqeStatus::Ok
    })
}
