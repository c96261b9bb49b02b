//! C ABI for the `acsplit` integrators.
//!
//! Fields and schemes cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every fallible call returns
//! an [`AcsStatus`]; on failure a description of the error is available from
//! [`acs_last_error`] on the same thread until the next failing call.
//!
//! Grid layout follows the core crate: values are stored with axis 0 varying
//! slowest, and a grid has one to three axes.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use acsplit::coeffs::{named_scheme, third_order_family};
use acsplit::harness::{load_field, save_field};
use acsplit::problems::{spinodal_initial, traveling_wave_field, SpinodalSpec, TravelingWaveSpec};
use acsplit::solver::{relative_l2_error, run_with, step, RunConfig, RunStatus};
use acsplit::{Branch, CutoffPolicy, Error, Field, GridSpec, ModelParams, SchemeId, SplitCoefficients};

/// Result of a call. Values match the exit codes of the `acsplit` CLI where
/// the categories overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad parameter, unknown scheme id or non-UTF-8 string.
    InvalidArgument = 2,
    Io = 3,
    /// Field file or value buffer with the wrong shape or content.
    MalformedField = 4,
    InvalidOmega = 5,
    /// The integration blew up; the field holds the last finite state.
    Diverged = 6,
    ConvergenceFailure = 7,
    /// Invalid grid, mismatched grids or a zero reference norm.
    InvalidGrid = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// A scalar field on a 1D, 2D or 3D cell-centered grid.
pub struct AcsField {
    inner: Field,
}

/// Splitting coefficients `(a_j, b_j)` of one scheme.
pub struct AcsScheme {
    inner: SplitCoefficients,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AcsStatus {
    match e {
        Error::Config(_) | Error::UnknownScheme(_) | Error::InvalidParameter(_) => AcsStatus::InvalidArgument,
        Error::Io { .. } => AcsStatus::Io,
        Error::MalformedHeader(_) | Error::SizeMismatch { .. } | Error::NonFinite { .. } => AcsStatus::MalformedField,
        Error::InvalidOmega { .. } => AcsStatus::InvalidOmega,
        Error::Divergence { .. } | Error::Blowup { .. } => AcsStatus::Diverged,
        Error::ConvergenceFailure(_) => AcsStatus::ConvergenceFailure,
        Error::InvalidGrid(_) | Error::GridMismatch | Error::ZeroReference => AcsStatus::InvalidGrid,
    }
}

fn fail(status: AcsStatus, msg: impl Into<String>) -> AcsStatus {
    set_last_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), AcsStatus>) -> AcsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AcsStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(AcsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, AcsStatus>;
}

impl<T> OrStatus<T> for acsplit::Result<T> {
    fn or_status(self) -> Result<T, AcsStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &str) -> Result<&'a T, AcsStatus> {
    // SAFETY: caller passes either null or a pointer to a live `T`.
    unsafe { p.as_ref() }.ok_or_else(|| fail(AcsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, AcsStatus> {
    // SAFETY: as above, and the caller holds no other reference.
    unsafe { p.as_mut() }.ok_or_else(|| fail(AcsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], AcsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AcsStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, AcsStatus> {
    if p.is_null() {
        return Err(fail(AcsStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(AcsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), AcsStatus> {
    let out = unsafe { nonnull_mut(out, "output handle") }?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn model(epsilon: f64) -> Result<ModelParams, AcsStatus> {
    ModelParams::new(epsilon).or_status()
}

fn cutoff(k_tol: f64) -> Result<CutoffPolicy, AcsStatus> {
    CutoffPolicy::new(k_tol).or_status()
}

/// Message of the last failed call on this thread, or null when none
/// failed yet. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn acs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn acs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------------------
// fields

/// Creates a field on a grid with `dims` axes of `cells[i]` cells and length
/// `lengths[i]`. `values` holds the product of `cells` entries, or is null
/// for an all-zero field.
///
/// # Safety
/// `cells` and `lengths` point to `dims` elements, `values` is null or points
/// to the full cell count, and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_field_new(
    dims: usize,
    cells: *const usize,
    lengths: *const f64,
    values: *const f64,
    out: *mut *mut AcsField,
) -> AcsStatus {
    guard(|| {
        let cells = unsafe { slice(cells, dims, "cells") }?;
        let lengths = unsafe { slice(lengths, dims, "lengths") }?;
        let grid = GridSpec::new(cells, lengths).or_status()?;
        let data = if values.is_null() {
            vec![0.0; grid.total()]
        } else {
            unsafe { slice(values, grid.total(), "values") }?.to_vec()
        };
        let field = Field::new(grid, data).or_status()?;
        unsafe { emit(out, AcsField { inner: field }) }
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` is null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn acs_field_free(field: *mut AcsField) {
    if !field.is_null() {
        // SAFETY: the handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Number of cells, 0 for a null handle.
///
/// # Safety
/// `field` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acs_field_len(field: *const AcsField) -> usize {
    unsafe { field.as_ref() }.map_or(0, |f| f.inner.values().len())
}

/// Number of axes, 0 for a null handle.
///
/// # Safety
/// `field` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acs_field_dims(field: *const AcsField) -> usize {
    unsafe { field.as_ref() }.map_or(0, |f| f.inner.grid().dims())
}

/// Borrowed pointer to the values; valid until the field is modified or
/// freed. Null for a null handle.
///
/// # Safety
/// `field` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acs_field_values(field: *const AcsField) -> *const f64 {
    unsafe { field.as_ref() }.map_or(ptr::null(), |f| f.inner.values().as_ptr())
}

/// Writes a field file.
///
/// # Safety
/// `field` is a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn acs_field_save(field: *const AcsField, path: *const c_char) -> AcsStatus {
    guard(|| {
        let field = unsafe { nonnull(field, "field") }?;
        let path = unsafe { string(path, "path") }?;
        save_field(&field.inner, path).or_status()
    })
}

/// Reads a field file.
///
/// # Safety
/// `path` is a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_field_load(path: *const c_char, out: *mut *mut AcsField) -> AcsStatus {
    guard(|| {
        let path = unsafe { string(path, "path") }?;
        let field = load_field(path).or_status()?;
        unsafe { emit(out, AcsField { inner: field }) }
    })
}

/// Traveling front at time `t` on `[0, 4]` with `cells` cells.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_traveling_wave(epsilon: f64, cells: usize, t: f64, out: *mut *mut AcsField) -> AcsStatus {
    guard(|| {
        model(epsilon)?;
        let spec = TravelingWaveSpec::with_epsilon(epsilon);
        let field = traveling_wave_field(&spec.grid(cells).or_status()?, t, &spec).or_status()?;
        unsafe { emit(out, AcsField { inner: field }) }
    })
}

/// Seeded random initial state on the unit cube with `cells` cells per axis.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_spinodal_initial(
    epsilon: f64,
    amplitude: f64,
    seed: u64,
    cells: usize,
    out: *mut *mut AcsField,
) -> AcsStatus {
    guard(|| {
        let spec = SpinodalSpec {
            epsilon,
            amplitude,
            seed,
            cells,
            length: 1.0,
        };
        let field = spinodal_initial(&spec).or_status()?;
        unsafe { emit(out, AcsField { inner: field }) }
    })
}

/// `||f - reference|| / ||reference||`.
///
/// # Safety
/// Both handles are live and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_relative_l2_error(
    field: *const AcsField,
    reference: *const AcsField,
    out: *mut f64,
) -> AcsStatus {
    guard(|| {
        let f = unsafe { nonnull(field, "field") }?;
        let g = unsafe { nonnull(reference, "reference") }?;
        let out = unsafe { nonnull_mut(out, "out") }?;
        *out = relative_l2_error(&f.inner, &g.inner).or_status()?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// schemes

/// Looks up a scheme by id: `S1`, `S2`, `S2:<w>`, `S3X`, `S3Y`, `S3Z`,
/// `S3+:<w>`, `S3-:<w>`, `S4U` or `S4V`.
///
/// # Safety
/// `id` is a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_named(id: *const c_char, out: *mut *mut AcsScheme) -> AcsStatus {
    guard(|| {
        let id: SchemeId = unsafe { string(id, "id") }?.parse().or_status()?;
        let scheme = named_scheme(id).or_status()?;
        unsafe { emit(out, AcsScheme { inner: scheme }) }
    })
}

/// Third-order scheme with `b_3 = omega`; `branch` is `+1` or `-1`.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_third_order(omega: f64, branch: c_int, out: *mut *mut AcsScheme) -> AcsStatus {
    guard(|| {
        let branch = match branch {
            1 => Branch::Positive,
            -1 => Branch::Negative,
            other => {
                return Err(fail(
                    AcsStatus::InvalidArgument,
                    format!("branch must be +1 or -1, got {other}"),
                ))
            }
        };
        let scheme = third_order_family(omega, branch).or_status()?.coefficients;
        unsafe { emit(out, AcsScheme { inner: scheme }) }
    })
}

/// Releases a scheme. Null is ignored.
///
/// # Safety
/// `scheme` is null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_free(scheme: *mut AcsScheme) {
    if !scheme.is_null() {
        // SAFETY: the handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(scheme) });
    }
}

/// Number of stages `p`, 0 for a null handle.
///
/// # Safety
/// `scheme` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_stages(scheme: *const AcsScheme) -> usize {
    unsafe { scheme.as_ref() }.map_or(0, |s| s.inner.stages())
}

/// Claimed order of accuracy, 0 for a null handle.
///
/// # Safety
/// `scheme` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_order(scheme: *const AcsScheme) -> u8 {
    unsafe { scheme.as_ref() }.map_or(0, |s| s.inner.claimed_order())
}

/// Copies `a_1..a_p` and `b_1..b_p` into buffers of `len >= p` elements.
///
/// # Safety
/// `scheme` is a live handle; `a` and `b` each hold `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn acs_scheme_coeffs(
    scheme: *const AcsScheme,
    a: *mut f64,
    b: *mut f64,
    len: usize,
) -> AcsStatus {
    guard(|| {
        let s = &unsafe { nonnull(scheme, "scheme") }?.inner;
        let p = s.stages();
        if len < p {
            return Err(fail(
                AcsStatus::InvalidArgument,
                format!("buffers hold {len} values, scheme has {p} stages"),
            ));
        }
        if a.is_null() || b.is_null() {
            return Err(fail(AcsStatus::NullPointer, "coefficient buffer is null"));
        }
        // SAFETY: both buffers hold at least `p` elements.
        unsafe {
            ptr::copy_nonoverlapping(s.a().as_ptr(), a, p);
            ptr::copy_nonoverlapping(s.b().as_ptr(), b, p);
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// time stepping

/// Advances `field` by one step of size `dt` in place. `k_tol` is the heat
/// cut-off (`INFINITY` disables it). On error the field is unchanged.
///
/// # Safety
/// `field` and `scheme` are live handles.
#[no_mangle]
pub unsafe extern "C" fn acs_step(
    field: *mut AcsField,
    scheme: *const AcsScheme,
    dt: f64,
    epsilon: f64,
    k_tol: f64,
) -> AcsStatus {
    guard(|| {
        let field = unsafe { nonnull_mut(field, "field") }?;
        let scheme = unsafe { nonnull(scheme, "scheme") }?;
        let next = step(&field.inner, &scheme.inner, dt, &model(epsilon)?, &cutoff(k_tol)?).or_status()?;
        field.inner = next;
        Ok(())
    })
}

/// Integrates `field` in place from 0 to `t_final` with step `dt`; a final
/// shortened step covers any remainder. When the run diverges the field
/// holds the last finite state and `ACS_STATUS_DIVERGED` is returned.
/// `steps_done` (may be null) receives the number of completed steps.
///
/// # Safety
/// `field` and `scheme` are live handles; `steps_done` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn acs_run(
    field: *mut AcsField,
    scheme: *const AcsScheme,
    dt: f64,
    t_final: f64,
    epsilon: f64,
    k_tol: f64,
    steps_done: *mut usize,
) -> AcsStatus {
    guard(|| {
        let field = unsafe { nonnull_mut(field, "field") }?;
        let scheme = unsafe { nonnull(scheme, "scheme") }?;
        // the scheme id in the config is ignored by run_with
        let cfg = RunConfig::new(SchemeId::S1, dt, t_final, model(epsilon)?).with_cutoff(cutoff(k_tol)?);
        let traj = run_with(&field.inner, &scheme.inner, &cfg).or_status()?;
        if let Some(n) = unsafe { steps_done.as_mut() } {
            *n = traj.diagnostics.len() - 1;
        }
        field.inner = traj.final_field;
        match traj.status {
            RunStatus::Completed => Ok(()),
            RunStatus::Diverged { step, reason, .. } => {
                Err(fail(AcsStatus::Diverged, format!("diverged at step {step}: {reason}")))
            }
        }
    })
}
