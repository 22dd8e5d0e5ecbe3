//! C ABI over the spectral toolbox: opaque grid and field handles, status codes and a
//! thread-local error message.
//!
//! Every function returning [`BolabStatus`] writes its result through an out-pointer and leaves
//! it untouched on failure. Handles are released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bolab_core::norms::{self, AdmissibleTriplet};
use bolab_core::spectral::{self, Field, HalfLine, SpectralGrid};
use bolab_core::Error;

/// Opaque periodic grid.
pub struct BolabGrid(SpectralGrid);

/// Opaque sampled field with its Fourier coefficients.
pub struct BolabField(Field);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BolabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    NonzeroMean = 4,
    UnboundedSymbol = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BolabHalfLine {
    Plus = 0,
    Minus = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BolabStatus, msg: impl Into<String>) -> BolabStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> BolabStatus {
    let status = match e {
        Error::GridMismatch => BolabStatus::GridMismatch,
        Error::NonzeroMean { .. } => BolabStatus::NonzeroMean,
        Error::UnboundedSymbol { .. } => BolabStatus::UnboundedSymbol,
        _ => BolabStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guarded(body: impl FnOnce() -> BolabStatus) -> BolabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => fail(BolabStatus::Panic, "internal panic"),
    }
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn bolab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn bolab_grid_new(n_points: usize, length: f64, out: *mut *mut BolabGrid) -> BolabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BolabStatus::NullPointer, "out is null");
        }
        match SpectralGrid::new(n_points, length) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(BolabGrid(g)));
                BolabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `grid` must be null or a handle from [`bolab_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bolab_grid_free(grid: *mut BolabGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bolab_grid_n_points(grid: *const BolabGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.n_points())
}

/// Builds a real field from `len == n_points` samples at `x_j = -L/2 + jL/n`.
///
/// # Safety
/// `grid` must be a live handle, `values` must point to `len` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bolab_field_from_real(
    grid: *const BolabGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut BolabField,
) -> BolabStatus {
    guarded(|| {
        let (Some(g), false, false) = (grid.as_ref(), values.is_null(), out.is_null()) else {
            return fail(BolabStatus::NullPointer, "null argument");
        };
        if len != g.0.n_points() {
            return fail(BolabStatus::InvalidArgument, format!("expected {} samples, got {len}", g.0.n_points()));
        }
        let samples = std::slice::from_raw_parts(values, len);
        match Field::from_real(&g.0, samples) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(BolabField(f)));
                BolabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn bolab_field_free(field: *mut BolabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

unsafe fn write_complex(data: &[num_complex::Complex64], out: *mut f64, capacity: usize) -> BolabStatus {
    if out.is_null() {
        return fail(BolabStatus::NullPointer, "out is null");
    }
    if capacity < 2 * data.len() {
        return fail(BolabStatus::BufferTooSmall, format!("need {} doubles, got {capacity}", 2 * data.len()));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * data.len());
    for (pair, z) in dst.chunks_exact_mut(2).zip(data) {
        pair[0] = z.re;
        pair[1] = z.im;
    }
    BolabStatus::Ok
}

/// Samples as interleaved `(re, im)` pairs; `capacity` counts doubles.
///
/// # Safety
/// `field` must be a live handle and `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bolab_field_values(field: *const BolabField, out: *mut f64, capacity: usize) -> BolabStatus {
    guarded(|| match field.as_ref() {
        Some(f) => write_complex(f.0.values(), out, capacity),
        None => fail(BolabStatus::NullPointer, "field is null"),
    })
}

/// Coefficients `c_m` as interleaved pairs, slot `i` holding mode `m = i - n/2`.
///
/// # Safety
/// As [`bolab_field_values`].
#[no_mangle]
pub unsafe extern "C" fn bolab_field_coeffs(field: *const BolabField, out: *mut f64, capacity: usize) -> BolabStatus {
    guarded(|| match field.as_ref() {
        Some(f) => write_complex(f.0.coeffs(), out, capacity),
        None => fail(BolabStatus::NullPointer, "field is null"),
    })
}

unsafe fn unary(
    field: *const BolabField,
    out: *mut *mut BolabField,
    op: impl FnOnce(&Field) -> bolab_core::Result<Field>,
) -> BolabStatus {
    guarded(|| {
        let (Some(f), false) = (field.as_ref(), out.is_null()) else {
            return fail(BolabStatus::NullPointer, "null argument");
        };
        match op(&f.0) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(BolabField(r)));
                BolabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `field` must be a live handle and `out` writable; the result is a new handle.
#[no_mangle]
pub unsafe extern "C" fn bolab_hilbert(field: *const BolabField, out: *mut *mut BolabField) -> BolabStatus {
    unary(field, out, |f| Ok(spectral::hilbert(f)))
}

/// `D^alpha`; negative orders need a mean-zero field.
///
/// # Safety
/// As [`bolab_hilbert`].
#[no_mangle]
pub unsafe extern "C" fn bolab_fractional_derivative(
    field: *const BolabField,
    alpha: f64,
    out: *mut *mut BolabField,
) -> BolabStatus {
    unary(field, out, |f| spectral::fractional_derivative(f, alpha))
}

/// # Safety
/// As [`bolab_hilbert`].
#[no_mangle]
pub unsafe extern "C" fn bolab_free_evolve(field: *const BolabField, t: f64, out: *mut *mut BolabField) -> BolabStatus {
    unary(field, out, |f| Ok(spectral::free_evolve(f, t)))
}

/// # Safety
/// As [`bolab_hilbert`].
#[no_mangle]
pub unsafe extern "C" fn bolab_project_half_line(
    field: *const BolabField,
    side: BolabHalfLine,
    out: *mut *mut BolabField,
) -> BolabStatus {
    let side = match side {
        BolabHalfLine::Plus => HalfLine::Plus,
        BolabHalfLine::Minus => HalfLine::Minus,
    };
    unary(field, out, |f| Ok(spectral::project_half_line(f, side)))
}

/// Littlewood–Paley block `Q_j`.
///
/// # Safety
/// As [`bolab_hilbert`].
#[no_mangle]
pub unsafe extern "C" fn bolab_lp_block(field: *const BolabField, j: i32, out: *mut *mut BolabField) -> BolabStatus {
    unary(field, out, |f| Ok(spectral::lp_block(f, j)))
}

/// # Safety
/// As [`bolab_hilbert`].
#[no_mangle]
pub unsafe extern "C" fn bolab_lowpass_p0(field: *const BolabField, out: *mut *mut BolabField) -> BolabStatus {
    unary(field, out, |f| Ok(spectral::lowpass_p0(f)))
}

/// # Safety
/// `field` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bolab_sobolev_norm(field: *const BolabField, s: f64, homogeneous: bool, out: *mut f64) -> BolabStatus {
    guarded(|| {
        let (Some(f), false) = (field.as_ref(), out.is_null()) else {
            return fail(BolabStatus::NullPointer, "null argument");
        };
        match norms::sobolev_norm(&f.0, s, homogeneous) {
            Ok(v) => {
                *out = v;
                BolabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Pass `INFINITY` for an infinite exponent.
#[no_mangle]
pub extern "C" fn bolab_is_one_admissible(alpha: f64, p: f64, q: f64) -> bool {
    norms::is_one_admissible(&AdmissibleTriplet::new(alpha, p, q))
}

/// Writes one verdict byte (1 pass, 0 fail) per audit row into `verdicts` and the row count into `n_rows`.
///
/// # Safety
/// `verdicts` must point to `capacity` writable bytes and `n_rows` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bolab_norm_family_audit(
    s: f64,
    k: u32,
    eps: f64,
    delta: f64,
    verdicts: *mut u8,
    capacity: usize,
    n_rows: *mut usize,
) -> BolabStatus {
    guarded(|| {
        if verdicts.is_null() || n_rows.is_null() {
            return fail(BolabStatus::NullPointer, "null argument");
        }
        let rows = norms::norm_family_audit(s, k, eps, delta);
        *n_rows = rows.len();
        if capacity < rows.len() {
            return fail(BolabStatus::BufferTooSmall, format!("need {} bytes, got {capacity}", rows.len()));
        }
        let dst = std::slice::from_raw_parts_mut(verdicts, rows.len());
        for (d, r) in dst.iter_mut().zip(&rows) {
            *d = u8::from(r.verdict);
        }
        BolabStatus::Ok
    })
}

/// `σ` in `V(t) = exp(iσ t ξ|ξ|)`.
#[no_mangle]
pub extern "C" fn bolab_dispersion_sign() -> f64 {
    spectral::dispersion_sign()
}

/// `-2 Σ_{j=1..3} ξ_j (ξ_{j-1} - ξ_j)`.
#[no_mangle]
pub extern "C" fn bolab_illposed_phase(xi0: f64, xi1: f64, xi2: f64, xi3: f64) -> f64 {
    bolab_core::experiments::illposed::phase_p(xi0, xi1, xi2, xi3)
}
