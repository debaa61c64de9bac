//! C ABI over `smoothrange`.
//!
//! Point sets cross the boundary as opaque `SrPointSet` handles. Every
//! function returns an `SrStatus`; on failure the message is available from
//! `sr_last_error_message` on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use smoothrange::clustering::{default_k_max, gonzalez_linf};
use smoothrange::discrepancy::{build_evaluation_net, eps_sample_error, merge_reduce, OffsetMode, SampleTarget};
use smoothrange::geometry::{kde, sde, KernelKind, KernelProfile, PointSet, SmoothedRange};
use smoothrange::matching::{MatchingMode, MatchingOptions, DEFAULT_EXACT_CAP};
use smoothrange::Error;

pub const SR_PROFILE_BALL: u32 = 0;
pub const SR_PROFILE_TRIANGLE: u32 = 1;
pub const SR_PROFILE_EPANECHNIKOV: u32 = 2;
pub const SR_PROFILE_GAUSSIAN: u32 = 3;

pub const SR_MATCHING_EXACT: u32 = 0;
pub const SR_MATCHING_GREEDY: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    EmptyInput = 4,
    CapExceeded = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque point set handle.
pub struct SrPointSet {
    inner: PointSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::ColoringSize { .. } | Error::WeightLength { .. } => {
            SrStatus::DimensionMismatch
        }
        Error::EmptyPointSet | Error::EmptyNet | Error::TooFewPoints(_) => SrStatus::EmptyInput,
        Error::ExactCapExceeded { .. } => SrStatus::CapExceeded,
        Error::UnsupportedDimension { .. } => SrStatus::Unsupported,
        Error::Parse { .. } | Error::Io(_) => SrStatus::Io,
        _ => SrStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), SrStatus>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SrStatus::Panic
        }
    }
}

fn fail(e: Error) -> SrStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> SrStatus {
    set_error(format!("null pointer: {what}"));
    SrStatus::NullPointer
}

fn profile(code: u32) -> Result<KernelProfile, SrStatus> {
    let kind = match code {
        SR_PROFILE_BALL => KernelKind::Ball,
        SR_PROFILE_TRIANGLE => KernelKind::Triangle,
        SR_PROFILE_EPANECHNIKOV => KernelKind::Epanechnikov,
        SR_PROFILE_GAUSSIAN => KernelKind::Gaussian,
        other => return Err(fail(Error::param("profile", format!("unknown profile code {other}")))),
    };
    Ok(KernelProfile::new(kind))
}

/// # Safety
/// `ptr` must be null or a live handle from this library.
unsafe fn handle<'a>(ptr: *const SrPointSet, what: &str) -> Result<&'a PointSet, SrStatus> {
    ptr.as_ref().map(|p| &p.inner).ok_or_else(|| null(what))
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], SrStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn out_handle(out: *mut *mut SrPointSet, p: PointSet) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(SrPointSet { inner: p })) };
}

/// Creates a point set from `n * dim` row-major coordinates and optional
/// per-point weights (`weights` may be null).
///
/// # Safety
/// `coords` must hold `n * dim` doubles, `weights` null or `n` doubles, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_pointset_new(
    dim: usize,
    coords: *const f64,
    n: usize,
    weights: *const f64,
    out: *mut *mut SrPointSet,
) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(dim).ok_or_else(|| fail(Error::param("n", "n * dim overflows")))?;
        let c = slice(coords, len, "coords")?.to_vec();
        let mut p = PointSet::from_flat(dim, c).map_err(fail)?;
        if !weights.is_null() {
            p = p.with_weights(slice(weights, n, "weights")?.to_vec()).map_err(fail)?;
        }
        out_handle(out, p);
        Ok(())
    })
}

/// # Safety
/// `points` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_pointset_free(points: *mut SrPointSet) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_pointset_len(points: *const SrPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.inner.len())
}

/// Dimension; 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_pointset_dim(points: *const SrPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.inner.dim())
}

/// Copies the row-major coordinates into `out`, which holds `capacity` doubles.
///
/// # Safety
/// `points` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sr_pointset_coords(points: *const SrPointSet, out: *mut f64, capacity: usize) -> SrStatus {
    guard(|| {
        let p = handle(points, "points")?;
        let c = p.coords();
        if capacity < c.len() {
            return Err(fail(Error::param("capacity", format!("need {} doubles, got {capacity}", c.len()))));
        }
        if !c.is_empty() {
            if out.is_null() {
                return Err(null("out"));
            }
            std::ptr::copy_nonoverlapping(c.as_ptr(), out, c.len());
        }
        Ok(())
    })
}

/// Smoothed density of the halfspace `{x : normal . x >= offset}` with
/// width `w`. `normal` holds `dim` doubles and must have unit length.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn sr_sde_halfspace(
    points: *const SrPointSet,
    normal: *const f64,
    offset: f64,
    w: f64,
    profile_code: u32,
    out: *mut f64,
) -> SrStatus {
    guard(|| {
        let p = handle(points, "points")?;
        let u = slice(normal, p.dim(), "normal")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let h = SmoothedRange::halfspace(u.to_vec(), offset, w, profile(profile_code)?).map_err(fail)?;
        *out = sde(p, &h).map_err(fail)?;
        Ok(())
    })
}

/// Kernel density of `points` at `x` (`dim` doubles).
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn sr_kde(
    points: *const SrPointSet,
    x: *const f64,
    w: f64,
    profile_code: u32,
    out: *mut f64,
) -> SrStatus {
    guard(|| {
        let p = handle(points, "points")?;
        let x = slice(x, p.dim(), "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = kde(p, x, w, profile(profile_code)?).map_err(fail)?;
        Ok(())
    })
}

/// MergeReduce to `target_size` points. `matching` is `SR_MATCHING_EXACT` or
/// `SR_MATCHING_GREEDY`. The result is a new handle owned by the caller.
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_merge_reduce(
    points: *const SrPointSet,
    target_size: usize,
    w: f64,
    matching: u32,
    seed: u64,
    out: *mut *mut SrPointSet,
) -> SrStatus {
    guard(|| {
        let p = handle(points, "points")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match matching {
            SR_MATCHING_EXACT => MatchingMode::Exact,
            SR_MATCHING_GREEDY => MatchingMode::Greedy,
            other => return Err(fail(Error::param("matching", format!("unknown matching code {other}")))),
        };
        let opts = MatchingOptions {
            mode,
            exact_cap: DEFAULT_EXACT_CAP,
        };
        let r = merge_reduce(p, SampleTarget::Size(target_size), w, &opts, seed).map_err(fail)?;
        out_handle(out, r.points);
        Ok(())
    })
}

/// Largest `|sde_P(h) - sde_Q(h)|` over the smoothed halfspaces of `n_dirs`
/// directions at the critical offsets of `p`.
///
/// # Safety
/// `p`, `q` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_eps_sample_error(
    p: *const SrPointSet,
    q: *const SrPointSet,
    w: f64,
    profile_code: u32,
    n_dirs: usize,
    out: *mut f64,
) -> SrStatus {
    guard(|| {
        let (p, q) = (handle(p, "p")?, handle(q, "q")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let net = build_evaluation_net(p, w, profile(profile_code)?, n_dirs, OffsetMode::CriticalOffsets).map_err(fail)?;
        *out = eps_sample_error(p, q, &net).map_err(fail)?.0;
        Ok(())
    })
}

/// Cluster complexity from farthest-point clustering with up to `k_max`
/// centers (0 selects `ceil(log2 n)`).
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_cluster_phi(points: *const SrPointSet, k_max: usize, out: *mut f64) -> SrStatus {
    guard(|| {
        let p = handle(points, "points")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let k = if k_max == 0 { default_k_max(p.len()) } else { k_max };
        *out = gonzalez_linf(p, k).map_err(fail)?.phi;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
