//! C ABI for the finsler engine.
//!
//! Metrics and computed tensor bundles are opaque handles. Every fallible call
//! returns a [`FinslerStatus`]; on failure the message is available from
//! [`finsler_last_error`] on the same thread. Tensors are copied out row-major
//! with every index running over `0..dim` (see `finsler_bundle_tensor`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finsler::dsl::{parse_metric, MetricSpec, PointState};
use finsler::geometry::{compute, Convention, GeometryBundle, TensorKind};
use finsler::jet::Orders;
use finsler::nullity::{bracket_vertical, subspace, CurvatureKind, Mode};
use finsler::FinslerError;

/// Status codes. Values 2 to 5 match the exit codes of the `finsler` CLI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinslerStatus {
    Ok = 0,
    /// Parse error, unknown name or otherwise invalid argument.
    InvalidArgument = 2,
    /// Point outside the metric's domain.
    Domain = 3,
    /// Singular or ill-conditioned fundamental tensor.
    Degenerate = 4,
    /// Jet orders too low for the requested tensors.
    InsufficientOrders = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    /// Internal error; the handle arguments are left untouched.
    Panic = 8,
}

/// A parsed metric.
pub struct FinslerMetric(MetricSpec);

/// All tensors of a metric at one point.
pub struct FinslerBundle(GeometryBundle);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &FinslerError) -> FinslerStatus {
    match e {
        FinslerError::Parse(_) | FinslerError::InvalidArgument(_) | FinslerError::Io(_) => {
            FinslerStatus::InvalidArgument
        }
        FinslerError::Domain(_) => FinslerStatus::Domain,
        FinslerError::Degenerate(_) => FinslerStatus::Degenerate,
        FinslerError::InsufficientOrders { .. } => FinslerStatus::InsufficientOrders,
    }
}

enum Fail {
    Status(FinslerStatus, String),
    Lib(FinslerError),
}

impl From<FinslerError> for Fail {
    fn from(e: FinslerError) -> Self {
        Fail::Lib(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(FinslerStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FinslerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FinslerStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal error");
            FinslerStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Fail::Status(
            FinslerStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn tensor_kind(name: &str) -> Result<TensorKind, Fail> {
    Ok(name.parse::<TensorKind>()?)
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn finsler_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses metric source text (the `.metric` file format).
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_parse(
    source: *const c_char,
    out: *mut *mut FinslerMetric,
) -> FinslerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(source, "source")?;
        let spec = parse_metric(text).map_err(FinslerError::from)?;
        *out = Box::into_raw(Box::new(FinslerMetric(spec)));
        Ok(())
    })
}

/// Looks up a built-in metric (`euclid<n>`, `riem-hyperbolic`, `ex1`, `ex2`, `ex3`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_builtin(
    name: *const c_char,
    out: *mut *mut FinslerMetric,
) -> FinslerStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let spec = finsler::builtins::builtin(name).ok_or_else(|| {
            Fail::Status(
                FinslerStatus::InvalidArgument,
                format!("no built-in metric named `{name}`"),
            )
        })?;
        *out = Box::into_raw(Box::new(FinslerMetric(spec)));
        Ok(())
    })
}

/// Manifold dimension, or 0 for a null handle.
///
/// # Safety
/// `metric` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_dim(metric: *const FinslerMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.0.dim)
}

/// # Safety
/// `metric` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_free(metric: *mut FinslerMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Energy `E = F²` at `(x, y)`; both arrays hold `dim` values.
///
/// # Safety
/// `metric` must be a live handle, `x` and `y` readable for `dim` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_eval_energy(
    metric: *const FinslerMetric,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let m = &ref_arg(metric, "metric")?.0;
        let out = out_arg(out, "out")?;
        let (x, y) = (slice_arg(x, m.dim, "x")?, slice_arg(y, m.dim, "y")?);
        *out = m.energy_at(x, y).map_err(FinslerError::from)?;
        Ok(())
    })
}

/// Computes every tensor at `(x, y)` with jet orders `(dx, dy)`; `(0, 0)`
/// selects the default orders.
///
/// # Safety
/// `metric` must be a live handle, `x` and `y` readable for `dim` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_compute(
    metric: *const FinslerMetric,
    x: *const f64,
    y: *const f64,
    dx: u32,
    dy: u32,
    out: *mut *mut FinslerBundle,
) -> FinslerStatus {
    guard(|| {
        let m = &ref_arg(metric, "metric")?.0;
        let out = out_arg(out, "out")?;
        let p = PointState::new(
            slice_arg(x, m.dim, "x")?.to_vec(),
            slice_arg(y, m.dim, "y")?.to_vec(),
        );
        let orders = if (dx, dy) == (0, 0) {
            Orders::default()
        } else {
            Orders::new(dx as usize, dy as usize)
        };
        let b = compute(m, &p, orders, &TensorKind::ALL, Convention::default())?;
        *out = Box::into_raw(Box::new(FinslerBundle(b)));
        Ok(())
    })
}

/// # Safety
/// `bundle` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_free(bundle: *mut FinslerBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Energy at the bundle's point.
///
/// # Safety
/// `bundle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_energy(
    bundle: *const FinslerBundle,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let b = &ref_arg(bundle, "bundle")?.0;
        *out_arg(out, "out")? = b.energy;
        Ok(())
    })
}

/// Rank and element count (`dim^rank`) of a tensor such as `"chern-h"`.
///
/// # Safety
/// `bundle` must be a live handle, `name` NUL-terminated, `rank` and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_tensor_len(
    bundle: *const FinslerBundle,
    name: *const c_char,
    rank: *mut usize,
    len: *mut usize,
) -> FinslerStatus {
    guard(|| {
        let b = &ref_arg(bundle, "bundle")?.0;
        let t = b.tensor(tensor_kind(str_arg(name, "name")?)?)?;
        *out_arg(rank, "rank")? = t.rank();
        *out_arg(len, "len")? = t.data().len();
        Ok(())
    })
}

/// Copies a tensor into `buf`, row-major, so component `T[i][j][k]` of a
/// rank-3 tensor sits at `(i*dim + j)*dim + k`.
///
/// # Safety
/// `bundle` must be a live handle, `name` NUL-terminated, `buf` writable for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn finsler_bundle_tensor(
    bundle: *const FinslerBundle,
    name: *const c_char,
    buf: *mut f64,
    cap: usize,
) -> FinslerStatus {
    guard(|| {
        let b = &ref_arg(bundle, "bundle")?.0;
        let t = b.tensor(tensor_kind(str_arg(name, "name")?)?)?;
        let data = t.data();
        if cap < data.len() {
            return Err(Fail::Status(
                FinslerStatus::BufferTooSmall,
                format!("buffer holds {cap} values, tensor has {}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Nullity (`kernel == 0`) or kernel (`kernel != 0`) space of a curvature
/// tensor (`chern-h`, `chern-hv`, `barthel`, `cartan-h`). Writes the dimension
/// to `mu` and an orthonormal basis to `basis`, one vector of `dim` values
/// after another.
///
/// # Safety
/// `bundle` must be a live handle, `name` NUL-terminated, `basis` writable for
/// `dim * dim` values and `mu` writable.
#[no_mangle]
pub unsafe extern "C" fn finsler_nullity(
    bundle: *const FinslerBundle,
    name: *const c_char,
    kernel: i32,
    rank_tol: f64,
    basis: *mut f64,
    mu: *mut usize,
) -> FinslerStatus {
    guard(|| {
        let b = &ref_arg(bundle, "bundle")?.0;
        let kind: CurvatureKind = str_arg(name, "name")?.parse()?;
        let mode = if kernel == 0 {
            Mode::Nullity
        } else {
            Mode::Kernel
        };
        let s = subspace(b, kind, mode, rank_tol)?;
        let mu = out_arg(mu, "mu")?;
        if basis.is_null() {
            return Err(null("basis"));
        }
        let n = b.dim();
        for (r, v) in s.basis.iter().enumerate() {
            ptr::copy_nonoverlapping(v.as_ptr(), basis.add(r * n), n);
        }
        *mu = s.rank;
        Ok(())
    })
}

/// Vertical part of the bracket of the horizontal lifts of `a` and `b`.
///
/// # Safety
/// `bundle` must be a live handle; `a`, `b` readable and `out` writable for `dim` values.
#[no_mangle]
pub unsafe extern "C" fn finsler_bracket_vertical(
    bundle: *const FinslerBundle,
    a: *const f64,
    b: *const f64,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let bundle = &ref_arg(bundle, "bundle")?.0;
        let n = bundle.dim();
        let v = bracket_vertical(bundle, slice_arg(a, n, "a")?, slice_arg(b, n, "b")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, n);
        Ok(())
    })
}
