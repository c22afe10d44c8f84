//! C interface. Channels live behind opaque `CmChannel` handles; every call
//! returns a `CmStatus` and writes results through out-pointers. On failure
//! `cm_last_error_message` describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chanmetric::channel_fidelity::{diamond_bounds_from_fidelity, fidelity};
use chanmetric::channel_fisher::MixturePath;
use chanmetric::channels::{self, KrausChannel};
use chanmetric::discrimination::{report, ReportOptions};
use chanmetric::document::{load_channel, ChannelDocument};
use chanmetric::matlin::{c, ComplexMatrix};
use chanmetric::oracles::diamond_norm;
use chanmetric::tensor_symmetry::fidelity_tensor_power;
use chanmetric::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    InvalidChannel = 3,
    InvalidArgument = 4,
    Cap = 5,
    Numeric = 6,
    Solver = 7,
    NotFound = 8,
    Io = 9,
    Json = 10,
    Utf8 = 11,
    Panic = 12,
}

/// Opaque channel handle. Free with `cm_channel_free`.
pub struct CmChannel(KrausChannel);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CmFidelity {
    pub fidelity: f64,
    pub angle: f64,
    pub bures: f64,
    /// Duality gap of the program.
    pub gap: f64,
}

/// Each bound is 0 when it could not be established.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CmBounds {
    pub lb_angle: u64,
    pub lb_parallel_fixed_w: u64,
    pub lb_parallel_per_n: u64,
    pub lb_path: u64,
    pub direct_min_n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CmStatus {
    match e {
        Error::Shape(_) => CmStatus::Shape,
        Error::InvalidChannel(_) => CmStatus::InvalidChannel,
        Error::InvalidArgument(_) => CmStatus::InvalidArgument,
        Error::Cap(_) => CmStatus::Cap,
        Error::Numeric(_) => CmStatus::Numeric,
        Error::Solver { .. } => CmStatus::Solver,
        Error::NotFound(_) => CmStatus::NotFound,
        Error::Io(_) => CmStatus::Io,
        Error::Json(_) => CmStatus::Json,
    }
}

enum Failure {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, turning errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CmStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string is not valid UTF-8".into());
            CmStatus::Utf8
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CmStatus::Panic
        }
    }
}

unsafe fn channel<'a>(p: *const CmChannel, what: &'static str) -> Result<&'a KrausChannel, Failure> {
    p.as_ref().map(|c| &c.0).ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

fn emit(k: KrausChannel, dst: &mut *mut CmChannel) {
    *dst = Box::into_raw(Box::new(CmChannel(k)));
}

/// Builds a channel from `n_kraus` operators of shape `dim_out x dim_in`,
/// stored one after another in row-major order as separate real and
/// imaginary arrays of length `n_kraus * dim_out * dim_in`.
///
/// # Safety
/// `re` and `im` must point to that many doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_from_kraus(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    re: *const f64,
    im: *const f64,
    out_channel: *mut *mut CmChannel,
) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        let per = dim_in
            .checked_mul(dim_out)
            .filter(|&p| p > 0 && n_kraus > 0)
            .ok_or_else(|| Error::Shape("empty or oversized Kraus operators".into()))?;
        let len = per
            .checked_mul(n_kraus)
            .filter(|&l| l <= channels::MAX_KRAUS * channels::MAX_DIM * channels::MAX_DIM)
            .ok_or_else(|| Error::Cap("Kraus data too large".into()))?;
        let (re, im) = (
            std::slice::from_raw_parts(re, len),
            std::slice::from_raw_parts(im, len),
        );
        let kraus = (0..n_kraus)
            .map(|k| {
                ComplexMatrix::from_fn(dim_out, dim_in, |i, j| {
                    let idx = k * per + i * dim_in + j;
                    c(re[idx], im[idx])
                })
            })
            .collect();
        emit(KrausChannel::new(kraus)?, dst);
        Ok(())
    })
}

/// Parses a channel JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_from_json(
    json: *const c_char,
    out_channel: *mut *mut CmChannel,
) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        let doc = ChannelDocument::parse(text(json, "json")?)?;
        emit(doc.to_channel()?, dst);
        Ok(())
    })
}

/// Reads a channel JSON document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_load(
    path: *const c_char,
    out_channel: *mut *mut CmChannel,
) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        emit(load_channel(Path::new(text(path, "path")?))?, dst);
        Ok(())
    })
}

/// Qubit rotation `exp(i theta X)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_rotation_x(
    theta: f64,
    out_channel: *mut *mut CmChannel,
) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("theta is not finite".into()).into());
        }
        emit(channels::rotation_x(theta), dst);
        Ok(())
    })
}

/// Qubit dephasing with coherence factor `eta` in `[0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_dephasing(
    eta: f64,
    out_channel: *mut *mut CmChannel,
) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        emit(channels::dephasing(eta)?, dst);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_identity(d: usize, out_channel: *mut *mut CmChannel) -> CmStatus {
    guard(|| {
        let dst = out(out_channel, "out_channel")?;
        emit(channels::identity(d)?, dst);
        Ok(())
    })
}

/// Serializes a channel as a JSON document. Release the string with
/// `cm_string_free`.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_to_json(
    ch: *const CmChannel,
    out_json: *mut *mut c_char,
) -> CmStatus {
    guard(|| {
        let k = channel(ch, "ch")?;
        let dst = out(out_json, "out_json")?;
        let s = ChannelDocument::from_channel(k).to_json();
        *dst = CString::new(s).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_dim_in(ch: *const CmChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.0.dim_in())
}

/// Output dimension, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_dim_out(ch: *const CmChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.0.dim_out())
}

/// Number of Kraus operators, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_kraus_count(ch: *const CmChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.0.kraus_count())
}

/// # Safety
/// `ch` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cm_channel_free(ch: *mut CmChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Channel fidelity with angle and Bures distance, solved to duality gap `tol`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_fidelity(
    a: *const CmChannel,
    b: *const CmChannel,
    tol: f64,
    out_fidelity: *mut CmFidelity,
) -> CmStatus {
    guard(|| {
        let (a, b) = (channel(a, "a")?, channel(b, "b")?);
        let dst = out(out_fidelity, "out_fidelity")?;
        let f = fidelity(a, b, tol)?;
        *dst = CmFidelity {
            fidelity: f.fidelity,
            angle: f.angle,
            bures: f.bures,
            gap: f.gap,
        };
        Ok(())
    })
}

/// Fidelity of the `n`-fold tensor powers.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_fidelity_power(
    a: *const CmChannel,
    b: *const CmChannel,
    n: usize,
    tol: f64,
    out_fidelity: *mut CmFidelity,
) -> CmStatus {
    guard(|| {
        let (a, b) = (channel(a, "a")?, channel(b, "b")?);
        let dst = out(out_fidelity, "out_fidelity")?;
        let f = fidelity_tensor_power(a, b, n, tol)?;
        *dst = CmFidelity {
            fidelity: f.fidelity,
            angle: f.angle,
            bures: f.bures,
            gap: f.gap,
        };
        Ok(())
    })
}

/// Interval `[2(1-F), 2 sqrt(1-F^2)]` holding the diamond norm of `a - b`.
///
/// # Safety
/// `a` and `b` must be live handles; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_diamond_bounds(
    a: *const CmChannel,
    b: *const CmChannel,
    tol: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> CmStatus {
    guard(|| {
        let (a, b) = (channel(a, "a")?, channel(b, "b")?);
        let (lo, hi) = (out(lower, "lower")?, out(upper, "upper")?);
        let db = diamond_bounds_from_fidelity(fidelity(a, b, tol)?.fidelity);
        *lo = db.lower;
        *hi = db.upper;
        Ok(())
    })
}

/// Diamond norm of `a - b` by its own program.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_diamond_norm(
    a: *const CmChannel,
    b: *const CmChannel,
    tol: f64,
    out_norm: *mut f64,
) -> CmStatus {
    guard(|| {
        let (a, b) = (channel(a, "a")?, channel(b, "b")?);
        let dst = out(out_norm, "out_norm")?;
        *dst = diamond_norm(a, b, tol)?;
        Ok(())
    })
}

/// Lower bounds on the uses needed to discriminate `a` from `b`, and the
/// direct answer searched up to `max_n`. With `mixture_path` the path bound
/// runs along `(1 - x) a + x b`; otherwise `lb_path` is 0.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_discrimination_bounds(
    a: *const CmChannel,
    b: *const CmChannel,
    max_n: u64,
    tol: f64,
    mixture_path: bool,
    out_bounds: *mut CmBounds,
) -> CmStatus {
    guard(|| {
        let (a, b) = (channel(a, "a")?, channel(b, "b")?);
        let dst = out(out_bounds, "out_bounds")?;
        let opts = ReportOptions {
            sdp_tol: tol,
            max_n,
            path: chanmetric::channel_fisher::PathOptions {
                sdp_tol: tol,
                ..Default::default()
            },
            ..ReportOptions::default()
        };
        let family = if mixture_path {
            Some(MixturePath::new(a.clone(), b.clone())?)
        } else {
            None
        };
        let r = report(
            a,
            b,
            family.as_ref().map(|f| f as &dyn chanmetric::channel_fisher::ChannelFamily),
            &opts,
        )?;
        *dst = CmBounds {
            lb_angle: r.lb_angle.unwrap_or(0),
            lb_parallel_fixed_w: r.lb_parallel_fixed_w.unwrap_or(0),
            lb_parallel_per_n: r.lb_parallel_per_n.unwrap_or(0),
            lb_path: r.lb_path.unwrap_or(0),
            direct_min_n: r.direct_min_n.unwrap_or(0),
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn cm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
