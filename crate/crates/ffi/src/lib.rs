//! C ABI over `multifix`.
//!
//! Mappings and point sets are passed as opaque handles created from JSON
//! and released with the matching `*_free` function. Every fallible call
//! returns an [`MfStatus`]; on failure `mf_last_error_message` describes the
//! most recent error on the calling thread. Strings returned through `out`
//! parameters are owned by the caller and must be released with
//! `mf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use multifix::certifier::{self, CertifyConfig};
use multifix::datadep::{self, ClassConstants, DataDepConfig};
use multifix::solver::{self, IterationConfig};
use multifix::{transform, Error, FiniteSet, MultiMap, Point};

/// Opaque mapping handle.
pub struct MfMap(MultiMap);

/// Opaque finite point set handle.
pub struct MfSet(FiniteSet);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    DimensionMismatch = 5,
    OutOfDomain = 6,
    BoundInapplicable = 7,
    EmptyFixedPointSet = 8,
    NotConverged = 9,
    Panic = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> MfStatus {
    match err {
        Error::IncompatibleDimensions { .. } => MfStatus::DimensionMismatch,
        Error::OutOfDomain(_) => MfStatus::OutOfDomain,
        Error::BoundInapplicable(_) | Error::GornickiPrecondition(_) => MfStatus::BoundInapplicable,
        Error::EmptyFixedPointSet(_) => MfStatus::EmptyFixedPointSet,
        Error::Json(_) | Error::InvalidMapping(_) => MfStatus::Parse,
        _ => MfStatus::InvalidArgument,
    }
}

struct Fail(MfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside multifix".into());
            MfStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(MfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn ref_of<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_of<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(MfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn point_of(coords: *const f64, dim: usize) -> Result<Point, Fail> {
    if coords.is_null() {
        return Err(null("point"));
    }
    Ok(Point::new(std::slice::from_raw_parts(coords, dim).to_vec())?)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a point set such as `[[0,0],[1,2]]`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_set_from_json(json: *const c_char, out: *mut *mut MfSet) -> MfStatus {
    guard(|| {
        let text = str_of(json, "json")?;
        let set: FiniteSet = serde_json::from_str(text).map_err(Error::from)?;
        write_out(out, Box::into_raw(Box::new(MfSet(set))))
    })
}

/// Builds a point set from `count` rows of `dim` coordinates stored
/// row-major in `data`.
///
/// # Safety
/// `data` must point to `count * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_set_from_rows(
    data: *const f64,
    count: usize,
    dim: usize,
    out: *mut *mut MfSet,
) -> MfStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len =
            count.checked_mul(dim).ok_or_else(|| Fail(MfStatus::InvalidArgument, "size overflow".into()))?;
        let flat = std::slice::from_raw_parts(data, len);
        let rows = flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect();
        let set = FiniteSet::from_rows(rows)?;
        write_out(out, Box::into_raw(Box::new(MfSet(set))))
    })
}

/// # Safety
/// `set` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_set_free(set: *mut MfSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of distinct points; 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_set_len(set: *const MfSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_set_dim(set: *const MfSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Parses a mapping document (`affine`, `singleton` or `tabulated`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_map_from_json(json: *const c_char, out: *mut *mut MfMap) -> MfStatus {
    guard(|| {
        let map = MultiMap::from_json(str_of(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(MfMap(map))))
    })
}

/// # Safety
/// `map` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mf_map_free(map: *mut MfMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_map_dim(map: *const MfMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.dim())
}

/// Hausdorff distance `H(A, B)`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_hausdorff(a: *const MfSet, b: *const MfSet, out: *mut f64) -> MfStatus {
    guard(|| {
        let h = multifix::hausdorff(&ref_of(a, "a")?.0, &ref_of(b, "b")?.0)?;
        write_out(out, h)
    })
}

/// `δ(A, B) = max ‖a − b‖` over all pairs.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_delta(a: *const MfSet, b: *const MfSet, out: *mut f64) -> MfStatus {
    guard(|| {
        let d = multifix::delta_distance(&ref_of(a, "a")?.0, &ref_of(b, "b")?.0)?;
        write_out(out, d)
    })
}

/// `d(x, Tx)`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_residual(
    map: *const MfMap,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let map = ref_of(map, "map")?;
        let r = map.0.residual(&point_of(x, dim)?)?;
        write_out(out, r)
    })
}

/// Evaluates `Tx` into a new set handle.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_map_evaluate(
    map: *const MfMap,
    x: *const f64,
    dim: usize,
    out: *mut *mut MfSet,
) -> MfStatus {
    guard(|| {
        let image = ref_of(map, "map")?.0.evaluate(&point_of(x, dim)?)?;
        write_out(out, Box::into_raw(Box::new(MfSet(image))))
    })
}

/// The averaged map `T_λ` as a new handle; `λ ∈ (0, 1]`.
///
/// # Safety
/// `map` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_map_averaged(map: *const MfMap, lambda: f64, out: *mut *mut MfMap) -> MfStatus {
    guard(|| {
        let avg = transform::averaged(&ref_of(map, "map")?.0, lambda)?;
        write_out(out, Box::into_raw(Box::new(MfMap(avg))))
    })
}

/// Certification report as pretty JSON.
///
/// # Safety
/// `map` must be live; `out` must be writable. Free the result with
/// `mf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mf_certify_json(
    map: *const MfMap,
    pairs_cap: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> MfStatus {
    guard(|| {
        let cfg = CertifyConfig { pairs_cap, seed, ..CertifyConfig::default() };
        let report = certifier::certify(&ref_of(map, "map")?.0, &cfg)?;
        let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        write_out(out, into_c_string(json))
    })
}

/// Krasnoselskii iteration from `x0`. Writes the last iterate to `out_x`
/// (`dim` doubles) and the step count to `out_steps`. Returns
/// `NotConverged` when the residual did not reach `eps`; the outputs are
/// still written.
///
/// # Safety
/// `x0` and `out_x` must point to `dim` doubles; `out_steps` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mf_krasnoselskii_solve(
    map: *const MfMap,
    lambda: f64,
    x0: *const f64,
    dim: usize,
    eps: f64,
    max_iter: usize,
    out_x: *mut f64,
    out_steps: *mut usize,
) -> MfStatus {
    guard(|| {
        let map = ref_of(map, "map")?;
        if out_x.is_null() {
            return Err(null("out_x"));
        }
        let cfg = IterationConfig { eps, max_iter, ..IterationConfig::default() };
        let trace = solver::krasnoselskii_iterate(&map.0, lambda, point_of(x0, dim)?, &cfg)?;
        let last = trace.last_point().coords();
        std::slice::from_raw_parts_mut(out_x, dim).copy_from_slice(last);
        write_out(out_steps, trace.steps())?;
        if trace.converged() {
            Ok(())
        } else {
            Err(Fail(
                MfStatus::NotConverged,
                format!("stopped after {} steps: {:?}", trace.steps(), trace.verdict),
            ))
        }
    })
}

/// Data-dependence report as pretty JSON. `constants_json` is a class
/// constants object such as `{"class":"enriched-kannan","b":1,"theta":0.3}`.
///
/// # Safety
/// Handles must be live; `constants_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_datadep_json(
    t: *const MfMap,
    s: *const MfMap,
    constants_json: *const c_char,
    out: *mut *mut c_char,
) -> MfStatus {
    guard(|| {
        let constants: ClassConstants =
            serde_json::from_str(str_of(constants_json, "constants_json")?).map_err(Error::from)?;
        let report = datadep::verify_data_dependence(
            &ref_of(t, "t")?.0,
            &ref_of(s, "s")?.0,
            constants,
            &DataDepConfig::default(),
        )?;
        let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        write_out(out, into_c_string(json))
    })
}
