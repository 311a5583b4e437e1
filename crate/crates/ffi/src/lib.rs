//! C interface to `hormander`.
//!
//! Every function returns an [`HmStatus`] and writes results through out
//! pointers. Parameters and grids are opaque handles owned by the caller
//! and released with [`hm_param_free`] / [`hm_grid_free`]. After a non-`Ok`
//! status, [`hm_last_error`] returns a message for the calling thread.
//! Panics never cross the boundary; they surface as `HmStatus_Panic`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hormander::grid::{self, io as grid_io, GridDistribution, GridShape};
use hormander::param::{self, IndexConfig, PseudoconcavityConfig, RoConfig};
use hormander::{spectral, xlab, Error, ParamExpr};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Evaluation = 4,
    Precondition = 5,
    Numerical = 6,
    NonConvergence = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque parameter expression.
pub struct HmParam(ParamExpr);

/// Opaque grid distribution.
pub struct HmGrid(GridDistribution);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmIndices {
    pub sigma0: f64,
    pub sigma1: f64,
    pub bracket: f64,
    pub lower_attained: bool,
    pub upper_attained: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmRoCertificate {
    pub is_member: bool,
    pub s0: f64,
    pub s1: f64,
    pub log_c: f64,
    pub indices: HmIndices,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmPseudoconcavity {
    pub passes: bool,
    pub log_c_best: f64,
    /// `log t` and `log tau` of the worst pair.
    pub worst_log_t: f64,
    pub worst_log_tau: f64,
    pub points: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> HmStatus {
    match e {
        Error::InvalidInput(_) | Error::Json(_) => HmStatus::InvalidInput,
        Error::Domain(_) => HmStatus::Domain,
        Error::Evaluation { .. } => HmStatus::Evaluation,
        Error::Precondition(_) => HmStatus::Precondition,
        Error::Numerical { .. } => HmStatus::Numerical,
        Error::NonConvergence { .. } => HmStatus::NonConvergence,
        Error::Io(_) => HmStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            HmStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            HmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            HmStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

/// Message for the last failing call on this thread; empty after success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn hm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON parameter expression.
#[no_mangle]
pub unsafe extern "C" fn hm_param_from_json(json: *const c_char, out: *mut *mut HmParam) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Error::InvalidInput("expression is not UTF-8".into()))?;
        let p = ParamExpr::from_json(text)?;
        put(out, Box::into_raw(Box::new(HmParam(p))), "out")
    })
}

/// Serializes a parameter to JSON; release the string with
/// [`hm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hm_param_to_json(param: *const HmParam, out: *mut *mut c_char) -> HmStatus {
    guard(|| {
        let p = get(param, "param")?;
        let s = CString::new(p.0.to_json()).map_err(|_| Error::InvalidInput("interior NUL".into()))?;
        put(out, s.into_raw(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn hm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hm_param_free(param: *mut HmParam) {
    if !param.is_null() {
        drop(Box::from_raw(param));
    }
}

/// `phi(t)`.
#[no_mangle]
pub unsafe extern "C" fn hm_param_eval(param: *const HmParam, t: f64, out: *mut f64) -> HmStatus {
    guard(|| {
        let v = get(param, "param")?.0.eval(t)?;
        put(out, v, "out")
    })
}

/// `log phi(e^x)`.
#[no_mangle]
pub unsafe extern "C" fn hm_param_log_eval(param: *const HmParam, x: f64, out: *mut f64) -> HmStatus {
    guard(|| {
        let v = get(param, "param")?.0.log_eval(x)?;
        put(out, v, "out")
    })
}

/// `psi(tau) = tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)})` as a new handle.
#[no_mangle]
pub unsafe extern "C" fn hm_psi_from_phi(phi: *const HmParam, s0: f64, s1: f64, out: *mut *mut HmParam) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let psi = param::psi_from_phi(&get(phi, "phi")?.0, s0, s1)?;
        put(out, Box::into_raw(Box::new(HmParam(psi))), "out")
    })
}

/// `phi(t) = t^{s0} psi(t^{s1-s0})` as a new handle.
#[no_mangle]
pub unsafe extern "C" fn hm_phi_from_psi(psi: *const HmParam, s0: f64, s1: f64, out: *mut *mut HmParam) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let phi = param::phi_from_psi(&get(psi, "psi")?.0, s0, s1)?;
        put(out, Box::into_raw(Box::new(HmParam(phi))), "out")
    })
}

fn indices_of(e: &param::IndexEstimate) -> HmIndices {
    HmIndices {
        sigma0: e.sigma0,
        sigma1: e.sigma1,
        bracket: e.bracket,
        lower_attained: e.lower_attained,
        upper_attained: e.upper_attained,
    }
}

#[no_mangle]
pub unsafe extern "C" fn hm_matuszewska_indices(phi: *const HmParam, log_t_max: f64, out: *mut HmIndices) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = param::matuszewska_indices(&get(phi, "phi")?.0, log_t_max, &IndexConfig::default())?;
        put(out, indices_of(&e), "out")
    })
}

/// RO certificate on `samples` log-spaced points of `[1, e^{log_t_max}]`
/// with constants capped at `cap`.
#[no_mangle]
pub unsafe extern "C" fn hm_ro_membership(
    phi: *const HmParam,
    log_t_max: f64,
    samples: usize,
    cap: f64,
    out: *mut HmRoCertificate,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg = RoConfig {
            cap,
            index: IndexConfig {
                cap,
                ..IndexConfig::default()
            },
            ..RoConfig::default()
        };
        let r = param::ro_membership(&get(phi, "phi")?.0, log_t_max, samples, &cfg)?;
        put(
            out,
            HmRoCertificate {
                is_member: r.is_member,
                s0: r.s0,
                s1: r.s1,
                log_c: r.log_c,
                indices: indices_of(&r.indices),
            },
            "out",
        )
    })
}

/// Peetre test of `psi` on `(r, e^{log_t_max}]` with `density` points per
/// decade.
#[no_mangle]
pub unsafe extern "C" fn hm_pseudoconcavity_test(
    psi: *const HmParam,
    r: f64,
    log_t_max: f64,
    density: f64,
    cap: f64,
    out: *mut HmPseudoconcavity,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg = PseudoconcavityConfig {
            density,
            cap,
            extra_log_points: Vec::new(),
        };
        let rep = param::pseudoconcavity_test(&get(psi, "psi")?.0, r, log_t_max, &cfg)?;
        put(
            out,
            HmPseudoconcavity {
                passes: rep.passes,
                log_c_best: rep.log_c_best,
                worst_log_t: rep.worst_pair[0],
                worst_log_tau: rep.worst_pair[1],
                points: rep.points,
            },
            "out",
        )
    })
}

/// Reads a distribution in the binary layout used by the command line.
#[no_mangle]
pub unsafe extern "C" fn hm_grid_from_binary(bytes: *const u8, len: usize, out: *mut *mut HmGrid) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        if bytes.is_null() {
            return Err(Failure::Null("bytes"));
        }
        let u = grid_io::distribution_from_bytes(std::slice::from_raw_parts(bytes, len))?;
        put(out, Box::into_raw(Box::new(HmGrid(u))), "out")
    })
}

/// Random samples on an `n`-dimensional grid with `points` points and
/// box length `box_length` per axis.
#[no_mangle]
pub unsafe extern "C" fn hm_grid_random(
    n: usize,
    points: usize,
    box_length: f64,
    seed: u64,
    out: *mut *mut HmGrid,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidInput(format!("grid dimension must be 1, 2 or 3, got {n}")).into());
        }
        let shape = GridShape::new(vec![points; n], vec![box_length; n])?;
        let u = GridDistribution::random(shape, seed)?;
        put(out, Box::into_raw(Box::new(HmGrid(u))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn hm_grid_free(grid: *mut HmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Spatial Riemann-sum norm of the samples.
#[no_mangle]
pub unsafe extern "C" fn hm_grid_l2_norm(grid: *const HmGrid, out: *mut f64) -> HmStatus {
    guard(|| {
        let v = get(grid, "grid")?.0.l2_box_norm();
        put(out, v, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn hm_hormander_norm(grid: *const HmGrid, phi: *const HmParam, out: *mut f64) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let v = grid::hormander_norm(&get(grid, "grid")?.0, &get(phi, "phi")?.0)?;
        put(out, v, "out")
    })
}

/// Quotient norm over a mask given in the binary layout used by the
/// command line.
#[no_mangle]
pub unsafe extern "C" fn hm_quotient_norm(
    grid: *const HmGrid,
    mask_bytes: *const u8,
    mask_len: usize,
    phi: *const HmParam,
    out: *mut f64,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let u = &get(grid, "grid")?.0;
        if mask_bytes.is_null() {
            return Err(Failure::Null("mask_bytes"));
        }
        let mask = grid_io::mask_from_bytes(std::slice::from_raw_parts(mask_bytes, mask_len))?;
        let v = grid::quotient_norm(&mask.restrict(u)?, &mask, &get(phi, "phi")?.0)?;
        put(out, v, "out")
    })
}

/// Relative gap between the grid norm and the interpolation norm between
/// `H^(s0)` and `H^(s1)`.
#[no_mangle]
pub unsafe extern "C" fn hm_norm_identity_check(
    grid: *const HmGrid,
    phi: *const HmParam,
    s0: f64,
    s1: f64,
    out: *mut f64,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let v = spectral::norm_identity_check(&get(grid, "grid")?.0, &get(phi, "phi")?.0, s0, s1)?;
        put(out, v, "out")
    })
}

/// `log(npsi / max(n0, n1))` for the rank-one map between spectral points
/// `e^{log_src}` and `e^{log_dst}`.
#[no_mangle]
pub unsafe extern "C" fn hm_rank_one_witness(
    psi: *const HmParam,
    log_src: f64,
    log_dst: f64,
    out: *mut f64,
) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        let v = spectral::rank_one_witness(&get(psi, "psi")?.0, log_src, log_dst)?;
        put(out, v, "out")
    })
}

/// `log phi(e^x)` for the oscillating slowly varying parameter.
#[no_mangle]
pub unsafe extern "C" fn hm_appendix_log_phi(x: f64, out: *mut f64) -> HmStatus {
    guard(|| {
        check_out(out, "out")?;
        put(out, xlab::appendix_log_phi(x)?, "out")
    })
}

/// Closed-form lower bound for `log(phi(t_k)/phi(s_k))` and the value
/// observed by direct evaluation.
#[no_mangle]
pub unsafe extern "C" fn hm_ratio_log_lower_bound(k: u32, bound: *mut f64, observed: *mut f64) -> HmStatus {
    guard(|| {
        check_out(bound, "bound")?;
        check_out(observed, "observed")?;
        let b = xlab::ratio_log_lower_bound(k)?;
        put(bound, b.bound, "bound")?;
        put(observed, b.observed, "observed")
    })
}
