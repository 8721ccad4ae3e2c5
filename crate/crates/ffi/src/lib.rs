//! C ABI over `dtqw-zak`.
//!
//! Every function returns a [`DtqwStatus`]; results go through out-pointers.
//! On failure [`dtqw_last_error`] holds a message for the calling thread.
//! Landscapes and walks are opaque handles created by `*_new` and released
//! with the matching `*_free`. Panics never cross the boundary; they are
//! reported as `DTQW_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dtqw_zak::coin::CoinState;
use dtqw_zak::landscape::{zak_landscape, ZakLandscape};
use dtqw_zak::walk::{evolve, LineState, PlaneState, WalkState};
use dtqw_zak::zak::{zak_quadrature, zak_wilson_loop, WilsonOptions, ZakResult};
use dtqw_zak::{bands, symmetry, Error, Protocol, ProtocolParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtqwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Gap closure on the requested point or path.
    Singular = 3,
    NoConvergence = 4,
    /// `tan θ1` vanishes.
    DegenerateTheta1 = 5,
    /// The operation needs split-step parameters.
    WrongVariant = 6,
    AmbiguousBinning = 7,
    VanishingOverlap = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtqwProtocol {
    Hqw = 0,
    Ncrqw = 1,
    Ssqw = 2,
}

/// Protocol and angles in radians: `(θ)` for HQW, `(θ, φ)` for NCRQW and
/// `(θ1, θ2)` for SSQW. `angle2` is ignored for HQW.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtqwParams {
    pub protocol: DtqwProtocol,
    pub angle1: f64,
    pub angle2: f64,
}

/// Zak phases in radians. Band-resolved values are only meaningful when
/// the matching `has_*` flag is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DtqwZak {
    pub z_plus: f64,
    pub z_minus: f64,
    pub z_total: f64,
    pub raw_total: f64,
    pub has_plus: bool,
    pub has_minus: bool,
    pub n_k: usize,
}

/// Opaque Zak landscape.
pub struct DtqwLandscape(ZakLandscape);

/// Opaque walk state with its parameters.
pub struct DtqwWalk {
    state: WalkState,
    params_x: ProtocolParams,
    params_y: Option<ProtocolParams>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DtqwStatus {
    match e {
        Error::SingularPoint { .. } | Error::SingularPath { .. } | Error::UndefinedArgument { .. } => {
            DtqwStatus::Singular
        }
        Error::NoConvergence { .. } => DtqwStatus::NoConvergence,
        Error::DivisionByZero | Error::DegenerateTheta1(_) => DtqwStatus::DegenerateTheta1,
        Error::WrongVariant(_) => DtqwStatus::WrongVariant,
        Error::AmbiguousBinning(_) => DtqwStatus::AmbiguousBinning,
        Error::VanishingOverlap(_) => DtqwStatus::VanishingOverlap,
        Error::InvalidArgument(_) => DtqwStatus::InvalidArgument,
        Error::Internal(_) => DtqwStatus::Internal,
    }
}

fn fail(status: DtqwStatus, msg: impl Into<String>) -> DtqwStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), DtqwStatus>>(f: F) -> DtqwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DtqwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DtqwStatus::Panic, "panic inside dtqw-zak"),
    }
}

fn lib<T>(r: dtqw_zak::Result<T>) -> Result<T, DtqwStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn read<'a, T>(p: *const T) -> Result<&'a T, DtqwStatus> {
    p.as_ref().ok_or_else(|| fail(DtqwStatus::NullPointer, "null pointer argument"))
}

unsafe fn write<T>(p: *mut T, v: T) -> Result<(), DtqwStatus> {
    if p.is_null() {
        return Err(fail(DtqwStatus::NullPointer, "null output pointer"));
    }
    p.write(v);
    Ok(())
}

fn protocol_of(p: DtqwProtocol) -> Protocol {
    match p {
        DtqwProtocol::Hqw => Protocol::Hqw,
        DtqwProtocol::Ncrqw => Protocol::Ncrqw,
        DtqwProtocol::Ssqw => Protocol::Ssqw,
    }
}

fn params_of(p: &DtqwParams) -> Result<ProtocolParams, DtqwStatus> {
    if !p.angle1.is_finite() || !p.angle2.is_finite() {
        return Err(fail(DtqwStatus::InvalidArgument, "angles must be finite"));
    }
    Ok(ProtocolParams::from_pair(protocol_of(p.protocol), p.angle1, p.angle2))
}

fn zak_out(r: &ZakResult) -> DtqwZak {
    DtqwZak {
        z_plus: r.z_plus.unwrap_or(0.0),
        z_minus: r.z_minus.unwrap_or(0.0),
        z_total: r.z_total.unwrap_or(0.0),
        raw_total: r.raw_total.unwrap_or(0.0),
        has_plus: r.z_plus.is_some(),
        has_minus: r.z_minus.is_some(),
        n_k: r.n_k,
    }
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dtqw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Quasi-energy `E(k)` in `[0, π]`.
///
/// # Safety
/// `params` must be null or valid; `out_energy` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_dispersion(params: *const DtqwParams, k: f64, out_energy: *mut f64) -> DtqwStatus {
    guard(|| {
        let p = params_of(read(params)?)?;
        write(out_energy, lib(bands::dispersion(&p, k))?)
    })
}

/// Unit norm vector `n(k)` into `out[0..3]`.
///
/// # Safety
/// `params` must be null or valid; `out` must be null or point to three
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dtqw_norm_vector(params: *const DtqwParams, k: f64, out: *mut f64) -> DtqwStatus {
    guard(|| {
        let p = params_of(read(params)?)?;
        let n = lib(bands::norm_vector(&p, k))?;
        if out.is_null() {
            return Err(fail(DtqwStatus::NullPointer, "null output pointer"));
        }
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&n.as_array());
        Ok(())
    })
}

/// Smallest `sin E` over the Brillouin zone; zero means gapless.
///
/// # Safety
/// `params` must be null or valid; `out_gap` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_min_gap(params: *const DtqwParams, out_gap: *mut f64) -> DtqwStatus {
    guard(|| {
        let p = params_of(read(params)?)?;
        write(out_gap, bands::min_gap(&p))
    })
}

/// Wilson-loop Zak phase on `[k_start, k_end]`, starting from `n_k` grid
/// intervals (at least 16) and refining by doubling.
///
/// # Safety
/// `params` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_zak_wilson(
    params: *const DtqwParams,
    k_start: f64,
    k_end: f64,
    n_k: usize,
    flip_argument: bool,
    out: *mut DtqwZak,
) -> DtqwStatus {
    guard(|| {
        let p = params_of(read(params)?)?;
        let opts = WilsonOptions { n_k, flip_argument, ..Default::default() };
        let r = lib(zak_wilson_loop(&p, (k_start, k_end), opts))?;
        write(out, zak_out(&r))
    })
}

/// Zak phases from quadrature of the closed-form connection integrand.
///
/// # Safety
/// `params` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_zak_quadrature(
    params: *const DtqwParams,
    k_start: f64,
    k_end: f64,
    n_k: usize,
    out: *mut DtqwZak,
) -> DtqwStatus {
    guard(|| {
        let p = params_of(read(params)?)?;
        let r = lib(zak_quadrature(&p, (k_start, k_end), n_k))?;
        write(out, zak_out(&r))
    })
}

/// `tan θ2 / tan θ1 > cos k`, strict.
///
/// # Safety
/// `out_allowed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_trs_allowed(theta1: f64, theta2: f64, k: f64, out_allowed: *mut bool) -> DtqwStatus {
    guard(|| write(out_allowed, lib(symmetry::trs_allowed(theta1, theta2, k))?))
}

unsafe fn axis<'a>(p: *const f64, n: usize) -> Result<&'a [f64], DtqwStatus> {
    if p.is_null() {
        return Err(fail(DtqwStatus::NullPointer, "null axis pointer"));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Zak landscape over `param1 × param2` (pass `param2 = NULL` for HQW).
///
/// # Safety
/// Axis pointers must reference `n1` / `n2` readable doubles; `out` must be
/// null or writable. Release the handle with [`dtqw_landscape_free`].
#[no_mangle]
pub unsafe extern "C" fn dtqw_landscape_new(
    protocol: DtqwProtocol,
    param1: *const f64,
    n1: usize,
    param2: *const f64,
    n2: usize,
    flip_y: bool,
    out: *mut *mut DtqwLandscape,
) -> DtqwStatus {
    guard(|| {
        let a1 = axis(param1, n1)?;
        let a2 = if param2.is_null() { None } else { Some(axis(param2, n2)?) };
        let land = lib(zak_landscape(protocol_of(protocol), a1, a2, flip_y, WilsonOptions::default()))?;
        write(out, Box::into_raw(Box::new(DtqwLandscape(land))))
    })
}

/// Grid shape of a landscape.
///
/// # Safety
/// `land` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_landscape_shape(
    land: *const DtqwLandscape,
    rows: *mut usize,
    cols: *mut usize,
) -> DtqwStatus {
    guard(|| {
        let l = &read(land)?.0;
        write(rows, l.rows())?;
        write(cols, l.cols())
    })
}

/// Cell `(i, j)`: `defined` is false on gapless cells, and `zx`, `zy` are
/// then left untouched.
///
/// # Safety
/// `land` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_landscape_get(
    land: *const DtqwLandscape,
    i: usize,
    j: usize,
    zx: *mut f64,
    zy: *mut f64,
    defined: *mut bool,
) -> DtqwStatus {
    guard(|| {
        let l = &read(land)?.0;
        if i >= l.rows() || j >= l.cols() {
            return Err(fail(DtqwStatus::InvalidArgument, format!("cell ({i}, {j}) out of range")));
        }
        let c = l.cell(i, j);
        match (c.zx, c.zy) {
            (Some(x), Some(y)) => {
                write(zx, x)?;
                write(zy, y)?;
                write(defined, true)
            }
            _ => write(defined, false),
        }
    })
}

/// # Safety
/// `land` must be null or a handle from [`dtqw_landscape_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn dtqw_landscape_free(land: *mut DtqwLandscape) {
    if !land.is_null() {
        drop(Box::from_raw(land));
    }
}

/// Walker at the origin with coin `H` (`H ⊗ H` in 2D). Pass
/// `params_y = NULL` for a 1D walk.
///
/// # Safety
/// Parameter pointers must be null or valid; `out` must be null or
/// writable. Release the handle with [`dtqw_walk_free`].
#[no_mangle]
pub unsafe extern "C" fn dtqw_walk_new(
    params_x: *const DtqwParams,
    params_y: *const DtqwParams,
    out: *mut *mut DtqwWalk,
) -> DtqwStatus {
    guard(|| {
        let px = params_of(read(params_x)?)?;
        let py = if params_y.is_null() { None } else { Some(params_of(&*params_y)?) };
        let state = match py {
            None => WalkState::Line(LineState::localized(CoinState::H)),
            Some(_) => WalkState::Plane(PlaneState::localized(CoinState::H, CoinState::H)),
        };
        write(out, Box::into_raw(Box::new(DtqwWalk { state, params_x: px, params_y: py })))
    })
}

/// Advances the walk by `n_steps`.
///
/// # Safety
/// `walk` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dtqw_walk_step(walk: *mut DtqwWalk, n_steps: usize) -> DtqwStatus {
    guard(|| {
        let w = walk.as_mut().ok_or_else(|| fail(DtqwStatus::NullPointer, "null walk handle"))?;
        w.state = lib(evolve(&w.state, &w.params_x, w.params_y.as_ref(), n_steps))?;
        Ok(())
    })
}

/// Probability at site `(x, y)`; `y` is ignored for 1D walks.
///
/// # Safety
/// `walk` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_walk_probability(walk: *const DtqwWalk, x: i64, y: i64, out: *mut f64) -> DtqwStatus {
    guard(|| {
        let w = read(walk)?;
        let p = match &w.state {
            WalkState::Line(s) => s.probability(x),
            WalkState::Plane(s) => s.amplitude(x, y).iter().map(|a| a.norm_sqr()).sum(),
        };
        write(out, p)
    })
}

/// Steps taken and total probability.
///
/// # Safety
/// `walk` must be a live handle; out-pointers must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dtqw_walk_info(walk: *const DtqwWalk, steps: *mut usize, norm: *mut f64) -> DtqwStatus {
    guard(|| {
        let w = read(walk)?;
        write(steps, w.state.steps())?;
        write(norm, w.state.norm_sqr())
    })
}

/// # Safety
/// `walk` must be null or a handle from [`dtqw_walk_new`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn dtqw_walk_free(walk: *mut DtqwWalk) {
    if !walk.is_null() {
        drop(Box::from_raw(walk));
    }
}
