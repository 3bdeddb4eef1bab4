//! C ABI over `tent-core`.
//!
//! Numbers cross the boundary as NUL-terminated text: rationals as `"num/den"` or integers,
//! decimals with the working precision's significant digits. Strings returned through `out`
//! parameters are owned by the caller and released with [`tent_string_free`]. Handles are
//! released with their `_free` function. Every call returns a [`TentStatus`]; on failure
//! [`tent_last_error_message`] describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tent_core::control::{self, RegimeOffset};
use tent_core::finder::{self, GridOptions, NumericCycleRecord};
use tent_core::oracle::{self, ExactCycle};
use tent_core::rational::{format_rational, parse_rational};
use tent_core::{ControlConfig, MapParams, Regime, TentError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TentStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    OutOfRange = 4,
    ParseError = 5,
    IndexOutOfBounds = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TentRegime {
    Positive = 0,
    Negative = 1,
}

impl From<TentRegime> for Regime {
    fn from(r: TentRegime) -> Self {
        match r {
            TentRegime::Positive => Regime::PositiveMultiplier,
            TentRegime::Negative => Regime::NegativeMultiplier,
        }
    }
}

/// Exact cycles from [`tent_enumerate`].
pub struct TentCycleSet {
    cycles: Vec<ExactCycle>,
}

/// Distinct numeric cycles from [`tent_find`].
pub struct TentFoundSet {
    records: Vec<NumericCycleRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(TentStatus, String);

impl From<TentError> for Failure {
    fn from(e: TentError) -> Self {
        let status = match e {
            TentError::Parse(_) => TentStatus::ParseError,
            TentError::PeriodOutOfRange { .. } | TentError::PointOutOfRange { .. } => TentStatus::OutOfRange,
            _ => TentStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TentStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TentStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            TentStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(TentStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TentStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(TentStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    let s = CString::new(value).map_err(|_| Failure(TentStatus::InvalidArgument, "interior NUL".into()))?;
    put(out, s.into_raw())
}

unsafe fn slope(h: *const c_char) -> Result<MapParams, Failure> {
    Ok(text(h, "h")?.parse::<MapParams>()?)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(TentStatus::NullPointer, "handle is null".into()))
}

fn index<T>(items: &[T], i: usize) -> Result<&T, Failure> {
    items
        .get(i)
        .ok_or_else(|| Failure(TentStatus::IndexOutOfBounds, format!("index {i} >= {}", items.len())))
}

/// Message of the last failed call on this thread; empty if none. Valid until the next failure.
#[no_mangle]
pub extern "C" fn tent_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of proper `period`-cycles, `1 <= period <= 64`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_count_cycles(period: u32, out: *mut u64) -> TentStatus {
    guard(|| put(out, control::count_cycles(period)?))
}

/// Endpoints of the stabilizing interval of `theta` for slope `h` (rational text).
///
/// # Safety
/// `h` must be a NUL-terminated string; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_theta_interval(
    h: *const c_char,
    period: u32,
    regime: TentRegime,
    lo: *mut *mut c_char,
    hi: *mut *mut c_char,
) -> TentStatus {
    guard(|| {
        let iv = control::theta_interval(&slope(h)?, period, regime.into())?;
        if lo.is_null() || hi.is_null() {
            return Err(Failure(TentStatus::NullPointer, "output pointer is null".into()));
        }
        put_string(lo, format_rational(&iv.lo))?;
        put_string(hi, format_rational(&iv.hi))
    })
}

/// `theta = (H^T + c/H) / (H^T -+ 1)` for an offset `|c| < 1`.
///
/// # Safety
/// `h` and `offset` must be NUL-terminated strings; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_theta_from_offset(
    h: *const c_char,
    period: u32,
    regime: TentRegime,
    offset: *const c_char,
    out: *mut *mut c_char,
) -> TentStatus {
    guard(|| {
        let c = RegimeOffset::new(parse_rational(text(offset, "offset")?)?)?;
        let theta = control::theta_from_offset(&slope(h)?, period, regime.into(), &c)?;
        put_string(out, format_rational(&theta))
    })
}

/// Exact multiplier `mu (theta + (1 - theta) mu)^T` of the controlled cycle.
///
/// # Safety
/// `mu` and `theta` must be NUL-terminated strings; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_controlled_multiplier(
    mu: *const c_char,
    theta: *const c_char,
    period: u32,
    out: *mut *mut c_char,
) -> TentStatus {
    guard(|| {
        let mu = parse_rational(text(mu, "mu")?)?;
        let theta = parse_rational(text(theta, "theta")?)?;
        put_string(out, format_rational(&control::controlled_multiplier(&mu, &theta, period)))
    })
}

/// Whether a `tau`-cycle with multiplier sign `sign` (+1 or -1) is stabilized by period-`period` control.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_subcycle_stable(
    period: u32,
    tau: u32,
    regime: TentRegime,
    sign: i8,
    out: *mut bool,
) -> TentStatus {
    guard(|| put(out, control::subcycle_stable(period, tau, regime.into(), sign)?))
}

/// All proper `period`-cycles of slope `h`, sorted by smallest point.
///
/// # Safety
/// `h` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_enumerate(h: *const c_char, period: u32, out: *mut *mut TentCycleSet) -> TentStatus {
    guard(|| {
        let cycles = oracle::enumerate_cycles(&slope(h)?, period)?;
        put(out, Box::into_raw(Box::new(TentCycleSet { cycles })))
    })
}

/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tent_cycle_set_len(set: *const TentCycleSet) -> usize {
    set.as_ref().map_or(0, |s| s.cycles.len())
}

/// Period and multiplier sign of cycle `i`.
///
/// # Safety
/// `set` must be a live handle; `period` and `sign` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_cycle_set_info(
    set: *const TentCycleSet,
    i: usize,
    period: *mut u32,
    sign: *mut i8,
) -> TentStatus {
    guard(|| {
        let c = index(&handle(set)?.cycles, i)?;
        if sign.is_null() {
            return Err(Failure(TentStatus::NullPointer, "output pointer is null".into()));
        }
        put(period, c.period)?;
        put(sign, c.multiplier_sign)
    })
}

/// Point `j` of cycle `i` as exact rational text.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_cycle_set_point(
    set: *const TentCycleSet,
    i: usize,
    j: usize,
    out: *mut *mut c_char,
) -> TentStatus {
    guard(|| {
        let c = index(&handle(set)?.cycles, i)?;
        put_string(out, format_rational(index(&c.points, j)?))
    })
}

/// Branch word (`L`/`R`) of cycle `i`, aligned with its points.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_cycle_set_symbols(set: *const TentCycleSet, i: usize, out: *mut *mut c_char) -> TentStatus {
    guard(|| {
        let c = index(&handle(set)?.cycles, i)?;
        put_string(out, c.symbols.to_string())
    })
}

/// # Safety
/// `set` must come from [`tent_enumerate`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tent_cycle_set_free(set: *mut TentCycleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Grid search from seeds `k / (grid + 1)` with `theta` given by `offset`.
/// `precision = 0` selects the default rule.
///
/// # Safety
/// `h` and `offset` must be NUL-terminated strings; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_find(
    h: *const c_char,
    period: u32,
    regime: TentRegime,
    offset: *const c_char,
    grid: usize,
    precision: u32,
    out: *mut *mut TentFoundSet,
) -> TentStatus {
    guard(|| {
        let params = slope(h)?;
        let c = RegimeOffset::new(parse_rational(text(offset, "offset")?)?)?;
        let regime: Regime = regime.into();
        let theta = control::theta_from_offset(&params, period, regime, &c)?;
        let cfg = ControlConfig::new(params, period, regime, theta)?;
        let opts = GridOptions {
            grid,
            precision: (precision > 0).then_some(precision),
            ..GridOptions::default()
        };
        let search = finder::grid_search_theta(&cfg, &opts)?;
        let records = search.cycles.iter().map(|f| NumericCycleRecord::new(f, &cfg)).collect();
        put(out, Box::into_raw(Box::new(TentFoundSet { records })))
    })
}

/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tent_found_set_len(set: *const TentFoundSet) -> usize {
    set.as_ref().map_or(0, |s| s.records.len())
}

/// Proper period of found cycle `i`.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_found_set_tau(set: *const TentFoundSet, i: usize, out: *mut u32) -> TentStatus {
    guard(|| put(out, index(&handle(set)?.records, i)?.tau))
}

/// Point `j` of found cycle `i` as decimal text.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_found_set_point(
    set: *const TentFoundSet,
    i: usize,
    j: usize,
    out: *mut *mut c_char,
) -> TentStatus {
    guard(|| {
        let r = index(&handle(set)?.records, i)?;
        put_string(out, index(&r.points, j)?.clone())
    })
}

/// Found cycle `i` as the JSON line `tentctl find` prints.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tent_found_set_json(set: *const TentFoundSet, i: usize, out: *mut *mut c_char) -> TentStatus {
    guard(|| {
        let r = index(&handle(set)?.records, i)?;
        put_string(out, r.to_json())
    })
}

/// # Safety
/// `set` must come from [`tent_find`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tent_found_set_free(set: *mut TentFoundSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
