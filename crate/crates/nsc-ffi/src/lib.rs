//! C ABI for the sensitivity-coefficient estimation library.
//!
//! Conventions:
//!
//! * Records and curves are opaque handles created and freed here; never
//!   free them with anything but the matching `*_free` function.
//! * Every fallible call returns an [`NscStatus`]; outputs ride out
//!   parameters that are written only on `NSC_STATUS_OK`.
//! * [`nsc_last_error_message`] returns a thread-local, NUL-terminated
//!   description of the most recent failure on the calling thread, valid
//!   until the next failing call on that thread.
//! * Panics are caught at the boundary and reported as
//!   `NSC_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nsc_core::asynchrony::{compensate, DEFAULT_PROBES};
use nsc_core::estimator::{extract_estimate, k_curve, k_of_tau, Style, Variant};
use nsc_core::noise::{generate, NoiseKind, NoiseSpec};
use nsc_core::series::{block_average, TauGrid, TimeSeries};
use nsc_core::stats::{acov, adev2, overlap_acov, overlap_adev2};
use nsc_core::{Error, KCurve};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NscStatus {
    NscStatusOk = 0,
    /// A required pointer argument was NULL.
    NscStatusNullArgument = 1,
    /// An argument was out of range or otherwise invalid.
    NscStatusInvalidArgument = 2,
    /// The record is too short for the requested operation.
    NscStatusInsufficientData = 3,
    /// The independent variable carries no information (zero variance).
    NscStatusDegenerate = 4,
    /// No curve window satisfied the extraction rules.
    NscStatusExtractionFailed = 5,
    /// Every mismatch candidate was degenerate.
    NscStatusCompensationFailed = 6,
    /// An internal invariant failed; see the last error message.
    NscStatusInternal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> NscStatus {
    match err {
        Error::OutOfRange { .. } | Error::Domain(_) | Error::ShapeMismatch(_) => {
            NscStatus::NscStatusInvalidArgument
        }
        Error::InsufficientData { .. } => NscStatus::NscStatusInsufficientData,
        Error::DegenerateNiv { .. } => NscStatus::NscStatusDegenerate,
        Error::ExtractionFailed { .. } => NscStatus::NscStatusExtractionFailed,
        Error::CompensationFailed(_) => NscStatus::NscStatusCompensationFailed,
        _ => NscStatus::NscStatusInternal,
    }
}

fn fail(err: &Error) -> NscStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs a closure behind the panic boundary.
fn guarded(f: impl FnOnce() -> NscStatus) -> NscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            NscStatus::NscStatusInternal
        }
    }
}

/// Opaque uniformly sampled record.
pub struct NscSeries(TimeSeries);

/// Opaque sensitivity curve.
pub struct NscCurve(KCurve);

/// One curve point, by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NscCurvePoint {
    pub m: usize,
    pub tau: f64,
    pub k: f64,
    pub sigma_k: f64,
    pub edf: f64,
}

/// Scalar estimate with decomposed uncertainty.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NscEstimate {
    pub k_bar: f64,
    pub sigma_bar: f64,
    pub sigma_max: f64,
    pub sigma_total: f64,
    pub m_lo: usize,
    pub m_hi: usize,
}

/// Noise kinds accepted by the generator and the curve functions.
/// `NscNoiseAuto` asks the curve functions to classify the record.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NscNoise {
    NscNoiseAuto = -1,
    NscNoiseWhite = 0,
    NscNoiseFlicker = 1,
    NscNoiseRandomWalk = 2,
}

fn noise_kind(v: NscNoise) -> Option<NoiseKind> {
    match v {
        NscNoise::NscNoiseAuto => None,
        NscNoise::NscNoiseWhite => Some(NoiseKind::White),
        NscNoise::NscNoiseFlicker => Some(NoiseKind::Flicker),
        NscNoise::NscNoiseRandomWalk => Some(NoiseKind::RandomWalk),
    }
}

/// Thread-local description of the most recent failure. Never NULL;
/// empty before the first failure. Valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn nsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies `len` samples at base period `tau0` (seconds) into a new record.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn nsc_series_new(
    values: *const f64,
    len: usize,
    tau0: f64,
    out: *mut *mut NscSeries,
) -> NscStatus {
    if values.is_null() || out.is_null() {
        set_error("values and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let data = std::slice::from_raw_parts(values, len).to_vec();
    guarded(|| match TimeSeries::new(data, tau0) {
        Ok(s) => {
            *out = Box::into_raw(Box::new(NscSeries(s)));
            NscStatus::NscStatusOk
        }
        Err(e) => fail(&e),
    })
}

/// Generates a seeded noise record (see [`NscNoise`]; `NscNoiseAuto` is
/// not a generator kind). `level` is the two-sample deviation at `tau0`.
///
/// # Safety
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn nsc_noise_generate(
    kind: NscNoise,
    level: f64,
    seed: u64,
    n: usize,
    tau0: f64,
    out: *mut *mut NscSeries,
) -> NscStatus {
    if out.is_null() {
        set_error("out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let Some(kind) = noise_kind(kind) else {
        set_error("generator kind must be white, flicker, or random walk");
        return NscStatus::NscStatusInvalidArgument;
    };
    guarded(|| {
        let run = || -> Result<TimeSeries, Error> {
            let spec = NoiseSpec::new(kind, level, seed)?;
            generate(&spec, n)?.retimed(tau0)
        };
        match run() {
            Ok(s) => {
                *out = Box::into_raw(Box::new(NscSeries(s)));
                NscStatus::NscStatusOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Frees a record handle; NULL is ignored.
///
/// # Safety
/// `series` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nsc_series_free(series: *mut NscSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of samples in a record; 0 for NULL.
///
/// # Safety
/// `series` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn nsc_series_len(series: *const NscSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Borrowed pointer to the record's samples ([`nsc_series_len`] doubles),
/// valid until the handle is freed; NULL for NULL input.
///
/// # Safety
/// `series` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn nsc_series_data(series: *const NscSeries) -> *const f64 {
    series
        .as_ref()
        .map_or(std::ptr::null(), |s| s.0.values().as_ptr())
}

unsafe fn two_series<'a>(
    a: *const NscSeries,
    b: *const NscSeries,
) -> Option<(&'a TimeSeries, &'a TimeSeries)> {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => Some((&a.0, &b.0)),
        _ => None,
    }
}

/// Two-sample (Allan) variance at averaging factor `m`; `overlap`
/// non-zero selects the overlapping estimator.
///
/// # Safety
/// `series` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsc_adev2(
    series: *const NscSeries,
    m: usize,
    overlap: i32,
    out: *mut f64,
) -> NscStatus {
    if series.is_null() || out.is_null() {
        set_error("series and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let s = &(*series).0;
    guarded(|| {
        let r = if overlap != 0 {
            overlap_adev2(s, m)
        } else {
            block_average(s, m).and_then(|a| adev2(&a))
        };
        match r {
            Ok(v) => {
                *out = v;
                NscStatus::NscStatusOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Two-sample covariance of two records at averaging factor `m`.
///
/// # Safety
/// Both handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsc_acov(
    a: *const NscSeries,
    b: *const NscSeries,
    m: usize,
    overlap: i32,
    out: *mut f64,
) -> NscStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        set_error("a, b, and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let (sa, sb) = two_series(a, b).unwrap();
    guarded(|| {
        let r = if overlap != 0 {
            overlap_acov(sa, sb, m)
        } else {
            block_average(sa, m)
                .and_then(|am| block_average(sb, m).and_then(|bm| acov(&am, &bm)))
        };
        match r {
            Ok(v) => {
                *out = v;
                NscStatus::NscStatusOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Sensitivity coefficient of `y` against `x` at averaging factor `m`:
/// the ratio of their two-sample covariance to the variance of `x`.
///
/// # Safety
/// Both handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsc_k_of_tau(
    y: *const NscSeries,
    x: *const NscSeries,
    m: usize,
    overlap: i32,
    out: *mut f64,
) -> NscStatus {
    if y.is_null() || x.is_null() || out.is_null() {
        set_error("y, x, and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let (sy, sx) = two_series(y, x).unwrap();
    let style = if overlap != 0 {
        Style::Overlap
    } else {
        Style::Normal
    };
    guarded(|| match k_of_tau(sy, sx, m, style) {
        Ok(v) => {
            *out = v;
            NscStatus::NscStatusOk
        }
        Err(e) => fail(&e),
    })
}

/// Computes a sensitivity curve over the default tau grid.
/// `difference_variant` non-zero replaces both records by adjacent
/// differences first; `noise` feeds the confidence model.
///
/// # Safety
/// Both handles must be live; `out` a valid pointer to receive the curve.
#[no_mangle]
pub unsafe extern "C" fn nsc_k_curve(
    y: *const NscSeries,
    x: *const NscSeries,
    overlap: i32,
    difference_variant: i32,
    noise: NscNoise,
    out: *mut *mut NscCurve,
) -> NscStatus {
    if y.is_null() || x.is_null() || out.is_null() {
        set_error("y, x, and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let (sy, sx) = two_series(y, x).unwrap();
    let style = if overlap != 0 {
        Style::Overlap
    } else {
        Style::Normal
    };
    let variant = if difference_variant != 0 {
        Variant::NscD
    } else {
        Variant::Nsc
    };
    guarded(|| {
        let run = || -> Result<KCurve, Error> {
            let grid = TauGrid::default_for(sy.len())?;
            k_curve(sy, sx, &grid, style, variant, noise_kind(noise))
        };
        match run() {
            Ok(c) => {
                *out = Box::into_raw(Box::new(NscCurve(c)));
                NscStatus::NscStatusOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Frees a curve handle; NULL is ignored.
///
/// # Safety
/// `curve` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nsc_curve_free(curve: *mut NscCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of points in a curve; 0 for NULL.
///
/// # Safety
/// `curve` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn nsc_curve_len(curve: *const NscCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.points.len())
}

/// Copies point `index` of a curve.
///
/// # Safety
/// `curve` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsc_curve_point(
    curve: *const NscCurve,
    index: usize,
    out: *mut NscCurvePoint,
) -> NscStatus {
    if curve.is_null() || out.is_null() {
        set_error("curve and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let c = &(*curve).0;
    match c.points.get(index) {
        Some(p) => {
            *out = NscCurvePoint {
                m: p.m,
                tau: p.tau,
                k: p.k,
                sigma_k: p.sigma_k,
                edf: p.edf,
            };
            NscStatus::NscStatusOk
        }
        None => {
            set_error("point index out of range");
            NscStatus::NscStatusInvalidArgument
        }
    }
}

/// Condenses a curve to a scalar estimate with decomposed uncertainty.
///
/// # Safety
/// `curve` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsc_extract_estimate(
    curve: *const NscCurve,
    out: *mut NscEstimate,
) -> NscStatus {
    if curve.is_null() || out.is_null() {
        set_error("curve and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let c = &(*curve).0;
    guarded(|| match extract_estimate(c) {
        Ok(e) => {
            *out = NscEstimate {
                k_bar: e.k_bar,
                sigma_bar: e.sigma_bar,
                sigma_max: e.sigma_max,
                sigma_total: e.sigma_total,
                m_lo: e.m_lo,
                m_hi: e.m_hi,
            };
            NscStatus::NscStatusOk
        }
        Err(e) => fail(&e),
    })
}

/// Searches delays in `[-dmax, dmax]` and integral windows in
/// `[1, imax]` for the timing mismatch best aligning `x` with `y`;
/// writes the winning pair and, when `curve_out` is non-NULL, the
/// compensated curve.
///
/// # Safety
/// `y` and `x` must be live handles; `best_d` and `best_i` valid
/// pointers; `curve_out` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn nsc_compensate(
    y: *const NscSeries,
    x: *const NscSeries,
    dmax: i64,
    imax: usize,
    best_d: *mut i64,
    best_i: *mut usize,
    curve_out: *mut *mut NscCurve,
) -> NscStatus {
    if y.is_null() || x.is_null() || best_d.is_null() || best_i.is_null() {
        set_error("y, x, best_d, and best_i must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    if dmax < 0 || imax < 1 {
        set_error("dmax must be >= 0 and imax >= 1");
        return NscStatus::NscStatusInvalidArgument;
    }
    let (sy, sx) = two_series(y, x).unwrap();
    guarded(|| match compensate(sy, sx, -dmax..=dmax, 1..=imax, &DEFAULT_PROBES) {
        Ok(c) => {
            *best_d = c.delay;
            *best_i = c.integral;
            if !curve_out.is_null() {
                *curve_out = Box::into_raw(Box::new(NscCurve(c.curve)));
            }
            NscStatus::NscStatusOk
        }
        Err(e) => fail(&e),
    })
}

/// Root-sum-square uncertainty synthesis: `sqrt(sum (k_i sigma_i)^2)`
/// over `len` entries.
///
/// # Safety
/// `k` and `sigma_x` must point to `len` readable doubles; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn nsc_budget_rss(
    k: *const f64,
    sigma_x: *const f64,
    len: usize,
    out: *mut f64,
) -> NscStatus {
    if k.is_null() || sigma_x.is_null() || out.is_null() {
        set_error("k, sigma_x, and out must be non-NULL");
        return NscStatus::NscStatusNullArgument;
    }
    let ks = std::slice::from_raw_parts(k, len);
    let ss = std::slice::from_raw_parts(sigma_x, len);
    guarded(|| {
        let run = || -> Result<f64, Error> {
            let entries = ks
                .iter()
                .zip(ss)
                .enumerate()
                .map(|(i, (&k, &s))| nsc_core::BudgetEntry::new(format!("entry {i}"), k, s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(nsc_core::estimator::budget(entries)?.u_b)
        };
        match run() {
            Ok(v) => {
                *out = v;
                NscStatus::NscStatusOk
            }
            Err(e) => fail(&e),
        }
    })
}
