//! C interface to the `favard` library.
//!
//! Every function returns a [`FavardStatus`]. On failure the message is
//! available from [`favard_last_error_message`] on the same thread. Handles
//! and strings allocated here are released with the matching `*_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use favard::construction::{
    box_family_to_json, build_box_family, build_four_corner, build_random_four_corner,
    build_segment_family, segment_family_to_json, BoxFamily, GrowthPreset, GrowthSequence,
    ScheduleParams, SegmentFamily,
};
use favard::duality::{dual_area, pair_sum_lower_bound, restricted_angle_integral};
use favard::projection::{
    favard_estimate, neighborhood_projection_length, Direction, FavardEstimate, GraphProjector,
    IfsProjector, ProjectionSource,
};
use favard::Error;

/// Largest scale exponent accepted when deriving schedules.
pub const FAVARD_SCALE_BUDGET: u32 = 60;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FavardStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Budget = 3,
    InvalidArgument = 4,
    Arithmetic = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FavardGrowth {
    Linear = 0,
    Sqrt = 1,
    Log = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FavardEstimateC {
    pub value: f64,
    pub error_bound: f64,
    pub eps: f64,
    pub nodes: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FavardPairSum {
    pub sum_unordered: f64,
    pub sum_ordered: f64,
    pub lower_bound: f64,
    pub analytic: f64,
    /// Nonzero when every pair was scanned.
    pub exhaustive: i32,
}

pub struct FavardSchedule(ScheduleParams);

pub struct FavardSegmentFamily(SegmentFamily);

pub struct FavardBoxFamily(BoxFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FavardStatus {
    match e {
        Error::Config(_) => FavardStatus::Config,
        Error::Budget { .. } | Error::ScheduleBudget { .. } => FavardStatus::Budget,
        Error::InvalidArgument(_) => FavardStatus::InvalidArgument,
        Error::Dyadic(_) => FavardStatus::Arithmetic,
        Error::Io(_) | Error::Serde(_) | Error::Csv(_) => FavardStatus::Io,
    }
}

struct Null;

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<Null> for Failure {
    fn from(_: Null) -> Self {
        Failure::Null
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> FavardStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FavardStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            FavardStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FavardStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Null> {
    p.as_ref().ok_or(Null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Null> {
    if out.is_null() {
        return Err(Null);
    }
    out.write(v);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, v: T) -> Result<(), Null> {
    if out.is_null() {
        return Err(Null);
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

fn estimate_c(e: FavardEstimate) -> FavardEstimateC {
    FavardEstimateC {
        value: e.value,
        error_bound: e.error_bound,
        eps: e.eps,
        nodes: e.nodes,
    }
}

/// Message of the last failed call on this thread, or null. The caller
/// owns the string and releases it with [`favard_string_free`].
#[no_mangle]
pub extern "C" fn favard_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn favard_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn favard_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Schedule for a growth preset with `levels` levels.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_from_preset(
    growth: FavardGrowth,
    levels: usize,
    c_sep: u64,
    out: *mut *mut FavardSchedule,
) -> FavardStatus {
    guard(|| {
        let preset = match growth {
            FavardGrowth::Linear => GrowthPreset::Linear,
            FavardGrowth::Sqrt => GrowthPreset::Sqrt,
            FavardGrowth::Log => GrowthPreset::Log,
        };
        let p = ScheduleParams::from_growth(&preset.sequence(levels)?, c_sep, FAVARD_SCALE_BUDGET)?;
        Ok(put_box(out, FavardSchedule(p))?)
    })
}

/// Schedule for explicit growth values `g(1), ..., g(len)`.
///
/// # Safety
/// `values` must point to `len` doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_from_growth(
    values: *const f64,
    len: usize,
    c_sep: u64,
    out: *mut *mut FavardSchedule,
) -> FavardStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::Null);
        }
        let g = GrowthSequence::new(std::slice::from_raw_parts(values, len).to_vec())?;
        let p = ScheduleParams::from_growth(&g, c_sep, FAVARD_SCALE_BUDGET)?;
        Ok(put_box(out, FavardSchedule(p))?)
    })
}

/// # Safety
/// `s` is null or a live schedule handle.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_free(s: *mut FavardSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_levels(
    s: *const FavardSchedule,
    out: *mut usize,
) -> FavardStatus {
    guard(|| Ok(put(out, get(s)?.0.levels())?))
}

/// Scale exponent `m_k`.
///
/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_scale(
    s: *const FavardSchedule,
    k: usize,
    out: *mut u32,
) -> FavardStatus {
    guard(|| {
        let p = &get(s)?.0;
        if k > p.levels() {
            return Err(Error::InvalidArgument(format!("level {k} beyond {}", p.levels())).into());
        }
        Ok(put(out, p.scale(k))?)
    })
}

/// Increment `a_k` rounded to binary64.
///
/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_schedule_increment(
    s: *const FavardSchedule,
    k: usize,
    out: *mut f64,
) -> FavardStatus {
    guard(|| {
        let p = &get(s)?.0;
        if k > p.levels() {
            return Err(Error::InvalidArgument(format!("level {k} beyond {}", p.levels())).into());
        }
        Ok(put(out, p.increment_f64(k))?)
    })
}

/// Segment family `F_n`.
///
/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_build(
    s: *const FavardSchedule,
    n: usize,
    max_segments: u64,
    out: *mut *mut FavardSegmentFamily,
) -> FavardStatus {
    guard(|| {
        let f = build_segment_family(n, &get(s)?.0, max_segments as u128)?;
        Ok(put_box(out, FavardSegmentFamily(f))?)
    })
}

/// # Safety
/// `f` is null or a live segment family handle.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_free(f: *mut FavardSegmentFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_len(
    f: *const FavardSegmentFamily,
    out: *mut usize,
) -> FavardStatus {
    guard(|| Ok(put(out, get(f)?.0.len())?))
}

/// Box family `E_n`.
///
/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_build(
    s: *const FavardSchedule,
    n: usize,
    max_boxes: u64,
    out: *mut *mut FavardBoxFamily,
) -> FavardStatus {
    guard(|| {
        let f = build_box_family(n, &get(s)?.0, max_boxes as u128)?;
        Ok(put_box(out, FavardBoxFamily(f))?)
    })
}

/// Level `n` of the four-corner set.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_four_corner_build(
    n: usize,
    max_boxes: u64,
    out: *mut *mut FavardBoxFamily,
) -> FavardStatus {
    guard(|| {
        let f = build_four_corner(n, max_boxes as u128)?;
        Ok(put_box(out, FavardBoxFamily(f))?)
    })
}

/// Level `n` of the random four-corner set for `seed`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_random_four_corner_build(
    n: usize,
    seed: u64,
    max_boxes: u64,
    out: *mut *mut FavardBoxFamily,
) -> FavardStatus {
    guard(|| {
        let f = build_random_four_corner(n, seed, max_boxes as u128)?;
        Ok(put_box(out, FavardBoxFamily(f))?)
    })
}

/// # Safety
/// `f` is null or a live box family handle.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_free(f: *mut FavardBoxFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_len(
    f: *const FavardBoxFamily,
    out: *mut usize,
) -> FavardStatus {
    guard(|| Ok(put(out, get(f)?.0.len())?))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Error::InvalidArgument("nul in output".into()))?;
    Ok(put(out, c.into_raw())?)
}

/// Family JSON, released with [`favard_string_free`].
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_to_json(
    f: *const FavardSegmentFamily,
    out: *mut *mut c_char,
) -> FavardStatus {
    guard(|| put_string(out, segment_family_to_json(&get(f)?.0)?))
}

/// Family JSON, released with [`favard_string_free`].
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_to_json(
    f: *const FavardBoxFamily,
    out: *mut *mut c_char,
) -> FavardStatus {
    guard(|| put_string(out, box_family_to_json(&get(f)?.0)?))
}

/// Parses family JSON into either handle; the other output is set to null.
///
/// # Safety
/// `json` must be a nul-terminated string; both outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_family_from_json(
    json: *const c_char,
    segments: *mut *mut FavardSegmentFamily,
    boxes: *mut *mut FavardBoxFamily,
) -> FavardStatus {
    guard(|| {
        if json.is_null() || segments.is_null() || boxes.is_null() {
            return Err(Failure::Null);
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Error::InvalidArgument("JSON is not UTF-8".into()))?;
        segments.write(ptr::null_mut());
        boxes.write(ptr::null_mut());
        match favard::construction::family_from_json(text)? {
            favard::construction::Family::Segments(f) => put_box(segments, FavardSegmentFamily(f))?,
            favard::construction::Family::Boxes(f) => put_box(boxes, FavardBoxFamily(f))?,
        }
        Ok(())
    })
}

unsafe fn projection<S: ProjectionSource + ?Sized>(
    src: &S,
    theta: f64,
    eps: f64,
    out: *mut f64,
) -> Result<(), Failure> {
    let len = neighborhood_projection_length(src, &Direction::new(theta)?, eps)?;
    Ok(put(out, len)?)
}

/// `|p_θ(N(F, eps))|`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_projection(
    f: *const FavardSegmentFamily,
    theta: f64,
    eps: f64,
    out: *mut f64,
) -> FavardStatus {
    guard(|| projection(&get(f)?.0, theta, eps, out))
}

/// `|p_θ(N(E, eps))|`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_projection(
    f: *const FavardBoxFamily,
    theta: f64,
    eps: f64,
    out: *mut f64,
) -> FavardStatus {
    guard(|| projection(&get(f)?.0, theta, eps, out))
}

/// Favard length of `N(F, eps)` by angle quadrature.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_segment_family_estimate(
    f: *const FavardSegmentFamily,
    eps: f64,
    nodes: usize,
    out: *mut FavardEstimateC,
) -> FavardStatus {
    guard(|| {
        Ok(put(
            out,
            estimate_c(favard_estimate(&get(f)?.0, eps, nodes)?),
        )?)
    })
}

/// Favard length of `N(E, eps)` by angle quadrature. Four-corner families
/// are projected hierarchically.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_box_family_estimate(
    f: *const FavardBoxFamily,
    eps: f64,
    nodes: usize,
    out: *mut FavardEstimateC,
) -> FavardStatus {
    guard(|| {
        let fam = &get(f)?.0;
        let est = match fam.ifs() {
            Some(ifs) => favard_estimate(&IfsProjector::new(ifs.clone()), eps, nodes)?,
            None => favard_estimate(fam, eps, nodes)?,
        };
        Ok(put(out, estimate_c(est))?)
    })
}

/// Favard length of `N(F_n, eps)` without enumerating segments.
///
/// # Safety
/// `s` must be a live schedule handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_graph_estimate(
    s: *const FavardSchedule,
    n: usize,
    eps: f64,
    nodes: usize,
    out: *mut FavardEstimateC,
) -> FavardStatus {
    guard(|| {
        let proj = GraphProjector::new(&get(s)?.0, n)?;
        Ok(put(out, estimate_c(favard_estimate(&proj, eps, nodes)?))?)
    })
}

/// Area of the dual set of `F_n` in the strip, and the matching angle
/// integral over the charted directions.
///
/// # Safety
/// `s` must be a live schedule handle; both outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_dual_area(
    s: *const FavardSchedule,
    n: usize,
    nodes: usize,
    area: *mut f64,
    restricted: *mut f64,
) -> FavardStatus {
    guard(|| {
        let proj = GraphProjector::new(&get(s)?.0, n)?;
        let a = dual_area(&proj, nodes)?;
        let r = restricted_angle_integral(&proj, nodes)?;
        put(area, a)?;
        Ok(put(restricted, r)?)
    })
}

/// Pair sum of the dual wedges and its reciprocal lower bound.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn favard_pair_sum(
    f: *const FavardSegmentFamily,
    c_reach: u64,
    nodes: usize,
    out: *mut FavardPairSum,
) -> FavardStatus {
    guard(|| {
        let b = pair_sum_lower_bound(&get(f)?.0, c_reach, nodes)?;
        Ok(put(
            out,
            FavardPairSum {
                sum_unordered: b.sum_unordered,
                sum_ordered: b.sum_ordered,
                lower_bound: b.lower_bound,
                analytic: b.analytic,
                exhaustive: (b.route == favard::duality::PairRoute::Exhaustive) as i32,
            },
        )?)
    })
}
