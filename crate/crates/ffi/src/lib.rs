//! C ABI for the cgr analytics, answer extraction, and scaffold validators.
//!
//! Every function returns a [`CgrStatus`]. On anything other than
//! `CGR_STATUS_OK` a message is available from [`cgr_last_error_message`] on
//! the same thread until the next failing call. Pair sets are opaque handles
//! created by `cgr_pairs_load` / `cgr_pairs_bundled` and released with
//! `cgr_pairs_free`. Accuracies are fractions in [0, 1].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cgr::analytics::{self, AnalyticsError, Axis, PairSummary, PartitionReport, ResampleUnit, Statistic};
use cgr::scaffold;
use cgr::{extract_answer, extract_answer_in_set, ExtractionOutcome, Letter};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    EmptyInput = 6,
    Undefined = 7,
    Panic = 99,
}

pub const CGR_UNIT_PAIR: u32 = 0;
pub const CGR_UNIT_DATASET_CLUSTER: u32 = 1;
pub const CGR_UNIT_SOLVER_CLUSTER: u32 = 2;

pub const CGR_AXIS_DATASET: u32 = 0;
pub const CGR_AXIS_SOLVER: u32 = 1;

/// Opaque set of per-pair accuracy summaries.
pub struct CgrPairSet {
    pairs: Vec<PairSummary>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgrPartition {
    pub tau: f64,
    pub kept_pairs: u32,
    pub n_records: u64,
    pub macro_direct: f64,
    pub macro_assisted: f64,
    pub macro_gen: f64,
    pub delta: f64,
    /// Sample standard deviations across the kept pairs.
    pub sd_direct: f64,
    pub sd_assisted: f64,
    pub sd_delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgrInterval {
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgrRange {
    pub min: f64,
    pub max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CgrExtraction {
    /// ASCII code of the extracted letter; 'X' also for no match.
    pub letter: u8,
    /// Character offsets of the match, or -1 when nothing matched.
    pub span_start: i64,
    pub span_end: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CgrScanReport {
    pub literal_answer_hits: u32,
    pub call_sites: u32,
    pub has_return_contract: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CgrStatus, String);

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        let status = match e {
            AnalyticsError::EmptyInput | AnalyticsError::EmptyPartition { .. } => CgrStatus::EmptyInput,
            AnalyticsError::DegenerateGap => CgrStatus::Undefined,
            _ => CgrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f` behind a panic guard and records any failure message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CgrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CgrStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CgrStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(CgrStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn set_arg<'a>(p: *const CgrPairSet) -> Result<&'a [PairSummary], Failure> {
    p.as_ref().map(|s| s.pairs.as_slice()).ok_or_else(|| null("pair set"))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

fn partition_out(r: &PartitionReport) -> CgrPartition {
    CgrPartition {
        tau: r.tau,
        kept_pairs: r.kept_pairs.len() as u32,
        n_records: r.n_records,
        macro_direct: r.macro_direct,
        macro_assisted: r.macro_assisted,
        macro_gen: r.macro_gen,
        delta: r.delta,
        sd_direct: r.sd_direct,
        sd_assisted: r.sd_assisted,
        sd_delta: r.sd_delta,
    }
}

fn extraction_out(o: ExtractionOutcome) -> CgrExtraction {
    let (start, end) = o.matched_span.map_or((-1, -1), |(s, e)| (s as i64, e as i64));
    CgrExtraction {
        letter: o.letter.as_char() as u8,
        span_start: start,
        span_end: end,
    }
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cgr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Loads a line-delimited pair-summary file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cgr_pairs_load(path: *const c_char, out: *mut *mut CgrPairSet) -> CgrStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out)?;
        let pairs = analytics::load_pairs(Path::new(path)).map_err(|e| {
            let status = match e {
                analytics::FixtureError::Jsonl(cgr::jsonl::JsonlError::Io { .. }) => CgrStatus::Io,
                _ => CgrStatus::Parse,
            };
            Failure(status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(CgrPairSet { pairs }));
        Ok(())
    })
}

/// The bundled retained-pair fixture.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cgr_pairs_bundled(out: *mut *mut CgrPairSet) -> CgrStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = Box::into_raw(Box::new(CgrPairSet {
            pairs: analytics::retained_pairs(),
        }));
        Ok(())
    })
}

/// Releases a pair set. NULL is ignored.
///
/// # Safety
/// `set` must come from `cgr_pairs_load` or `cgr_pairs_bundled` and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn cgr_pairs_free(set: *mut CgrPairSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of pairs in the set, 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgr_pairs_len(set: *const CgrPairSet) -> usize {
    set.as_ref().map_or(0, |s| s.pairs.len())
}

/// Macro summary over pairs whose direct accuracy is strictly above `tau`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_partition(set: *const CgrPairSet, tau: f64, out: *mut CgrPartition) -> CgrStatus {
    guard(|| {
        let pairs = set_arg(set)?;
        let out = out_arg(out)?;
        *out = partition_out(&analytics::partition(pairs, tau)?);
        Ok(())
    })
}

/// Macro summary over pairs whose direct accuracy is exactly zero.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_zero_baseline(set: *const CgrPairSet, out: *mut CgrPartition) -> CgrStatus {
    guard(|| {
        let pairs = set_arg(set)?;
        let out = out_arg(out)?;
        *out = partition_out(&analytics::zero_baseline_report(pairs)?);
        Ok(())
    })
}

/// Share of the direct-to-generator gap closed by the assisted channel.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_gap_closure(direct: f64, assisted: f64, generator: f64, out: *mut f64) -> CgrStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = analytics::gap_closure(direct, assisted, generator)?;
        Ok(())
    })
}

/// Percentile bootstrap 95% interval of the macro delta over the pairs kept at
/// `tau`. `unit` is one of the `CGR_UNIT_*` constants.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_bootstrap(
    set: *const CgrPairSet,
    tau: f64,
    unit: u32,
    replicates: usize,
    seed: u64,
    out: *mut CgrInterval,
) -> CgrStatus {
    guard(|| {
        let pairs = set_arg(set)?;
        let out = out_arg(out)?;
        let unit = match unit {
            CGR_UNIT_PAIR => ResampleUnit::Pair,
            CGR_UNIT_DATASET_CLUSTER => ResampleUnit::DatasetCluster,
            CGR_UNIT_SOLVER_CLUSTER => ResampleUnit::SolverCluster,
            other => return Err(Failure(CgrStatus::InvalidArgument, format!("unknown resample unit {other}"))),
        };
        let kept = analytics::partition(pairs, tau)?.kept_pairs;
        let r = analytics::bootstrap_ci(&kept, Statistic::MacroDelta, unit, replicates, seed)?;
        *out = CgrInterval {
            point_estimate: r.point_estimate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
        };
        Ok(())
    })
}

/// Range of the macro delta with one dataset or solver removed at a time.
/// `axis` is one of the `CGR_AXIS_*` constants.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_leave_one_out(set: *const CgrPairSet, tau: f64, axis: u32, out: *mut CgrRange) -> CgrStatus {
    guard(|| {
        let pairs = set_arg(set)?;
        let out = out_arg(out)?;
        let axis = match axis {
            CGR_AXIS_DATASET => Axis::Dataset,
            CGR_AXIS_SOLVER => Axis::Solver,
            other => return Err(Failure(CgrStatus::InvalidArgument, format!("unknown axis {other}"))),
        };
        let kept = analytics::partition(pairs, tau)?.kept_pairs;
        let r = analytics::leave_one_out(&kept, axis, Statistic::MacroDelta)?;
        *out = CgrRange { min: r.min, max: r.max };
        Ok(())
    })
}

/// First standalone capital letter in `text`.
///
/// # Safety
/// `text` must be NUL-terminated UTF-8 and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_extract_answer(text: *const c_char, out: *mut CgrExtraction) -> CgrStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out)?;
        *out = extraction_out(extract_answer(text));
        Ok(())
    })
}

/// First standalone capital letter that appears in `option_ids`, a string of
/// capital letters such as "ABCD".
///
/// # Safety
/// Both strings must be NUL-terminated UTF-8 and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_extract_answer_in_set(text: *const c_char, option_ids: *const c_char, out: *mut CgrExtraction) -> CgrStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let ids = str_arg(option_ids, "option_ids")?;
        let out = out_arg(out)?;
        let set: Vec<Letter> = ids
            .chars()
            .map(|c| Letter::new(c).ok_or_else(|| Failure(CgrStatus::InvalidArgument, format!("option id {c:?} is not A-Z"))))
            .collect::<Result<_, _>>()?;
        if set.is_empty() {
            return Err(Failure(CgrStatus::InvalidArgument, "option_ids is empty".into()));
        }
        *out = extraction_out(extract_answer_in_set(text, &set));
        Ok(())
    })
}

/// Static checks over one scaffold source.
///
/// # Safety
/// `source` must be NUL-terminated UTF-8 and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cgr_scan_scaffold(source: *const c_char, out: *mut CgrScanReport) -> CgrStatus {
    guard(|| {
        let source = str_arg(source, "source")?;
        let out = out_arg(out)?;
        let report = scaffold::audit_source(source);
        *out = CgrScanReport {
            literal_answer_hits: report.literal_answer_hits.len() as u32,
            call_sites: report.call_site_count as u32,
            has_return_contract: report.has_return_contract,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_maps_panics_and_errors() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let status = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(status, CgrStatus::Panic);
        assert_eq!(
            unsafe { CStr::from_ptr(cgr_last_error_message()) }.to_str().unwrap(),
            "internal panic"
        );

        assert_eq!(guard(|| Err(Failure(CgrStatus::Io, "a\0b".into()))), CgrStatus::Io);
        assert_eq!(unsafe { CStr::from_ptr(cgr_last_error_message()) }.to_str().unwrap(), "a b");
        assert_eq!(guard(|| Ok(())), CgrStatus::Ok);
    }

    #[test]
    fn analytics_errors_map_to_status() {
        assert_eq!(Failure::from(AnalyticsError::EmptyPartition { tau: 0.5 }).0, CgrStatus::EmptyInput);
        assert_eq!(Failure::from(AnalyticsError::DegenerateGap).0, CgrStatus::Undefined);
        assert_eq!(Failure::from(AnalyticsError::TooFewReplicates(3)).0, CgrStatus::InvalidArgument);
    }
}
