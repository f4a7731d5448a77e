//! C ABI over the trackdur evaluation toolkit.
//!
//! Sequences and reports cross the boundary as opaque handles owned by the
//! caller and released with their `*_free` function. Every entry point
//! returns a [`TdStatus`]; on failure [`td_last_error`] describes the problem
//! for the calling thread. Panics never unwind into C.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trackdur::config::ToolConfig;
use trackdur::datamodel::{EvalWindow, Sequence};
use trackdur::error::Error;
use trackdur::fpslab::controlled_window;
use trackdur::ingest::{emit_tracks, parse_tracks, read_tracks_file, ParseOptions};
use trackdur::matching::{hungarian, CostMatrix};
use trackdur::metrics::{class_report, ClassMetrics, MetricsReport};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument or input violated a precondition.
    InvalidArgument = 2,
    /// Malformed CSV, JSON or text encoding.
    ParseError = 3,
    /// A file could not be read or written.
    IoError = 4,
    /// The configuration was rejected.
    ConfigError = 5,
    /// The requested item does not exist, e.g. an unscored class.
    NotFound = 6,
    /// A bug inside the library; the call had no effect.
    Internal = 7,
}

/// Parsed tracks or detections.
pub struct TdSequence {
    inner: Sequence,
}

/// Result of an evaluation.
pub struct TdReport {
    inner: MetricsReport,
}

/// Headline numbers of one class or of the class average.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TdMetrics {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub loca: f64,
    pub ap: f64,
    pub avg_track_dur_seconds: f64,
}

impl From<&ClassMetrics> for TdMetrics {
    fn from(m: &ClassMetrics) -> Self {
        TdMetrics {
            hota: m.hota,
            deta: m.deta,
            assa: m.assa,
            loca: m.loca,
            ap: m.ap,
            avg_track_dur_seconds: m.avg_track_dur_seconds,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> TdStatus {
    match e {
        Error::Io { .. } | Error::Write(_) => TdStatus::IoError,
        Error::Parse { .. } | Error::FrameRegression { .. } => TdStatus::ParseError,
        Error::Config(_) => TdStatus::ConfigError,
        Error::InFile { source, .. } => status_of(source),
        _ => TdStatus::InvalidArgument,
    }
}

struct Fail(TdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TdStatus::NullArgument, format!("{what} is null"))
}

/// Run `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic inside trackdur");
            TdStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TdStatus::ParseError, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next trackdur call on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Read a track CSV file. Rows must carry track ids.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_read_csv(
    path: *const c_char,
    native_fps: f64,
    out: *mut *mut TdSequence,
) -> TdStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let seq = read_tracks_file(Path::new(path), &ParseOptions::tracks(native_fps))?;
        *out = Box::into_raw(Box::new(TdSequence { inner: seq }));
        Ok(())
    })
}

/// Parse track CSV text held in memory.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_parse_csv(
    text: *const c_char,
    native_fps: f64,
    out: *mut *mut TdSequence,
) -> TdStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let seq = parse_tracks(text.as_bytes(), &ParseOptions::tracks(native_fps))?;
        *out = Box::into_raw(Box::new(TdSequence { inner: seq }));
        Ok(())
    })
}

/// Render a sequence as track CSV; free the result with `td_string_free`.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_to_csv(seq: *const TdSequence, out: *mut *mut c_char) -> TdStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        let out = out_arg(out, "out")?;
        let mut buf = Vec::new();
        emit_tracks(&seq.inner, &mut buf)?;
        let text = String::from_utf8(buf).map_err(|_| Fail(TdStatus::Internal, "non-UTF-8 CSV".into()))?;
        *out = into_c_string(text);
        Ok(())
    })
}

/// Number of frames in the sequence; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_frame_count(seq: *const TdSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.frames.len())
}

/// Number of boxes in the sequence; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_detection_count(seq: *const TdSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.detection_count())
}

/// Release a sequence. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_sequence_free(seq: *mut TdSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Score `pred` against `gt`.
///
/// `config_json` may be null for defaults; otherwise it holds the same JSON
/// accepted by the command-line `--config` file. When `eval_fps` is positive
/// it overrides the config's evaluation rate and frames are taken every
/// `native_fps / eval_fps` steps.
#[no_mangle]
pub unsafe extern "C" fn td_evaluate(
    gt: *const TdSequence,
    pred: *const TdSequence,
    config_json: *const c_char,
    eval_fps: f64,
    out: *mut *mut TdReport,
) -> TdStatus {
    guard(|| {
        let gt = gt.as_ref().ok_or_else(|| null("gt"))?;
        let pred = pred.as_ref().ok_or_else(|| null("pred"))?;
        let out = out_arg(out, "out")?;
        let mut cfg = if config_json.is_null() {
            ToolConfig::default()
        } else {
            ToolConfig::from_json(str_arg(config_json, "config_json")?)?
        };
        cfg.native_fps = gt.inner.native_fps;
        if eval_fps > 0.0 {
            cfg.eval_fps = Some(eval_fps);
        }
        cfg.validate()?;
        let window = match cfg.eval_fps {
            Some(r) => controlled_window(&gt.inner, cfg.native_fps, r)?,
            None => EvalWindow::full(&gt.inner)?,
        };
        let report = class_report(&gt.inner, &pred.inner, &window, &cfg.report_options())?;
        *out = Box::into_raw(Box::new(TdReport { inner: report }));
        Ok(())
    })
}

/// Class-averaged metrics. `NotFound` when the window held no ground truth.
#[no_mangle]
pub unsafe extern "C" fn td_report_average(report: *const TdReport, out: *mut TdMetrics) -> TdStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out_arg(out, "out")?;
        let avg = report
            .inner
            .class_average
            .as_ref()
            .ok_or_else(|| Fail(TdStatus::NotFound, "no ground truth in the window".into()))?;
        *out = avg.into();
        Ok(())
    })
}

/// Metrics of one class. `NotFound` when the class was not scored.
#[no_mangle]
pub unsafe extern "C" fn td_report_class(
    report: *const TdReport,
    class_id: u32,
    out: *mut TdMetrics,
) -> TdStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out_arg(out, "out")?;
        let row = report
            .inner
            .per_class
            .get(&class_id)
            .ok_or_else(|| Fail(TdStatus::NotFound, format!("class {class_id} was not scored")))?;
        *out = row.into();
        Ok(())
    })
}

/// Number of frames the report was scored on; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn td_report_window_frames(report: *const TdReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.window.frames)
}

/// Full report as JSON; free the result with `td_string_free`.
#[no_mangle]
pub unsafe extern "C" fn td_report_json(report: *const TdReport, out: *mut *mut c_char) -> TdStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out_arg(out, "out")?;
        *out = into_c_string(report.inner.to_json());
        Ok(())
    })
}

/// Release a report. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_report_free(report: *mut TdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Minimum-cost assignment of a row-major `rows x cols` matrix.
///
/// Writes the assigned column of each row to `row_to_col` (length `rows`),
/// or `SIZE_MAX` for rows left out when `rows > cols`.
#[no_mangle]
pub unsafe extern "C" fn td_hungarian(
    cost: *const f64,
    rows: usize,
    cols: usize,
    row_to_col: *mut usize,
) -> TdStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(TdStatus::InvalidArgument, "matrix size overflows".into()))?;
        if rows == 0 {
            return Ok(());
        }
        if row_to_col.is_null() {
            return Err(null("row_to_col"));
        }
        let data = if len == 0 {
            Vec::new()
        } else if cost.is_null() {
            return Err(null("cost"));
        } else {
            std::slice::from_raw_parts(cost, len).to_vec()
        };
        let out = std::slice::from_raw_parts_mut(row_to_col, rows);
        out.fill(usize::MAX);
        if cols == 0 {
            return Ok(());
        }
        let matrix = CostMatrix::new(rows, cols, data)?;
        for (r, c) in hungarian(&matrix) {
            out[r] = c;
        }
        Ok(())
    })
}
