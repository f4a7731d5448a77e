//! Low frame-rate robustness protocol.
//!
//! Tracker outputs produced at reduced rates are all scored on one controlled
//! window whose frames exist at every rate, so that lower rates are not
//! rewarded merely for scoring fewer frames. Subsampling is anchored at frame
//! index 0, which makes the windows of all divisor rates nested.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{EvalWindow, Sequence};
use crate::error::{Error, Result};
use crate::metrics::{class_report, pct, secs, MetricsReport, ReportOptions, WindowInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub native_fps: f64,
    pub inference_rates: Vec<f64>,
    pub eval_fps: f64,
    pub report: ReportOptions,
}

fn integral_ratio(num: f64, den: f64) -> Option<u64> {
    if !(num.is_finite() && den.is_finite() && num > 0.0 && den > 0.0) {
        return None;
    }
    let r = num / den;
    (r >= 1.0 && r.fract() == 0.0).then_some(r as u64)
}

/// Keep-one-of-`n` stride realizing `rate` from `native_fps`.
pub fn stride_for_rate(native_fps: f64, rate: f64) -> Result<u64> {
    if !(native_fps.is_finite() && native_fps > 0.0 && rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(format!("rates must be positive: native {native_fps}, target {rate}")));
    }
    let n = (native_fps / rate).round().max(1.0);
    if native_fps.fract() != 0.0 || (native_fps as u64) % (n as u64) != 0 {
        return Err(Error::invalid(format!(
            "{rate} fps is not a keep-one-of-n rate of {native_fps} fps"
        )));
    }
    Ok(n as u64)
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.inference_rates.is_empty() {
            return Err(Error::invalid("no inference rates given"));
        }
        for &r in &self.inference_rates {
            stride_for_rate(self.native_fps, r)?;
        }
        let min_rate = self.inference_rates.iter().copied().fold(f64::INFINITY, f64::min);
        if self.eval_fps > min_rate {
            return Err(Error::invalid(format!(
                "evaluation rate {} exceeds the lowest inference rate {min_rate}",
                self.eval_fps
            )));
        }
        self.report.validate()
    }
}

/// Keep frames whose index is a multiple of `n` times the current stride.
pub fn stride_subsample(seq: &Sequence, n: u64) -> Sequence {
    let n = n.max(1);
    let stride = seq.frame_stride.max(1) * n;
    Sequence {
        frames: seq
            .frames
            .iter()
            .filter(|f| f.index % stride == 0)
            .cloned()
            .collect(),
        native_fps: seq.native_fps,
        scene_name: seq.scene_name.clone(),
        frame_stride: stride,
    }
}

/// Every `native_fps / eval_fps`-th frame of the ground-truth span, with
/// `F0 = eval_fps`.
pub fn controlled_window(gt: &Sequence, native_fps: f64, eval_fps: f64) -> Result<EvalWindow> {
    let step = integral_ratio(native_fps, eval_fps).ok_or_else(|| {
        Error::invalid(format!(
            "evaluation rate {eval_fps} fps does not divide the native rate {native_fps} fps"
        ))
    })?;
    let (first, last) = gt
        .span()
        .ok_or_else(|| Error::invalid("ground truth has no frames"))?;
    let start = first.div_ceil(step) * step;
    let indices: Vec<u64> = (start..=last).step_by(step as usize).collect();
    EvalWindow::new(indices, eval_fps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate: f64,
    pub stride: u64,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub window: WindowInfo,
    pub rows: Vec<SweepRow>,
}

fn format_missing(frames: &[u64]) -> String {
    const SHOWN: usize = 8;
    let mut s = frames
        .iter()
        .take(SHOWN)
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    if frames.len() > SHOWN {
        let _ = write!(s, ", ... ({} total)", frames.len());
    }
    s
}

/// Score each rate's tracker output on the same controlled window.
/// Rows come out ordered by descending rate.
pub fn fps_sweep(gt: &Sequence, outputs: &[(f64, Sequence)], spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let window = controlled_window(gt, spec.native_fps, spec.eval_fps)?;
    for (rate, _) in outputs {
        if !spec.inference_rates.contains(rate) {
            return Err(Error::invalid(format!("tracker output at {rate} fps is not in the sweep")));
        }
    }
    let mut ordered: Vec<&(f64, Sequence)> = outputs.iter().collect();
    ordered.sort_by(|a, b| b.0.total_cmp(&a.0));

    let rows = ordered
        .par_iter()
        .map(|(rate, pred)| {
            let stride = stride_for_rate(spec.native_fps, *rate)?.max(pred.frame_stride);
            let missing: Vec<u64> = window
                .frame_indices
                .iter()
                .copied()
                .filter(|f| f % stride != 0)
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingWindowFrames {
                    rate: *rate,
                    missing: format_missing(&missing),
                });
            }
            Ok(SweepRow {
                rate: *rate,
                stride,
                report: class_report(gt, pred, &window, &spec.report)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        window: WindowInfo::of(&window),
        rows,
    })
}

impl SweepTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    /// Rate metrics are class averages; the duration column follows
    /// [`MetricsReport::headline_track_dur`].
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let w = &self.window;
        let _ = writeln!(
            out,
            "controlled window: {} frames ({}..={}), F0 = {} fps",
            w.frames, w.first_frame, w.last_frame, w.f0
        );
        let _ = writeln!(
            out,
            "{:>13} {:>6} {:>6} {:>6} {:>6} {:>16}",
            "Inference FPS", "HOTA", "DetA", "AssA", "LocA", "AvgTrackDur (s)"
        );
        for row in &self.rows {
            match &row.report.class_average {
                Some(avg) => {
                    let dur = row.report.headline_track_dur().unwrap_or(0.0);
                    let _ = writeln!(
                        out,
                        "{:>13} {:>6} {:>6} {:>6} {:>6} {:>16}",
                        row.rate,
                        pct(avg.hota),
                        pct(avg.deta),
                        pct(avg.assa),
                        pct(avg.loca),
                        secs(dur)
                    );
                }
                None => {
                    let _ = writeln!(out, "{:>13} (no ground truth in window)", row.rate);
                }
            }
        }
        out
    }
}
