//! HOTA family, detection AP and mean identity-run duration, per class and
//! class-averaged.
//!
//! Every metric is built on the same per-frame matches from
//! [`crate::matching`]. Classes are scored independently: matching, identity
//! bookkeeping and runs never cross class boundaries.

mod ap;
mod hota;
mod roi;
mod trackdur;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{ClassId, Detection, EvalWindow, Sequence};
use crate::error::{Error, Result};
use crate::matching::{FrameMatchSet, FrameSimilarity, SimilaritySpec};

pub use ap::{detection_ap_frames, AP_RECALL_POINTS};
pub use hota::{association_ledger, hota_at_alpha, integrate, AlphaScores, AssociationLedger};
pub use roi::{postprocess_filter, Roi};
pub use trackdur::{avg_track_dur, extract_runs, match_indicator_series, track_runs, Run, RunRecord};

/// `{0.05, 0.10, ..., 0.95}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub similarity: SimilaritySpec,
    pub alpha_grid: Vec<f64>,
    /// Gate for the run-duration metric.
    pub dur_alpha: f64,
    /// Gate for detection AP.
    pub ap_alpha: f64,
    /// Class whose run duration is singled out in the report.
    pub primary_class: Option<ClassId>,
    pub class_labels: BTreeMap<ClassId, String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            similarity: SimilaritySpec::default(),
            alpha_grid: default_alpha_grid(),
            dur_alpha: 0.5,
            ap_alpha: 0.5,
            primary_class: None,
            class_labels: BTreeMap::new(),
        }
    }
}

impl ReportOptions {
    pub fn validate(&self) -> Result<()> {
        self.similarity.validate()?;
        if self.alpha_grid.is_empty() {
            return Err(Error::Config("alpha grid is empty".into()));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Config(format!("alpha grid value {a} outside (0, 1)")));
        }
        for (name, a) in [("dur_alpha", self.dur_alpha), ("ap_alpha", self.ap_alpha)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub loca: f64,
    pub ap: f64,
    pub avg_track_dur_seconds: f64,
    pub per_alpha: Vec<AlphaScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub frames: usize,
    pub first_frame: u64,
    pub last_frame: u64,
    pub f0: f64,
    pub duration_seconds: f64,
}

impl WindowInfo {
    pub fn of(window: &EvalWindow) -> Self {
        WindowInfo {
            frames: window.len(),
            first_frame: window.frame_indices.first().copied().unwrap_or(0),
            last_frame: window.frame_indices.last().copied().unwrap_or(0),
            f0: window.f0,
            duration_seconds: window.duration_seconds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: BTreeMap<ClassId, ClassMetrics>,
    /// Unweighted mean over classes present in the ground truth; `None` when
    /// the window holds no ground truth at all.
    pub class_average: Option<ClassMetrics>,
    pub primary_class: Option<ClassId>,
    pub primary_avg_track_dur_seconds: Option<f64>,
    pub window: WindowInfo,
    pub alpha_grid: Vec<f64>,
    pub dur_alpha: f64,
    pub ap_alpha: f64,
    pub ap_interpolation: String,
    pub similarity: SimilaritySpec,
    /// Prediction classes with no ground truth in the window; not scored.
    pub dropped_pred_classes: Vec<ClassId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub class_labels: BTreeMap<ClassId, String>,
}

/// One class's detections at every window frame.
pub(crate) struct ClassFrames {
    pub gt: Vec<Vec<Detection>>,
    pub pred: Vec<Vec<Detection>>,
}

impl ClassFrames {
    pub fn collect(
        gt: &Sequence,
        pred: &Sequence,
        window: &EvalWindow,
        class: ClassId,
        need_ids: bool,
    ) -> Result<Self> {
        let pick = |seq: &Sequence, frame: u64, side: &'static str| -> Result<Vec<Detection>> {
            let dets: Vec<Detection> = seq
                .detections_at(frame)
                .iter()
                .filter(|d| d.class_id == class)
                .copied()
                .collect();
            if need_ids && dets.iter().any(|d| d.track_id.is_none()) {
                return Err(Error::MissingTrackId { frame, side });
            }
            Ok(dets)
        };
        let mut out = ClassFrames {
            gt: Vec::with_capacity(window.len()),
            pred: Vec::with_capacity(window.len()),
        };
        for &f in &window.frame_indices {
            out.gt.push(pick(gt, f, "ground-truth")?);
            out.pred.push(pick(pred, f, "predicted")?);
        }
        Ok(out)
    }

    fn similarities(&self, spec: &SimilaritySpec) -> Result<Vec<FrameSimilarity>> {
        self.gt
            .par_iter()
            .zip(self.pred.par_iter())
            .map(|(g, p)| FrameSimilarity::compute(g, p, spec))
            .collect()
    }

    fn frames(&self) -> impl Iterator<Item = (&[Detection], &[Detection])> {
        self.gt.iter().map(Vec::as_slice).zip(self.pred.iter().map(Vec::as_slice))
    }
}

fn matches_at(sims: &[FrameSimilarity], alpha: f64) -> Vec<FrameMatchSet> {
    sims.par_iter().map(|s| s.matches(alpha)).collect()
}

fn score_alpha(sims: &[FrameSimilarity], alpha: f64) -> AlphaScores {
    let m = matches_at(sims, alpha);
    hota_at_alpha(&association_ledger(&m), &m, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotaSummary {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub loca: f64,
}

/// HOTA, DetA, AssA and LocA of one class averaged over `alpha_grid`.
pub fn hota(
    gt: &Sequence,
    pred: &Sequence,
    class: ClassId,
    window: &EvalWindow,
    spec: &SimilaritySpec,
    alpha_grid: &[f64],
) -> Result<(HotaSummary, Vec<AlphaScores>)> {
    if alpha_grid.is_empty() {
        return Err(Error::invalid("alpha grid is empty"));
    }
    let frames = ClassFrames::collect(gt, pred, window, class, true)?;
    let sims = frames.similarities(spec)?;
    let per_alpha: Vec<AlphaScores> = alpha_grid.par_iter().map(|&a| score_alpha(&sims, a)).collect();
    let (hota, deta, assa, loca) = integrate(&per_alpha);
    Ok((HotaSummary { hota, deta, assa, loca }, per_alpha))
}

/// Matches of one class at one gate, one entry per window frame.
pub fn window_matches(
    gt: &Sequence,
    pred: &Sequence,
    class: ClassId,
    window: &EvalWindow,
    spec: &SimilaritySpec,
    alpha: f64,
) -> Result<Vec<FrameMatchSet>> {
    let frames = ClassFrames::collect(gt, pred, window, class, true)?;
    Ok(matches_at(&frames.similarities(spec)?, alpha))
}

/// Detection AP of one class; predictions need not carry track ids.
pub fn detection_ap(
    gt: &Sequence,
    pred: &Sequence,
    class: ClassId,
    window: &EvalWindow,
    spec: &SimilaritySpec,
    alpha: f64,
) -> Result<f64> {
    let frames = ClassFrames::collect(gt, pred, window, class, false)?;
    Ok(detection_ap_frames(frames.frames(), alpha, spec))
}

fn evaluate_class(
    gt: &Sequence,
    pred: &Sequence,
    class: ClassId,
    window: &EvalWindow,
    opts: &ReportOptions,
) -> Result<ClassMetrics> {
    let frames = ClassFrames::collect(gt, pred, window, class, true)?;
    let sims = frames.similarities(&opts.similarity)?;
    let per_alpha: Vec<AlphaScores> = opts
        .alpha_grid
        .par_iter()
        .map(|&a| score_alpha(&sims, a))
        .collect();
    let (hota, deta, assa, loca) = integrate(&per_alpha);
    let dur = avg_track_dur(&matches_at(&sims, opts.dur_alpha), window.f0);
    let ap = detection_ap_frames(frames.frames(), opts.ap_alpha, &opts.similarity);
    Ok(ClassMetrics {
        hota,
        deta,
        assa,
        loca,
        ap,
        avg_track_dur_seconds: dur,
        per_alpha,
    })
}

/// Unweighted mean of per-class rows, in class order.
pub fn average_rows<'a>(rows: impl IntoIterator<Item = &'a ClassMetrics>) -> Option<ClassMetrics> {
    let rows: Vec<&ClassMetrics> = rows.into_iter().collect();
    let first = rows.first()?;
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&ClassMetrics) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
    let per_alpha = (0..first.per_alpha.len())
        .map(|k| AlphaScores {
            alpha: first.per_alpha[k].alpha,
            hota: mean(&|r| r.per_alpha[k].hota),
            deta: mean(&|r| r.per_alpha[k].deta),
            assa: mean(&|r| r.per_alpha[k].assa),
            loca: mean(&|r| r.per_alpha[k].loca),
        })
        .collect();
    Some(ClassMetrics {
        hota: mean(&|r| r.hota),
        deta: mean(&|r| r.deta),
        assa: mean(&|r| r.assa),
        loca: mean(&|r| r.loca),
        ap: mean(&|r| r.ap),
        avg_track_dur_seconds: mean(&|r| r.avg_track_dur_seconds),
        per_alpha,
    })
}

/// Classes with ground truth inside the window.
pub(crate) fn window_classes(seq: &Sequence, window: &EvalWindow) -> Vec<ClassId> {
    let mut classes: Vec<ClassId> = window
        .frame_indices
        .iter()
        .flat_map(|&f| seq.detections_at(f).iter().map(|d| d.class_id))
        .collect();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// Score every ground-truth class and average them.
pub fn class_report(
    gt: &Sequence,
    pred: &Sequence,
    window: &EvalWindow,
    opts: &ReportOptions,
) -> Result<MetricsReport> {
    opts.validate()?;
    window.check_against(gt)?;
    let classes = window_classes(gt, window);
    let dropped: Vec<ClassId> = window_classes(pred, window)
        .into_iter()
        .filter(|c| classes.binary_search(c).is_err())
        .collect();
    if !dropped.is_empty() {
        log::warn!("predictions of classes {dropped:?} have no ground truth in the window and are ignored");
    }
    let rows: Vec<ClassMetrics> = classes
        .par_iter()
        .map(|&c| evaluate_class(gt, pred, c, window, opts))
        .collect::<Result<_>>()?;
    let per_class: BTreeMap<ClassId, ClassMetrics> = classes.into_iter().zip(rows).collect();
    Ok(assemble_report(per_class, window, opts, dropped))
}

pub(crate) fn assemble_report(
    per_class: BTreeMap<ClassId, ClassMetrics>,
    window: &EvalWindow,
    opts: &ReportOptions,
    dropped_pred_classes: Vec<ClassId>,
) -> MetricsReport {
    let class_average = average_rows(per_class.values());
    let primary_avg_track_dur_seconds = opts
        .primary_class
        .and_then(|c| per_class.get(&c))
        .map(|r| r.avg_track_dur_seconds);
    MetricsReport {
        per_class,
        class_average,
        primary_class: opts.primary_class,
        primary_avg_track_dur_seconds,
        window: WindowInfo::of(window),
        alpha_grid: opts.alpha_grid.clone(),
        dur_alpha: opts.dur_alpha,
        ap_alpha: opts.ap_alpha,
        ap_interpolation: format!("{AP_RECALL_POINTS}-point"),
        similarity: opts.similarity,
        dropped_pred_classes,
        class_labels: opts.class_labels.clone(),
    }
}

pub fn pct(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

pub fn secs(v: f64) -> String {
    format!("{v:.1}")
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn class_label(&self, class: ClassId) -> String {
        self.class_labels
            .get(&class)
            .cloned()
            .unwrap_or_else(|| format!("class {class}"))
    }

    /// Run duration shown in summary rows: the primary class when one is
    /// configured, else the class average.
    pub fn headline_track_dur(&self) -> Option<f64> {
        self.primary_avg_track_dur_seconds
            .or(self.class_average.as_ref().map(|r| r.avg_track_dur_seconds))
    }

    /// Plain-text table: rate metrics in percent, durations in seconds.
    pub fn render_table(&self, per_class: bool) -> String {
        let mut out = String::new();
        let w = &self.window;
        let _ = writeln!(
            out,
            "window: {} frames ({}..={}), F0 = {} fps, {} s",
            w.frames,
            w.first_frame,
            w.last_frame,
            w.f0,
            secs(w.duration_seconds)
        );
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>6} {:>6} {:>6} {:>6} {:>16}",
            "Class", "HOTA", "DetA", "AssA", "LocA", "AP", "AvgTrackDur (s)"
        );
        let line = |out: &mut String, name: &str, r: &ClassMetrics, dur: f64| {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>6} {:>6} {:>6} {:>6} {:>16}",
                name,
                pct(r.hota),
                pct(r.deta),
                pct(r.assa),
                pct(r.loca),
                pct(r.ap),
                secs(dur)
            );
        };
        if per_class {
            for (&c, r) in &self.per_class {
                line(&mut out, &self.class_label(c), r, r.avg_track_dur_seconds);
            }
        }
        match &self.class_average {
            Some(avg) => {
                let dur = self.headline_track_dur().unwrap_or(avg.avg_track_dur_seconds);
                let name = match self.primary_class {
                    Some(c) if self.primary_avg_track_dur_seconds.is_some() => {
                        format!("average [{}]", self.class_label(c))
                    }
                    _ => "average".to_string(),
                };
                line(&mut out, &name, avg, dur);
            }
            None => out.push_str("no ground truth in window\n"),
        }
        if !self.dropped_pred_classes.is_empty() {
            let _ = writeln!(out, "ignored prediction classes: {:?}", self.dropped_pred_classes);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Box3D, Frame};

    fn det(class: ClassId, id: u64, x: f64) -> Detection {
        Detection::new(Box3D::new([x, 0.0, 0.9], 1.0, 1.0, 1.8, 0.0).unwrap(), class, 0.9, Some(id))
    }

    fn seq(frames: Vec<Vec<Detection>>) -> Sequence {
        Sequence::new("m", 1.0).with_frames(
            frames
                .into_iter()
                .enumerate()
                .map(|(i, d)| Frame::new(i as u64, d))
                .collect(),
        )
    }

    #[test]
    fn grid_is_nineteen_points() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[18], 0.95);
    }

    #[test]
    fn perfect_tracker_scores_one() {
        let gt = seq((0..5).map(|t| vec![det(0, 1, t as f64), det(0, 2, 10.0)]).collect());
        let w = EvalWindow::full(&gt).unwrap();
        let r = class_report(&gt, &gt, &w, &ReportOptions::default()).unwrap();
        let avg = r.class_average.unwrap();
        assert_eq!(
            (avg.hota, avg.deta, avg.assa, avg.loca, avg.ap),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(avg.avg_track_dur_seconds, 5.0);
    }

    #[test]
    fn uniform_shift_zeroes_high_gates() {
        // 0.6 m shift under center distance with d_max = 1: similarity 0.4
        let gt = seq((0..4).map(|_| vec![det(0, 1, 0.0)]).collect());
        let pred = seq((0..4).map(|_| vec![det(0, 1, 0.6)]).collect());
        let w = EvalWindow::full(&gt).unwrap();
        let spec = SimilaritySpec::center_distance(1.0);
        let (summary, per_alpha) = hota(&gt, &pred, 0, &w, &spec, &default_alpha_grid()).unwrap();
        let s = 1.0 - 0.6;
        let passing = per_alpha.iter().filter(|a| a.alpha <= s).count();
        // 0.05 .. 0.40 pass (8 gates)
        assert_eq!(passing, 8);
        for a in &per_alpha {
            if a.alpha <= s {
                assert_eq!((a.hota, a.deta, a.assa), (1.0, 1.0, 1.0));
                assert!((a.loca - s).abs() < 1e-15);
            } else {
                assert_eq!((a.hota, a.deta, a.assa, a.loca), (0.0, 0.0, 0.0, 0.0));
            }
        }
        assert!((summary.hota - 8.0 / 19.0).abs() < 1e-15);
        assert!((summary.loca - 8.0 * s / 19.0).abs() < 1e-15);
    }

    #[test]
    fn two_classes_one_perfect_one_empty() {
        let gt = seq((0..3).map(|t| vec![det(0, 1, t as f64), det(1, 1, 20.0)]).collect());
        let pred = seq((0..3).map(|t| vec![det(0, 1, t as f64)]).collect());
        let w = EvalWindow::full(&gt).unwrap();
        let r = class_report(&gt, &pred, &w, &ReportOptions::default()).unwrap();
        assert_eq!(r.per_class.len(), 2);
        assert_eq!(r.class_average.as_ref().unwrap().hota, 0.5);
        let single = class_report(&gt, &gt, &w, &ReportOptions::default()).unwrap();
        assert_eq!(single.class_average.unwrap().hota, 1.0);
    }

    #[test]
    fn prediction_only_classes_are_dropped() {
        let gt = seq(vec![vec![det(0, 1, 0.0)]]);
        let pred = seq(vec![vec![det(0, 1, 0.0), det(5, 1, 3.0)]]);
        let w = EvalWindow::full(&gt).unwrap();
        let r = class_report(&gt, &pred, &w, &ReportOptions::default()).unwrap();
        assert_eq!(r.dropped_pred_classes, vec![5]);
        assert_eq!(r.class_average.unwrap().hota, 1.0);
    }

    #[test]
    fn primary_class_duration_is_reported() {
        let gt = seq((0..4).map(|t| vec![det(0, 1, t as f64), det(2, 9, 30.0)]).collect());
        let mut pred = gt.clone();
        pred.frames[2].detections[1].track_id = Some(10);
        let w = EvalWindow::full(&gt).unwrap();
        let opts = ReportOptions { primary_class: Some(2), ..ReportOptions::default() };
        let r = class_report(&gt, &pred, &w, &opts).unwrap();
        // runs for class 2: [0,1] id 9, [2] id 10, [3] id 9
        assert_eq!(r.primary_avg_track_dur_seconds, Some(4.0 / 3.0));
        assert_eq!(r.per_class[&0].avg_track_dur_seconds, 4.0);
        let table = r.render_table(true);
        assert!(table.contains("average [class 2]"));
        assert!(table.contains("100.0"));
    }

    #[test]
    fn json_is_deterministic_and_parses_back() {
        let gt = seq((0..3).map(|t| vec![det(0, 1, t as f64)]).collect());
        let w = EvalWindow::full(&gt).unwrap();
        let r = class_report(&gt, &gt, &w, &ReportOptions::default()).unwrap();
        let a = r.to_json();
        assert_eq!(a, class_report(&gt, &gt, &w, &ReportOptions::default()).unwrap().to_json());
        let back: MetricsReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn window_outside_ground_truth_is_rejected() {
        let gt = seq(vec![vec![det(0, 1, 0.0)]]);
        let w = EvalWindow::new(vec![0, 5], 1.0).unwrap();
        assert!(class_report(&gt, &gt, &w, &ReportOptions::default()).is_err());
    }

    #[test]
    fn detector_only_predictions_get_ap() {
        let gt = seq(vec![vec![det(0, 1, 0.0)]]);
        let mut pred = gt.clone();
        pred.frames[0].detections[0].track_id = None;
        let w = EvalWindow::full(&gt).unwrap();
        let spec = SimilaritySpec::bev_iou();
        assert_eq!(detection_ap(&gt, &pred, 0, &w, &spec, 0.5).unwrap(), 1.0);
        assert!(class_report(&gt, &pred, &w, &ReportOptions::default()).is_err());
        let empty = seq(vec![vec![]]);
        assert_eq!(detection_ap(&gt, &empty, 0, &w, &spec, 0.5).unwrap(), 0.0);
    }
}
