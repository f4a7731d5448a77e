//! Independent brute-force evaluator used to cross-check the metrics path.
//!
//! Deliberately naive: matchings are found by enumerating every gated
//! partial assignment, and every count is taken straight from its
//! definition. Nothing here calls into `matching` or `metrics` beyond the
//! shared report types.

use std::collections::{BTreeMap, BTreeSet};

use crate::datamodel::{Box3D, ClassId, Detection, EvalWindow, Sequence, TrackId};
use crate::error::{Error, Result};
use crate::matching::SimilarityMode;
use crate::metrics::{AlphaScores, ClassMetrics, MetricsReport, ReportOptions, WindowInfo};

/// Largest number of detections per side a frame may hold.
pub const ENUMERATION_BOUND: usize = 6;

const TIE_EPS: f64 = 1e-9;

fn sim(a: &Box3D, b: &Box3D, opts: &ReportOptions) -> f64 {
    match opts.similarity.mode {
        SimilarityMode::BevIou => {
            let (ax0, ax1) = (a.x - a.length / 2.0, a.x + a.length / 2.0);
            let (ay0, ay1) = (a.y - a.width / 2.0, a.y + a.width / 2.0);
            let (bx0, bx1) = (b.x - b.length / 2.0, b.x + b.length / 2.0);
            let (by0, by1) = (b.y - b.width / 2.0, b.y + b.width / 2.0);
            let w = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
            let h = (ay1.min(by1) - ay0.max(by0)).max(0.0);
            let inter = w * h;
            if inter == 0.0 {
                return 0.0;
            }
            let ua = (ax1 - ax0) * (ay1 - ay0);
            let ub = (bx1 - bx0) * (by1 - by0);
            (inter / (ua + ub - inter)).min(1.0)
        }
        SimilarityMode::CenterDistance => {
            let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            let s = 1.0 - d / opts.similarity.d_max;
            if s > 0.0 {
                s
            } else {
                0.0
            }
        }
    }
}

/// Exhaustive search over gated partial matchings of one frame.
///
/// Maximizes total similarity; among optimal matchings (within a 1e-9
/// tolerance) picks the one whose per-ground-truth choices, taken in track
/// id order, are lexicographically smallest with "unmatched" ranking after
/// every prediction. Returns `(gt id, pred id, similarity)` triples.
pub fn oracle_match_frame(
    gt: &[(TrackId, Box3D)],
    pred: &[(TrackId, Box3D)],
    alpha: f64,
    opts: &ReportOptions,
) -> Vec<(TrackId, TrackId, f64)> {
    let mut g: Vec<&(TrackId, Box3D)> = gt.iter().collect();
    g.sort_by_key(|x| x.0);
    let mut p: Vec<&(TrackId, Box3D)> = pred.iter().collect();
    p.sort_by_key(|x| x.0);
    let s: Vec<Vec<f64>> = g
        .iter()
        .map(|a| p.iter().map(|b| sim(&a.1, &b.1, opts)).collect())
        .collect();

    struct Search<'a> {
        s: &'a [Vec<f64>],
        alpha: f64,
        used: Vec<bool>,
        choice: Vec<Option<usize>>,
        best: Option<(f64, Vec<Option<usize>>)>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, total: f64) {
            if i == self.s.len() {
                let better = match &self.best {
                    None => true,
                    // candidates arrive in lexicographic order, so an equal
                    // total never displaces the incumbent
                    Some((b, _)) => total > *b + TIE_EPS,
                };
                if better {
                    self.best = Some((total, self.choice.clone()));
                }
                return;
            }
            for j in 0..self.used.len() {
                if self.used[j] || self.s[i][j] < self.alpha {
                    continue;
                }
                self.used[j] = true;
                self.choice[i] = Some(j);
                self.go(i + 1, total + self.s[i][j]);
                self.used[j] = false;
            }
            self.choice[i] = None;
            self.go(i + 1, total);
        }
    }
    let mut search = Search {
        s: &s,
        alpha,
        used: vec![false; p.len()],
        choice: vec![None; g.len()],
        best: None,
    };
    search.go(0, 0.0);
    let (_, choice) = search.best.expect("the empty matching always exists");
    choice
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| (g[i].0, p[j].0, s[i][j])))
        .collect()
}

struct Scene {
    /// Per window frame: ground truth and predictions of one class.
    gt: Vec<Vec<Detection>>,
    pred: Vec<Vec<Detection>>,
}

fn ids(dets: &[Detection], frame: u64, side: &'static str) -> Result<Vec<(TrackId, Box3D)>> {
    dets.iter()
        .map(|d| {
            d.track_id
                .map(|id| (id, d.bbox))
                .ok_or(Error::MissingTrackId { frame, side })
        })
        .collect()
}

fn score_alpha(matches: &[Vec<(TrackId, TrackId, f64)>], scene: &Scene, alpha: f64) -> AlphaScores {
    let gt_count: usize = scene.gt.iter().map(Vec::len).sum();
    let pred_count: usize = scene.pred.iter().map(Vec::len).sum();
    let tp: usize = matches.iter().map(Vec::len).sum();
    let fn_ = gt_count - tp;
    let fp = pred_count - tp;
    if gt_count + pred_count == 0 {
        return AlphaScores { alpha, hota: 1.0, deta: 1.0, assa: 1.0, loca: 1.0 };
    }
    if tp == 0 {
        return AlphaScores { alpha, hota: 0.0, deta: 0.0, assa: 0.0, loca: 0.0 };
    }
    let deta = tp as f64 / (tp + fn_ + fp) as f64;

    // every distinct matched identity pair, scored from scratch
    let pairs: BTreeSet<(TrackId, TrackId)> = matches
        .iter()
        .flat_map(|m| m.iter().map(|&(g, p, _)| (g, p)))
        .collect();
    let mut assa_sum = 0.0;
    for &(g, p) in &pairs {
        let mut tpa = 0usize;
        let mut fna = 0usize;
        let mut fpa = 0usize;
        for (t, m) in matches.iter().enumerate() {
            let together = m.iter().any(|&(a, b, _)| a == g && b == p);
            let g_here = scene.gt[t].iter().any(|d| d.track_id == Some(g));
            let p_here = scene.pred[t].iter().any(|d| d.track_id == Some(p));
            if together {
                tpa += 1;
            } else {
                if g_here {
                    fna += 1;
                }
                if p_here {
                    fpa += 1;
                }
            }
        }
        let a = tpa as f64 / (tpa + fna + fpa) as f64;
        assa_sum += tpa as f64 * a;
    }
    let assa = assa_sum / tp as f64;
    let loca = matches.iter().flatten().map(|m| m.2).sum::<f64>() / tp as f64;
    AlphaScores {
        alpha,
        hota: (deta * assa).sqrt(),
        deta,
        assa,
        loca,
    }
}

fn run_duration(matches: &[Vec<(TrackId, TrackId, f64)>], f0: f64) -> f64 {
    let trackers: BTreeSet<TrackId> = matches.iter().flatten().map(|m| m.1).collect();
    let mut steps = 0usize;
    let mut runs = 0usize;
    for k in trackers {
        let series: Vec<bool> = matches.iter().map(|m| m.iter().any(|x| x.1 == k)).collect();
        let mut prev = false;
        for &on in &series {
            if on {
                steps += 1;
                if !prev {
                    runs += 1;
                }
            }
            prev = on;
        }
    }
    if runs == 0 {
        0.0
    } else {
        steps as f64 / (runs as f64 * f0)
    }
}

fn ranking_key(a: &Detection, b: &Detection) -> std::cmp::Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.track_id.cmp(&b.track_id))
        .then(a.bbox.x.total_cmp(&b.bbox.x))
        .then(a.bbox.y.total_cmp(&b.bbox.y))
        .then(a.bbox.z.total_cmp(&b.bbox.z))
        .then(a.bbox.length.total_cmp(&b.bbox.length))
        .then(a.bbox.width.total_cmp(&b.bbox.width))
}

fn average_precision(scene: &Scene, opts: &ReportOptions) -> f64 {
    let n_gt: usize = scene.gt.iter().map(Vec::len).sum();
    // (confidence, frame, rank in frame, hit)
    let mut outcomes: Vec<(f64, usize, usize, bool)> = Vec::new();
    for (t, (gt, pred)) in scene.gt.iter().zip(&scene.pred).enumerate() {
        let mut gts = gt.clone();
        gts.sort_by(|a, b| {
            a.track_id
                .cmp(&b.track_id)
                .then(a.bbox.x.total_cmp(&b.bbox.x))
                .then(a.bbox.y.total_cmp(&b.bbox.y))
        });
        let mut preds = pred.clone();
        preds.sort_by(ranking_key);
        let mut taken = vec![false; gts.len()];
        for (rank, p) in preds.iter().enumerate() {
            let mut pick: Option<usize> = None;
            for (k, g) in gts.iter().enumerate() {
                let s = sim(&g.bbox, &p.bbox, opts);
                if taken[k] || s < opts.ap_alpha {
                    continue;
                }
                if pick.is_none_or(|j| s > sim(&gts[j].bbox, &p.bbox, opts)) {
                    pick = Some(k);
                }
            }
            if let Some(k) = pick {
                taken[k] = true;
            }
            outcomes.push((p.confidence, t, rank, pick.is_some()));
        }
    }
    if n_gt == 0 {
        return if outcomes.is_empty() { 1.0 } else { 0.0 };
    }
    outcomes.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut points: Vec<(usize, f64)> = Vec::new(); // (tp so far, precision)
    let mut tp = 0;
    for (k, o) in outcomes.iter().enumerate() {
        tp += o.3 as usize;
        points.push((tp, tp as f64 / (k + 1) as f64));
    }
    let mut total = 0.0;
    for r in 0..=100usize {
        // best precision among points reaching recall r / 100
        let best = points
            .iter()
            .filter(|(tp, _)| tp * 100 >= r * n_gt)
            .map(|p| p.1)
            .fold(0.0f64, f64::max);
        total += best;
    }
    total / 101.0
}

fn class_metrics(scene: &Scene, window: &EvalWindow, opts: &ReportOptions) -> Result<ClassMetrics> {
    let mut frames = Vec::with_capacity(scene.gt.len());
    for (t, (g, p)) in scene.gt.iter().zip(&scene.pred).enumerate() {
        let f = window.frame_indices[t];
        for (count, _) in [(g.len(), "gt"), (p.len(), "pred")] {
            if count > ENUMERATION_BOUND {
                return Err(Error::EnumerationBound {
                    frame: f,
                    count,
                    bound: ENUMERATION_BOUND,
                });
            }
        }
        frames.push((ids(g, f, "ground-truth")?, ids(p, f, "predicted")?));
    }
    let match_at = |alpha: f64| -> Vec<Vec<(TrackId, TrackId, f64)>> {
        frames
            .iter()
            .map(|(g, p)| oracle_match_frame(g, p, alpha, opts))
            .collect()
    };
    let per_alpha: Vec<AlphaScores> = opts
        .alpha_grid
        .iter()
        .map(|&a| score_alpha(&match_at(a), scene, a))
        .collect();
    let n = per_alpha.len() as f64;
    Ok(ClassMetrics {
        hota: per_alpha.iter().map(|s| s.hota).sum::<f64>() / n,
        deta: per_alpha.iter().map(|s| s.deta).sum::<f64>() / n,
        assa: per_alpha.iter().map(|s| s.assa).sum::<f64>() / n,
        loca: per_alpha.iter().map(|s| s.loca).sum::<f64>() / n,
        ap: average_precision(scene, opts),
        avg_track_dur_seconds: run_duration(&match_at(opts.dur_alpha), window.f0),
        per_alpha,
    })
}

/// Brute-force counterpart of [`crate::metrics::class_report`].
pub fn oracle_metrics(
    gt: &Sequence,
    pred: &Sequence,
    window: &EvalWindow,
    opts: &ReportOptions,
) -> Result<MetricsReport> {
    let at = |seq: &Sequence, f: u64| -> Vec<Detection> {
        seq.frames
            .iter()
            .find(|fr| fr.index == f)
            .map(|fr| fr.detections.clone())
            .unwrap_or_default()
    };
    let classes_of = |seq: &Sequence| -> BTreeSet<ClassId> {
        window
            .frame_indices
            .iter()
            .flat_map(|&f| at(seq, f))
            .map(|d| d.class_id)
            .collect()
    };
    let gt_classes = classes_of(gt);
    let dropped: Vec<ClassId> = classes_of(pred).difference(&gt_classes).copied().collect();

    let mut per_class = BTreeMap::new();
    for &c in &gt_classes {
        let only = |dets: Vec<Detection>| dets.into_iter().filter(|d| d.class_id == c).collect();
        let scene = Scene {
            gt: window.frame_indices.iter().map(|&f| only(at(gt, f))).collect(),
            pred: window.frame_indices.iter().map(|&f| only(at(pred, f))).collect(),
        };
        per_class.insert(c, class_metrics(&scene, window, opts)?);
    }

    let class_average = (!per_class.is_empty()).then(|| {
        let n = per_class.len() as f64;
        let rows: Vec<&ClassMetrics> = per_class.values().collect();
        let avg = |f: &dyn Fn(&ClassMetrics) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        ClassMetrics {
            hota: avg(&|r| r.hota),
            deta: avg(&|r| r.deta),
            assa: avg(&|r| r.assa),
            loca: avg(&|r| r.loca),
            ap: avg(&|r| r.ap),
            avg_track_dur_seconds: avg(&|r| r.avg_track_dur_seconds),
            per_alpha: (0..opts.alpha_grid.len())
                .map(|k| AlphaScores {
                    alpha: opts.alpha_grid[k],
                    hota: avg(&|r| r.per_alpha[k].hota),
                    deta: avg(&|r| r.per_alpha[k].deta),
                    assa: avg(&|r| r.per_alpha[k].assa),
                    loca: avg(&|r| r.per_alpha[k].loca),
                })
                .collect(),
        }
    });
    let primary = opts
        .primary_class
        .and_then(|c| per_class.get(&c))
        .map(|r: &ClassMetrics| r.avg_track_dur_seconds);
    Ok(MetricsReport {
        per_class,
        class_average,
        primary_class: opts.primary_class,
        primary_avg_track_dur_seconds: primary,
        window: WindowInfo {
            frames: window.frame_indices.len(),
            first_frame: window.frame_indices[0],
            last_frame: *window.frame_indices.last().unwrap(),
            f0: window.f0,
            duration_seconds: window.frame_indices.len() as f64 / window.f0,
        },
        alpha_grid: opts.alpha_grid.clone(),
        dur_alpha: opts.dur_alpha,
        ap_alpha: opts.ap_alpha,
        ap_interpolation: "101-point".into(),
        similarity: opts.similarity,
        dropped_pred_classes: dropped,
        class_labels: opts.class_labels.clone(),
    })
}
