//! Detection average precision with 101-point interpolation.

use std::cmp::Ordering;

use crate::datamodel::Detection;
use crate::matching::{similarity, SimilaritySpec};

pub const AP_RECALL_POINTS: usize = 101;

/// Total order used for ranking: confidence descending, then identity and
/// geometry so that input order never matters.
pub(crate) fn rank_order(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.track_id.cmp(&b.track_id))
        .then(a.bbox.x.total_cmp(&b.bbox.x))
        .then(a.bbox.y.total_cmp(&b.bbox.y))
        .then(a.bbox.z.total_cmp(&b.bbox.z))
        .then(a.bbox.length.total_cmp(&b.bbox.length))
        .then(a.bbox.width.total_cmp(&b.bbox.width))
}

/// Ground truth ordering for tie-breaks among equally similar candidates.
fn gt_order(a: &Detection, b: &Detection) -> Ordering {
    a.track_id
        .cmp(&b.track_id)
        .then(a.bbox.x.total_cmp(&b.bbox.x))
        .then(a.bbox.y.total_cmp(&b.bbox.y))
}

/// Greedy per-frame matching: predictions in rank order take the most
/// similar unclaimed ground truth at or above `alpha`. Returns
/// `(confidence, is_true_positive)` in rank order.
pub(crate) fn greedy_frame(
    gt: &[Detection],
    pred: &[Detection],
    alpha: f64,
    spec: &SimilaritySpec,
) -> Vec<(f64, bool)> {
    let mut gts: Vec<&Detection> = gt.iter().collect();
    gts.sort_by(|a, b| gt_order(a, b));
    let mut preds: Vec<&Detection> = pred.iter().collect();
    preds.sort_by(|a, b| rank_order(a, b));
    let mut claimed = vec![false; gts.len()];
    preds
        .into_iter()
        .map(|p| {
            let mut best: Option<(usize, f64)> = None;
            for (k, g) in gts.iter().enumerate() {
                if claimed[k] {
                    continue;
                }
                let s = similarity(&g.bbox, &p.bbox, spec);
                if s >= alpha && best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((k, s));
                }
            }
            if let Some((k, _)) = best {
                claimed[k] = true;
            }
            (p.confidence, best.is_some())
        })
        .collect()
}

/// Area under the interpolated precision/recall curve.
///
/// `ranked` holds per-detection outcomes in global rank order.
pub(crate) fn interpolated_ap(ranked: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return if ranked.is_empty() { 1.0 } else { 0.0 };
    }
    // precision/recall after each detection
    let mut tp = 0usize;
    let mut curve: Vec<(usize, f64)> = Vec::with_capacity(ranked.len());
    for (k, &hit) in ranked.iter().enumerate() {
        if hit {
            tp += 1;
        }
        curve.push((tp, tp as f64 / (k + 1) as f64));
    }
    // running max from the right gives the precision envelope
    for k in (0..curve.len().saturating_sub(1)).rev() {
        curve[k].1 = curve[k].1.max(curve[k + 1].1);
    }
    let steps = AP_RECALL_POINTS - 1;
    let mut sum = 0.0;
    let mut cursor = 0usize;
    for r in 0..AP_RECALL_POINTS {
        // first point with recall >= r / steps, compared exactly in integers
        while cursor < curve.len() && curve[cursor].0 * steps < r * num_gt {
            cursor += 1;
        }
        if cursor < curve.len() {
            sum += curve[cursor].1;
        }
    }
    sum / AP_RECALL_POINTS as f64
}

/// AP over frames given as `(gt, pred)` detection lists of one class.
pub fn detection_ap_frames<'a, I>(frames: I, alpha: f64, spec: &SimilaritySpec) -> f64
where
    I: IntoIterator<Item = (&'a [Detection], &'a [Detection])>,
{
    let mut num_gt = 0;
    // (confidence, frame position, rank within frame, hit)
    let mut all: Vec<(f64, usize, usize, bool)> = Vec::new();
    for (t, (gt, pred)) in frames.into_iter().enumerate() {
        num_gt += gt.len();
        for (rank, (conf, hit)) in greedy_frame(gt, pred, alpha, spec).into_iter().enumerate() {
            all.push((conf, t, rank, hit));
        }
    }
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let ranked: Vec<bool> = all.into_iter().map(|x| x.3).collect();
    interpolated_ap(&ranked, num_gt)
}
