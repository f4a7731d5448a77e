//! Detection / association bookkeeping and the HOTA family at one gate.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::datamodel::TrackId;
use crate::matching::FrameMatchSet;

/// Counts gathered from one gate's per-frame matches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationLedger {
    pub tp: u64,
    pub fn_count: u64,
    pub fp_count: u64,
    /// Frames in which `(gt, pred)` were matched to each other.
    pub pair_matches: BTreeMap<(TrackId, TrackId), u64>,
    /// Frames in which each ground-truth id is present.
    pub gt_presence: HashMap<TrackId, u64>,
    /// Frames in which each predicted id is present.
    pub pred_presence: HashMap<TrackId, u64>,
}

impl AssociationLedger {
    pub fn tpa(&self, gt: TrackId, pred: TrackId) -> u64 {
        self.pair_matches.get(&(gt, pred)).copied().unwrap_or(0)
    }

    /// Frames where `gt` is present but not matched to `pred`.
    pub fn fna(&self, gt: TrackId, pred: TrackId) -> u64 {
        self.gt_presence.get(&gt).copied().unwrap_or(0) - self.tpa(gt, pred)
    }

    /// Frames where `pred` is present but not matched to `gt`.
    pub fn fpa(&self, gt: TrackId, pred: TrackId) -> u64 {
        self.pred_presence.get(&pred).copied().unwrap_or(0) - self.tpa(gt, pred)
    }

    /// `TPA / (TPA + FNA + FPA)` for one identity pair.
    pub fn association(&self, gt: TrackId, pred: TrackId) -> f64 {
        let tpa = self.tpa(gt, pred);
        if tpa == 0 {
            return 0.0;
        }
        let denom = tpa + self.fna(gt, pred) + self.fpa(gt, pred);
        tpa as f64 / denom as f64
    }
}

pub fn association_ledger(matches: &[FrameMatchSet]) -> AssociationLedger {
    let mut ledger = AssociationLedger::default();
    for m in matches {
        ledger.tp += m.pairs.len() as u64;
        ledger.fn_count += m.unmatched_gt.len() as u64;
        ledger.fp_count += m.unmatched_pred.len() as u64;
        for p in &m.pairs {
            *ledger.pair_matches.entry((p.gt, p.pred)).or_default() += 1;
            *ledger.gt_presence.entry(p.gt).or_default() += 1;
            *ledger.pred_presence.entry(p.pred).or_default() += 1;
        }
        for &g in &m.unmatched_gt {
            *ledger.gt_presence.entry(g).or_default() += 1;
        }
        for &p in &m.unmatched_pred {
            *ledger.pred_presence.entry(p).or_default() += 1;
        }
    }
    ledger
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaScores {
    pub alpha: f64,
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub loca: f64,
}

/// Score one gate. An empty scene (no ground truth, no predictions) scores 1
/// everywhere; a scene with no true positives scores 0 everywhere.
pub fn hota_at_alpha(ledger: &AssociationLedger, matches: &[FrameMatchSet], alpha: f64) -> AlphaScores {
    let total = ledger.tp + ledger.fn_count + ledger.fp_count;
    if total == 0 {
        return AlphaScores {
            alpha,
            hota: 1.0,
            deta: 1.0,
            assa: 1.0,
            loca: 1.0,
        };
    }
    if ledger.tp == 0 {
        return AlphaScores {
            alpha,
            hota: 0.0,
            deta: 0.0,
            assa: 0.0,
            loca: 0.0,
        };
    }
    let tp = ledger.tp as f64;
    let deta = tp / total as f64;
    let weighted: f64 = ledger
        .pair_matches
        .iter()
        .map(|(&(g, p), &tpa)| tpa as f64 * ledger.association(g, p))
        .sum();
    let assa = weighted / tp;
    let sim_sum: f64 = matches
        .iter()
        .flat_map(|m| m.pairs.iter().map(|p| p.similarity))
        .sum();
    AlphaScores {
        alpha,
        hota: (deta * assa).sqrt(),
        deta,
        assa,
        loca: sim_sum / tp,
    }
}

/// Arithmetic mean over the gate grid.
pub fn integrate(per_alpha: &[AlphaScores]) -> (f64, f64, f64, f64) {
    let n = per_alpha.len() as f64;
    let mean = |f: fn(&AlphaScores) -> f64| per_alpha.iter().map(f).sum::<f64>() / n;
    (mean(|s| s.hota), mean(|s| s.deta), mean(|s| s.assa), mean(|s| s.loca))
}
