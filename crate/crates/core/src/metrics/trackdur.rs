//! Identity persistence: per-tracker match indicators, maximal runs, and the
//! mean run duration in seconds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::TrackId;
use crate::matching::FrameMatchSet;

/// Maximal span of consecutive window positions where an indicator is 1.
/// Both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn duration(&self) -> usize {
        self.end - self.start + 1
    }
}

/// A run attributed to a tracker identity, in native frame indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tracker_id: TrackId,
    pub start_frame: u64,
    pub end_frame: u64,
    /// Window steps covered.
    pub duration: usize,
}

/// `true` at window position `t` iff tracker `k` is matched to some ground
/// truth there. Unmatched predictions never count.
pub fn match_indicator_series(matches: &[FrameMatchSet], k: TrackId) -> Vec<bool> {
    matches.iter().map(|m| m.matched_pred(k)).collect()
}

/// Split a binary series into its maximal runs of ones.
pub fn extract_runs(series: &[bool]) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut start = None;
    for (t, &on) in series.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                runs.push(Run { start: s, end: t - 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(Run {
            start: s,
            end: series.len() - 1,
        });
    }
    runs
}

/// All runs of all tracker identities. `frame_indices[t]` is the native frame
/// index of window position `t`. Sorted by (tracker, start).
pub fn track_runs(matches: &[FrameMatchSet], frame_indices: &[u64]) -> Vec<RunRecord> {
    debug_assert_eq!(matches.len(), frame_indices.len());
    let mut open: HashMap<TrackId, (usize, usize)> = HashMap::new();
    let mut out = Vec::new();
    let close = |k: TrackId, (s, e): (usize, usize), out: &mut Vec<RunRecord>| {
        out.push(RunRecord {
            tracker_id: k,
            start_frame: frame_indices[s],
            end_frame: frame_indices[e],
            duration: e - s + 1,
        })
    };
    for (t, m) in matches.iter().enumerate() {
        for pair in &m.pairs {
            match open.get_mut(&pair.pred) {
                Some(span) if span.1 + 1 == t => span.1 = t,
                Some(span) => {
                    let done = std::mem::replace(span, (t, t));
                    close(pair.pred, done, &mut out);
                }
                None => {
                    open.insert(pair.pred, (t, t));
                }
            }
        }
    }
    for (k, span) in open {
        close(k, span, &mut out);
    }
    out.sort_unstable_by_key(|r| (r.tracker_id, r.start_frame));
    out
}

/// Mean run duration in seconds: total matched window steps over
/// `(number of runs) * f0`. Zero when there are no runs.
pub fn avg_track_dur(matches: &[FrameMatchSet], f0: f64) -> f64 {
    let mut last_seen: HashMap<TrackId, usize> = HashMap::new();
    let mut total: u64 = 0;
    let mut runs: u64 = 0;
    for (t, m) in matches.iter().enumerate() {
        for pair in &m.pairs {
            total += 1;
            let prev = last_seen.insert(pair.pred, t);
            if prev.is_none_or(|p| p + 1 != t) {
                runs += 1;
            }
        }
    }
    duration_seconds(total, runs, f0)
}

pub(crate) fn duration_seconds(total_steps: u64, runs: u64, f0: f64) -> f64 {
    if runs == 0 {
        0.0
    } else {
        total_steps as f64 / (runs as f64 * f0)
    }
}
