//! Per-frame optimal assignment between ground truth and predictions.
//!
//! Matching maximizes total similarity over pairs whose similarity clears the
//! gate `alpha`. It is solved as a min-cost assignment with cost
//! `1 - similarity` per pair and cost `1/2` for leaving a detection unmatched,
//! so a pair is chosen exactly when it beats leaving both sides unmatched.
//! Gated-out pairs get a prohibitive cost and are stripped afterwards.

use serde::{Deserialize, Serialize};

use crate::datamodel::{Box3D, Detection, TrackId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    /// IoU of the axis-aligned ground-plane footprints (yaw ignored).
    BevIou,
    /// `max(0, 1 - d / d_max)` on ground-plane center distance.
    CenterDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySpec {
    pub mode: SimilarityMode,
    /// Meters; only used by `CenterDistance`.
    pub d_max: f64,
}

impl Default for SimilaritySpec {
    fn default() -> Self {
        SimilaritySpec {
            mode: SimilarityMode::BevIou,
            d_max: 1.0,
        }
    }
}

impl SimilaritySpec {
    pub fn bev_iou() -> Self {
        Self::default()
    }

    pub fn center_distance(d_max: f64) -> Self {
        SimilaritySpec {
            mode: SimilarityMode::CenterDistance,
            d_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == SimilarityMode::CenterDistance && !(self.d_max.is_finite() && self.d_max > 0.0) {
            return Err(Error::Config(format!("d_max must be positive, got {}", self.d_max)));
        }
        Ok(())
    }
}

/// Footprint `[x_min, x_max, y_min, y_max]`; `length` runs along x, `width` along y.
fn footprint(b: &Box3D) -> [f64; 4] {
    let hl = b.length / 2.0;
    let hw = b.width / 2.0;
    [b.x - hl, b.x + hl, b.y - hw, b.y + hw]
}

fn area(f: &[f64; 4]) -> f64 {
    (f[1] - f[0]) * (f[3] - f[2])
}

pub fn bev_iou(a: &Box3D, b: &Box3D) -> f64 {
    let fa = footprint(a);
    let fb = footprint(b);
    let ix = fa[1].min(fb[1]) - fa[0].max(fb[0]);
    let iy = fa[3].min(fb[3]) - fa[2].max(fb[2]);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    let union = area(&fa) + area(&fb) - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn similarity(a: &Box3D, b: &Box3D, spec: &SimilaritySpec) -> f64 {
    match spec.mode {
        SimilarityMode::BevIou => bev_iou(a, b),
        SimilarityMode::CenterDistance => {
            let d = (a.x - b.x).hypot(a.y - b.y);
            (1.0 - d / spec.d_max).max(0.0)
        }
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "cost matrix of {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite cost {v}")));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged cost matrix"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    fn filled(rows: usize, cols: usize, value: f64) -> Self {
        CostMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn total(&self, assignment: &[(usize, usize)]) -> f64 {
        assignment.iter().map(|&(r, c)| self.get(r, c)).sum()
    }
}

/// Minimum-cost assignment of size `min(rows, cols)`.
///
/// Among equal-cost optima the lexicographically smallest `(row, col)` list is
/// returned. Costs within `1e-9` (relative to the largest magnitude) count as
/// equal.
pub fn hungarian(cost: &CostMatrix) -> Vec<(usize, usize)> {
    let (n, m) = (cost.rows, cost.cols);
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let size = n.max(m);
    // pad to square with zero cost; padding adds the same constant to every
    // full assignment
    let at = |r: usize, c: usize| if r < n && c < m { cost.get(r, c) } else { 0.0 };

    // Shortest augmenting path with potentials, 1-based with a virtual column 0.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut owner = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    let mut minv = vec![inf; size + 1];
    let mut used = vec![false; size + 1];
    for i in 1..=size {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(inf);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; size];
    let mut col_to_row = vec![0usize; size];
    for j in 1..=size {
        row_to_col[owner[j] - 1] = j - 1;
        col_to_row[j - 1] = owner[j] - 1;
    }

    let scale = cost.data.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight = |r: usize, c: usize| at(r, c) - u[r + 1] - v[c + 1] <= eps;
    lexicographic_minimum(size, &tight, &mut row_to_col, &mut col_to_row);

    (0..n)
        .filter_map(|r| {
            let c = row_to_col[r];
            (c < m).then_some((r, c))
        })
        .collect()
}

/// Rewrite a perfect matching of the tight-edge graph into the
/// lexicographically smallest one by greedy alternating-path swaps.
fn lexicographic_minimum(
    size: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_to_col: &mut [usize],
    col_to_row: &mut [usize],
) {
    let mut fixed_col = vec![false; size];
    let mut visited = vec![false; size];
    let mut parent = vec![usize::MAX; size];
    for row in 0..size {
        let current = row_to_col[row];
        for target in 0..current {
            if fixed_col[target] || !tight(row, target) {
                continue;
            }
            // Free `target` by walking alternating paths from its owner until
            // some row can take `current`.
            visited.fill(false);
            visited[target] = true;
            let mut stack = vec![target];
            let mut found = None;
            'search: while let Some(col) = stack.pop() {
                let r = col_to_row[col];
                for c in 0..size {
                    if visited[c] || fixed_col[c] || !tight(r, c) {
                        continue;
                    }
                    visited[c] = true;
                    parent[c] = col;
                    if c == current {
                        found = Some(c);
                        break 'search;
                    }
                    stack.push(c);
                }
            }
            let Some(mut c) = found else { continue };
            // shift ownership back along the path: owner(parent[c]) takes c
            while c != target {
                let p = parent[c];
                let r = col_to_row[p];
                row_to_col[r] = c;
                col_to_row[c] = r;
                c = p;
            }
            row_to_col[row] = target;
            col_to_row[target] = row;
            break;
        }
        fixed_col[row_to_col[row]] = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub gt: TrackId,
    pub pred: TrackId,
    pub similarity: f64,
}

/// Outcome of matching one frame of one class at one gate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameMatchSet {
    /// Sorted by ground-truth id.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: Vec<TrackId>,
    pub unmatched_pred: Vec<TrackId>,
}

impl FrameMatchSet {
    pub fn matched_pred(&self, pred: TrackId) -> bool {
        self.pairs.iter().any(|p| p.pred == pred)
    }
}

/// Similarities between one frame's ground truth and predictions, both sorted
/// by track id. Computed once and re-gated for every alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSimilarity {
    pub gt_ids: Vec<TrackId>,
    pub pred_ids: Vec<TrackId>,
    /// Row-major `gt x pred`.
    pub values: Vec<f64>,
}

fn sorted_ids(dets: &[Detection], side: &'static str) -> Result<Vec<(TrackId, usize)>> {
    let mut ids = Vec::with_capacity(dets.len());
    for (k, d) in dets.iter().enumerate() {
        let id = d.track_id.ok_or(Error::MissingTrackId { frame: 0, side })?;
        ids.push((id, k));
    }
    ids.sort_unstable();
    Ok(ids)
}

impl FrameSimilarity {
    pub fn compute(gt: &[Detection], pred: &[Detection], spec: &SimilaritySpec) -> Result<Self> {
        let g = sorted_ids(gt, "ground-truth")?;
        let p = sorted_ids(pred, "predicted")?;
        let mut values = Vec::with_capacity(g.len() * p.len());
        for &(_, gi) in &g {
            for &(_, pi) in &p {
                values.push(similarity(&gt[gi].bbox, &pred[pi].bbox, spec));
            }
        }
        Ok(FrameSimilarity {
            gt_ids: g.into_iter().map(|(id, _)| id).collect(),
            pred_ids: p.into_iter().map(|(id, _)| id).collect(),
            values,
        })
    }

    #[inline]
    pub fn get(&self, g: usize, p: usize) -> f64 {
        self.values[g * self.pred_ids.len() + p]
    }

    /// Gate at `alpha` and solve each connected component of the gated
    /// graph independently.
    pub fn matches(&self, alpha: f64) -> FrameMatchSet {
        let n = self.gt_ids.len();
        let m = self.pred_ids.len();
        let mut components = UnionFind::new(n + m);
        let mut has_edge = vec![false; n + m];
        for g in 0..n {
            for p in 0..m {
                if self.get(g, p) >= alpha {
                    components.union(g, n + p);
                    has_edge[g] = true;
                    has_edge[n + p] = true;
                }
            }
        }

        let mut pred_matched = vec![false; m];
        let mut pairs = Vec::new();
        let mut unmatched_gt = Vec::new();
        let mut done = vec![false; n];
        for g in 0..n {
            if done[g] {
                continue;
            }
            if !has_edge[g] {
                unmatched_gt.push(self.gt_ids[g]);
                continue;
            }
            let root = components.find(g);
            let gts: Vec<usize> = (g..n).filter(|&k| components.find(k) == root).collect();
            let preds: Vec<usize> = (0..m).filter(|&k| components.find(n + k) == root).collect();
            for &k in &gts {
                done[k] = true;
            }
            for (lg, lp) in solve_component(self, &gts, &preds, alpha) {
                match lp {
                    Some(lp) => {
                        let (gi, pi) = (gts[lg], preds[lp]);
                        pred_matched[pi] = true;
                        pairs.push(MatchedPair {
                            gt: self.gt_ids[gi],
                            pred: self.pred_ids[pi],
                            similarity: self.get(gi, pi),
                        });
                    }
                    None => unmatched_gt.push(self.gt_ids[gts[lg]]),
                }
            }
        }
        pairs.sort_by_key(|p| p.gt);
        unmatched_gt.sort_unstable();
        let unmatched_pred = (0..m)
            .filter(|&p| !pred_matched[p])
            .map(|p| self.pred_ids[p])
            .collect();
        FrameMatchSet {
            pairs,
            unmatched_gt,
            unmatched_pred,
        }
    }
}

/// Returns, for each local gt row, its local pred column or `None`.
fn solve_component(
    sim: &FrameSimilarity,
    gts: &[usize],
    preds: &[usize],
    alpha: f64,
) -> Vec<(usize, Option<usize>)> {
    let (nc, mc) = (gts.len(), preds.len());
    let size = nc + mc;
    let forbidden = 2.0 * nc.max(mc) as f64 + 1.0;
    let mut cost = CostMatrix::filled(size, size, forbidden);
    for (lg, &g) in gts.iter().enumerate() {
        for (lp, &p) in preds.iter().enumerate() {
            let s = sim.get(g, p);
            if s >= alpha {
                cost.set(lg, lp, 1.0 - s);
            }
        }
        cost.set(lg, mc + lg, 0.5);
    }
    for lp in 0..mc {
        cost.set(nc + lp, lp, 0.5);
        for lg in 0..nc {
            cost.set(nc + lp, mc + lg, 0.0);
        }
    }
    let assignment = hungarian(&cost);
    assignment
        .into_iter()
        .filter(|&(r, _)| r < nc)
        .map(|(r, c)| {
            let valid = c < mc && sim.get(gts[r], preds[c]) >= alpha;
            (r, valid.then_some(c))
        })
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Match one frame of a single class at gate `alpha`.
pub fn match_frame(
    gt: &[Detection],
    pred: &[Detection],
    alpha: f64,
    spec: &SimilaritySpec,
) -> Result<FrameMatchSet> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(FrameSimilarity::compute(gt, pred, spec)?.matches(alpha))
}
