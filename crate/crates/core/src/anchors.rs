//! 3D anchor bank regenerated from ground-truth box centers with k-means.
//!
//! Bank files are CSV: a header comment `# k=<k>, seed=<seed>, inertia=<v>`
//! followed by one `x,y,z` row per center.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datamodel::Sequence;
use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub const DEFAULT_K: usize = 900;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorBank {
    pub centers: Vec<Point3>,
    pub k: usize,
    pub seed: u64,
    pub inertia: f64,
    /// Inertia after each assignment step; not persisted.
    pub history: Vec<f64>,
}

#[inline]
fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// One point per ground-truth detection, in frame then track order.
pub fn collect_centers(gt: &Sequence) -> Result<Vec<Point3>> {
    let mut out = Vec::with_capacity(gt.detection_count());
    for frame in &gt.frames {
        let mut dets: Vec<_> = frame.detections.iter().collect();
        dets.sort_by_key(|d| (d.track_id, d.class_id));
        out.extend(dets.iter().map(|d| d.bbox.center()));
    }
    if out.is_empty() {
        return Err(Error::invalid("ground truth holds no boxes"));
    }
    Ok(out)
}

/// Sum of squared distances from each point to its nearest center.
pub fn inertia(points: &[Point3], centers: &[Point3]) -> f64 {
    let (_, d) = assign(points, centers);
    d.iter().sum()
}

fn nearest(p: &Point3, centers: &[Point3]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn assign(points: &[Point3], centers: &[Point3]) -> (Vec<usize>, Vec<f64>) {
    points.par_iter().map(|p| nearest(p, centers)).unzip()
}

fn bounds(points: &[Point3]) -> (Point3, Point3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// k-means++ seeding: each new center is drawn with probability
/// proportional to its squared distance from the centers chosen so far.
fn seed_centers(points: &[Point3], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let mut chosen = vec![false; points.len()];
    let first = rng.random_range(0..points.len());
    chosen[first] = true;
    let mut centers = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[first])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` just short of `target`
            pick.or_else(|| d2.iter().rposition(|&d| d > 0.0))
        } else {
            None
        };
        // all remaining points coincide with a center: take the next unused one
        let pick = pick.unwrap_or_else(|| chosen.iter().position(|c| !c).expect("k <= n"));
        chosen[pick] = true;
        let c = points[pick];
        centers.push(c);
        for (p, d) in points.iter().zip(d2.iter_mut()) {
            *d = d.min(dist2(p, &c));
        }
    }
    centers
}

/// Lloyd's algorithm from k-means++ seeding.
///
/// Stops when no center moves more than `tol` meters or after `max_iter`
/// iterations. Empty clusters are re-seeded at the point farthest from its
/// assigned center. Centers are clamped to the bounding box of the input.
pub fn kmeans(points: &[Point3], k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<AnchorBank> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if points.len() < k {
        return Err(Error::invalid(format!("{} points cannot form {k} clusters", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::invalid(format!("non-finite point {p:?}")));
    }
    let (lo, hi) = bounds(points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(points, k, &mut rng);
    let mut history = Vec::new();

    for _ in 0..max_iter.max(1) {
        let (labels, d2) = assign(points, &centers);
        history.push(d2.iter().sum());

        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for a in 0..3 {
                sums[l][a] += p[a];
            }
        }
        let mut next: Vec<Point3> = (0..k)
            .map(|c| {
                if counts[c] == 0 {
                    return centers[c];
                }
                let n = counts[c] as f64;
                let mut m = [sums[c][0] / n, sums[c][1] / n, sums[c][2] / n];
                for a in 0..3 {
                    m[a] = m[a].clamp(lo[a], hi[a]);
                }
                m
            })
            .collect();

        // steal the worst-served points for empty clusters
        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            let mut far: Vec<(usize, f64)> = points
                .iter()
                .zip(&labels)
                .enumerate()
                .map(|(i, (p, &l))| (i, dist2(p, &next[l])))
                .collect();
            far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for (c, (i, _)) in empty.into_iter().zip(far) {
                next[c] = points[i];
            }
        }

        let shift = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(a, b))
            .fold(0.0f64, f64::max)
            .sqrt();
        centers = next;
        if shift < tol {
            break;
        }
    }

    let final_inertia = inertia(points, &centers);
    if history.last().is_none_or(|&h| final_inertia < h) {
        history.push(final_inertia);
    }
    Ok(AnchorBank {
        centers,
        k,
        seed,
        inertia: final_inertia,
        history,
    })
}

pub fn emit_anchor_bank<W: Write>(bank: &AnchorBank, mut sink: W) -> Result<()> {
    let mut out = String::with_capacity(40 * (bank.centers.len() + 1));
    out.push_str(&format!(
        "# k={}, seed={}, inertia={}\n",
        bank.k, bank.seed, bank.inertia
    ));
    for c in &bank.centers {
        // shortest exact representation so the file round-trips bit for bit
        out.push_str(&format!("{},{},{}\n", c[0], c[1], c[2]));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header
        .trim_start_matches('#')
        .split(',')
        .filter_map(|kv| kv.trim().split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v.trim())
}

pub fn parse_anchor_bank<R: Read>(reader: R) -> Result<AnchorBank> {
    let mut header: Option<(usize, String)> = None;
    let mut centers = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| Error::parse(line_no, 1, format!("unreadable line: {e}")))?;
        let t = text.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if header.is_none() {
                header = Some((line_no, t.to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, fields.len().min(3) + 1, "expected x,y,z"));
        }
        let mut p = [0.0; 3];
        for (a, f) in fields.iter().enumerate() {
            p[a] = f
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, a + 1, format!("expected a finite number, got {f:?}")))?;
        }
        centers.push(p);
    }
    let (line, header) = header.ok_or_else(|| Error::parse(1, 1, "missing `# k=..., seed=..., inertia=...` header"))?;
    let get = |key: &str| {
        header_value(&header, key).ok_or_else(|| Error::parse(line, 1, format!("header lacks {key}")))
    };
    let k: usize = get("k")?
        .parse()
        .map_err(|_| Error::parse(line, 1, "bad k"))?;
    let seed: u64 = get("seed")?
        .parse()
        .map_err(|_| Error::parse(line, 1, "bad seed"))?;
    let inertia: f64 = get("inertia")?
        .parse()
        .map_err(|_| Error::parse(line, 1, "bad inertia"))?;
    if k == 0 || k != centers.len() {
        return Err(Error::parse(
            line,
            1,
            format!("header says k={k} but {} centers follow", centers.len()),
        ));
    }
    Ok(AnchorBank {
        centers,
        k,
        seed,
        inertia,
        history: Vec::new(),
    })
}

pub fn write_anchor_file(bank: &AnchorBank, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    emit_anchor_bank(bank, BufWriter::new(file))
}

pub fn read_anchor_file(path: &Path) -> Result<AnchorBank> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_anchor_bank(file).map_err(|e| e.in_file(path))
}
