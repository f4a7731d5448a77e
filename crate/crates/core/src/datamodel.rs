//! Value types shared by every module: boxes, detections, sequences and
//! evaluation windows.
//!
//! Construction helpers validate; the fields stay public so that malformed
//! inputs can be represented and reported by [`validate_sequence`] instead of
//! being rejected at the door.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TrackId = u64;
pub type ClassId = u32;

/// Wrap an angle into `[-π, π)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    if !yaw.is_finite() {
        return yaw;
    }
    if (-PI..PI).contains(&yaw) {
        return yaw;
    }
    let two_pi = 2.0 * PI;
    let wrapped = (yaw + PI).rem_euclid(two_pi) - PI;
    // rem_euclid can land exactly on 2π after rounding
    if wrapped >= PI {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Oriented 3D box in world coordinates. Meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub yaw: f64,
}

impl Box3D {
    pub fn new(
        center: [f64; 3],
        width: f64,
        length: f64,
        height: f64,
        yaw: f64,
    ) -> Result<Self> {
        let b = Box3D {
            x: center[0],
            y: center[1],
            z: center[2],
            width,
            length,
            height,
            yaw: normalize_yaw(yaw),
        };
        match b.problems().first() {
            Some((field, why)) => Err(Error::invalid(format!("box {field}: {why}"))),
            None => Ok(b),
        }
    }

    pub fn center(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn with_center(mut self, x: f64, y: f64, z: f64) -> Self {
        self.x = x;
        self.y = y;
        self.z = z;
        self
    }

    fn problems(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        let fields = [
            ("x", self.x),
            ("y", self.y),
            ("z", self.z),
            ("width", self.width),
            ("length", self.length),
            ("height", self.height),
            ("yaw", self.yaw),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                out.push((name, "not finite"));
            }
        }
        for (name, v) in [
            ("width", self.width),
            ("length", self.length),
            ("height", self.height),
        ] {
            if v.is_finite() && v <= 0.0 {
                out.push((name, "must be positive"));
            }
        }
        if self.yaw.is_finite() && !(-PI..PI).contains(&self.yaw) {
            out.push(("yaw", "outside [-pi, pi)"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: Box3D,
    pub class_id: ClassId,
    pub confidence: f64,
    pub track_id: Option<TrackId>,
    /// Ground-plane velocity `(vx, vy)` in m/s, when known.
    pub velocity: Option<[f64; 2]>,
}

impl Detection {
    pub fn new(bbox: Box3D, class_id: ClassId, confidence: f64, track_id: Option<TrackId>) -> Self {
        Detection {
            bbox,
            class_id,
            confidence,
            track_id,
            velocity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: u64,
    pub detections: Vec<Detection>,
}

impl Frame {
    pub fn new(index: u64, detections: Vec<Detection>) -> Self {
        Frame { index, detections }
    }
}

/// Ordered frames of world-frame detections.
///
/// Frames missing from `frames` mean "nothing observed at that timestep".
/// `frame_stride` records how many native frames separate two nominal frames
/// after stride subsampling; the effective rate is `native_fps / frame_stride`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub frames: Vec<Frame>,
    pub native_fps: f64,
    pub scene_name: String,
    #[serde(default = "default_stride")]
    pub frame_stride: u64,
}

fn default_stride() -> u64 {
    1
}

impl Sequence {
    pub fn new(scene_name: impl Into<String>, native_fps: f64) -> Self {
        Sequence {
            frames: Vec::new(),
            native_fps,
            scene_name: scene_name.into(),
            frame_stride: 1,
        }
    }

    pub fn with_frames(mut self, frames: Vec<Frame>) -> Self {
        self.frames = frames;
        self
    }

    pub fn effective_fps(&self) -> f64 {
        self.native_fps / self.frame_stride as f64
    }

    pub fn time_seconds(&self, frame_index: u64) -> f64 {
        frame_index as f64 / self.native_fps
    }

    pub fn frame(&self, index: u64) -> Option<&Frame> {
        self.frames
            .binary_search_by_key(&index, |f| f.index)
            .ok()
            .map(|i| &self.frames[i])
    }

    /// Detections at `index`, empty when the frame is absent.
    pub fn detections_at(&self, index: u64) -> &[Detection] {
        self.frame(index).map_or(&[], |f| &f.detections)
    }

    pub fn detection_count(&self) -> usize {
        self.frames.iter().map(|f| f.detections.len()).sum()
    }

    /// Inclusive span of frame indices, if any frame exists.
    pub fn span(&self) -> Option<(u64, u64)> {
        Some((self.frames.first()?.index, self.frames.last()?.index))
    }

    pub fn classes(&self) -> Vec<ClassId> {
        let mut classes: Vec<ClassId> = self
            .frames
            .iter()
            .flat_map(|f| f.detections.iter().map(|d| d.class_id))
            .collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Keep only the first `n` frames of the ordered frame list.
    pub fn truncated(&self, n: usize) -> Sequence {
        let mut out = self.clone();
        out.frames.truncate(n);
        out
    }

    /// Split at a position in the ordered frame list.
    pub fn split_at(&self, n: usize) -> (Sequence, Sequence) {
        let n = n.min(self.frames.len());
        let mut head = self.clone();
        let tail_frames = head.frames.split_off(n);
        let tail = Sequence {
            frames: tail_frames,
            ..self.clone().with_frames(Vec::new())
        };
        (head, tail)
    }
}

/// Frame indices to score plus the reference rate converting frames to seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalWindow {
    pub frame_indices: Vec<u64>,
    pub f0: f64,
}

impl EvalWindow {
    pub fn new(mut frame_indices: Vec<u64>, f0: f64) -> Result<Self> {
        frame_indices.sort_unstable();
        frame_indices.dedup();
        if frame_indices.is_empty() {
            return Err(Error::invalid("evaluation window is empty"));
        }
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::invalid(format!("reference frame rate must be positive, got {f0}")));
        }
        Ok(EvalWindow { frame_indices, f0 })
    }

    /// Every frame in the span of `gt`, scored at the sequence's effective rate.
    pub fn full(gt: &Sequence) -> Result<Self> {
        let (first, last) = gt
            .span()
            .ok_or_else(|| Error::invalid("ground truth has no frames"))?;
        let stride = gt.frame_stride.max(1);
        let indices = (first..=last).filter(|i| i % stride == 0).collect();
        Self::new(indices, gt.effective_fps())
    }

    pub fn len(&self) -> usize {
        self.frame_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_indices.is_empty()
    }

    /// Seconds covered by the window at the reference rate.
    pub fn duration_seconds(&self) -> f64 {
        self.len() as f64 / self.f0
    }

    /// Window frames must lie within the ground-truth span.
    pub fn check_against(&self, gt: &Sequence) -> Result<()> {
        let Some((first, last)) = gt.span() else {
            return Err(Error::invalid("ground truth has no frames"));
        };
        if let Some(bad) = self
            .frame_indices
            .iter()
            .find(|&&i| i < first || i > last)
        {
            return Err(Error::invalid(format!(
                "window frame {bad} outside ground-truth span {first}..={last}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub frame: Option<u64>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame {
            Some(frame) => write!(f, "frame {frame}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Report every broken invariant of `seq`. Never fails; an empty list means valid.
pub fn validate_sequence(seq: &Sequence) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(seq.native_fps.is_finite() && seq.native_fps > 0.0) {
        out.push(Violation {
            frame: None,
            field: "native_fps".into(),
            message: format!("must be positive, got {}", seq.native_fps),
        });
    }
    if seq.frame_stride == 0 {
        out.push(Violation {
            frame: None,
            field: "frame_stride".into(),
            message: "must be at least 1".into(),
        });
    }

    let mut previous: Option<u64> = None;
    for frame in &seq.frames {
        let at = Some(frame.index);
        if let Some(prev) = previous {
            if frame.index <= prev {
                out.push(Violation {
                    frame: at,
                    field: "frame_index".into(),
                    message: format!("not strictly increasing after {prev}"),
                });
            }
        }
        previous = Some(frame.index);

        let mut seen = HashSet::new();
        for det in &frame.detections {
            for (field, why) in det.bbox.problems() {
                out.push(Violation {
                    frame: at,
                    field: field.into(),
                    message: why.into(),
                });
            }
            if !(0.0..=1.0).contains(&det.confidence) {
                out.push(Violation {
                    frame: at,
                    field: "confidence".into(),
                    message: format!("{} outside [0, 1]", det.confidence),
                });
            }
            if let Some(v) = det.velocity {
                if !(v[0].is_finite() && v[1].is_finite()) {
                    out.push(Violation {
                        frame: at,
                        field: "velocity".into(),
                        message: "not finite".into(),
                    });
                }
            }
            if let Some(id) = det.track_id {
                if !seen.insert((id, det.class_id)) {
                    out.push(Violation {
                        frame: at,
                        field: "track_id".into(),
                        message: format!("duplicate (track {id}, class {})", det.class_id),
                    });
                }
            }
        }
    }
    out
}
