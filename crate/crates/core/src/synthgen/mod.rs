//! Seeded synthetic scenes and controllably degraded tracker outputs.
//!
//! All randomness comes from ChaCha8 with explicit stream splitting so that
//! outputs are reproducible across platforms:
//!
//! * `gen_scene`: key = scene seed, stream `k` drives object `k`.
//! * `degrade`: key = degrade seed, stream 0 drives false positives and
//!   stream `1 + track_id` drives the ground-truth object with that id.
//!
//! Every stream consumes a fixed number of draws per step regardless of the
//! probabilities involved, so changing one knob never reshuffles the others.

mod oracle;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datamodel::{Box3D, ClassId, Detection, Frame, Sequence, TrackId};
use crate::error::{Error, Result};

pub use oracle::{oracle_match_frame, oracle_metrics, ENUMERATION_BOUND};

/// Axis-aligned ground-plane rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::invalid(format!("degenerate arena bounds {self:?}")));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        (
            rng.random_range(self.x_min..=self.x_max),
            rng.random_range(self.y_min..=self.y_max),
        )
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            x_min: -10.0,
            y_min: -10.0,
            x_max: 10.0,
            y_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionModel {
    Static,
    ConstantVelocity,
    /// Walk at constant speed toward random waypoints in the arena.
    Waypoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub n_objects: usize,
    pub duration_s: f64,
    pub fps: f64,
    pub bounds: Bounds,
    pub motion: MotionModel,
    /// Meters per second for the moving models.
    pub speed: f64,
    /// Object `k` gets `classes[k % classes.len()]`.
    pub classes: Vec<ClassId>,
    /// `[width, length, height]` in meters.
    pub dims: [f64; 3],
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            n_objects: 4,
            duration_s: 10.0,
            fps: 10.0,
            bounds: Bounds::default(),
            motion: MotionModel::ConstantVelocity,
            speed: 1.0,
            classes: vec![0],
            dims: [0.6, 0.6, 1.8],
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn frame_count(&self) -> Result<u64> {
        let n = self.duration_s * self.fps;
        if !(self.fps.is_finite() && self.fps > 0.0 && n.is_finite() && n >= 0.0) {
            return Err(Error::invalid(format!(
                "duration {} s at {} fps is not a valid scene length",
                self.duration_s, self.fps
            )));
        }
        if (n - n.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "duration {} s at {} fps is not a whole number of frames",
                self.duration_s, self.fps
            )));
        }
        Ok(n.round() as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.frame_count()?;
        self.bounds.validate()?;
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::invalid(format!("speed must be non-negative, got {}", self.speed)));
        }
        if self.classes.is_empty() {
            return Err(Error::invalid("scene needs at least one class"));
        }
        if !self.dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::invalid(format!("box dimensions must be positive, got {:?}", self.dims)));
        }
        Ok(())
    }
}

/// Fold a coordinate back into `[lo, hi]`, flipping the velocity component
/// once per wall hit.
fn reflect(mut v: f64, mut vel: f64, lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    // fold whole round trips first so huge steps terminate quickly
    if v > hi + span || v < lo - span {
        let period = 2.0 * span;
        let r = (v - lo).rem_euclid(period);
        return if r <= span {
            (lo + r, vel)
        } else {
            (hi - (r - span), -vel)
        };
    }
    loop {
        if v > hi {
            v = 2.0 * hi - v;
            vel = -vel;
        } else if v < lo {
            v = 2.0 * lo - v;
            vel = -vel;
        } else {
            return (v, vel);
        }
    }
}

struct Mover {
    pos: (f64, f64),
    vel: (f64, f64),
    target: (f64, f64),
}

impl Mover {
    fn heading(&self) -> f64 {
        if self.vel.0 == 0.0 && self.vel.1 == 0.0 {
            0.0
        } else {
            self.vel.1.atan2(self.vel.0)
        }
    }
}

/// Ground-truth scene: one frame per step, indices `0..duration_s * fps`,
/// objects alive for the whole scene with track ids `1..=n_objects`.
pub fn gen_scene(spec: &SceneSpec) -> Result<Sequence> {
    spec.validate()?;
    let frames = spec.frame_count()?;
    let b = spec.bounds;
    let dt = 1.0 / spec.fps;
    let [w, l, h] = spec.dims;

    let mut movers: Vec<(Mover, ChaCha8Rng)> = (0..spec.n_objects)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(k as u64);
            let pos = b.sample(&mut rng);
            let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let target = b.sample(&mut rng);
            let vel = match spec.motion {
                MotionModel::Static => (0.0, 0.0),
                MotionModel::ConstantVelocity => (spec.speed * theta.cos(), spec.speed * theta.sin()),
                MotionModel::Waypoint => (0.0, 0.0),
            };
            (Mover { pos, vel, target }, rng)
        })
        .collect();

    let mut seq = Sequence::new(format!("synth-{}", spec.seed), spec.fps);
    for t in 0..frames {
        if t > 0 {
            for (m, rng) in movers.iter_mut() {
                step(m, rng, spec, dt);
            }
        }
        let dets = movers
            .iter()
            .enumerate()
            .map(|(k, (m, _))| {
                let bbox = Box3D::new([m.pos.0, m.pos.1, h / 2.0], w, l, h, m.heading())?;
                Ok(Detection::new(
                    bbox,
                    spec.classes[k % spec.classes.len()],
                    1.0,
                    Some(k as TrackId + 1),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        seq.frames.push(Frame::new(t, dets));
    }
    Ok(seq)
}

fn step(m: &mut Mover, rng: &mut ChaCha8Rng, spec: &SceneSpec, dt: f64) {
    let b = spec.bounds;
    match spec.motion {
        MotionModel::Static => {}
        MotionModel::ConstantVelocity => {
            let (x, vx) = reflect(m.pos.0 + m.vel.0 * dt, m.vel.0, b.x_min, b.x_max);
            let (y, vy) = reflect(m.pos.1 + m.vel.1 * dt, m.vel.1, b.y_min, b.y_max);
            m.pos = (x, y);
            m.vel = (vx, vy);
        }
        MotionModel::Waypoint => {
            let mut budget = spec.speed * dt;
            // at most a few waypoints per step; draws stay aligned because a
            // new target is only drawn on arrival
            for _ in 0..8 {
                let (dx, dy) = (m.target.0 - m.pos.0, m.target.1 - m.pos.1);
                let d = dx.hypot(dy);
                if d > budget {
                    m.vel = (spec.speed * dx / d, spec.speed * dy / d);
                    m.pos = (m.pos.0 + dx / d * budget, m.pos.1 + dy / d * budget);
                    break;
                }
                m.pos = m.target;
                budget -= d;
                m.target = b.sample(rng);
                if budget <= 0.0 {
                    break;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeSpec {
    /// Per object per frame.
    pub drop_prob: f64,
    /// Standard deviation of the isotropic ground-plane center jitter, meters.
    pub loc_noise_sigma: f64,
    /// Per object per frame: retire the emitted id and mint a fresh one.
    pub id_switch_prob: f64,
    /// Expected false positives per frame (Poisson).
    pub fp_rate: f64,
    pub seed: u64,
    /// Where false positives appear; defaults to the ground-truth extent
    /// grown by one meter.
    pub fp_arena: Option<Bounds>,
}

impl Default for DegradeSpec {
    fn default() -> Self {
        DegradeSpec {
            drop_prob: 0.0,
            loc_noise_sigma: 0.0,
            id_switch_prob: 0.0,
            fp_rate: 0.0,
            seed: 0,
            fp_arena: None,
        }
    }
}

impl DegradeSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("drop_prob", self.drop_prob), ("id_switch_prob", self.id_switch_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.loc_noise_sigma.is_finite() && self.loc_noise_sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "loc_noise_sigma must be non-negative, got {}",
                self.loc_noise_sigma
            )));
        }
        if !(self.fp_rate.is_finite() && self.fp_rate >= 0.0) {
            return Err(Error::invalid(format!("fp_rate must be non-negative, got {}", self.fp_rate)));
        }
        if let Some(a) = &self.fp_arena {
            a.validate()?;
        }
        Ok(())
    }
}

fn default_arena(gt: &Sequence) -> Bounds {
    let mut b = Bounds {
        x_min: f64::INFINITY,
        y_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for d in gt.frames.iter().flat_map(|f| &f.detections) {
        b.x_min = b.x_min.min(d.bbox.x);
        b.y_min = b.y_min.min(d.bbox.y);
        b.x_max = b.x_max.max(d.bbox.x);
        b.y_max = b.y_max.max(d.bbox.y);
    }
    if !b.x_min.is_finite() {
        return Bounds {
            x_min: -1.0,
            y_min: -1.0,
            x_max: 1.0,
            y_max: 1.0,
        };
    }
    Bounds {
        x_min: b.x_min - 1.0,
        y_min: b.y_min - 1.0,
        x_max: b.x_max + 1.0,
        y_max: b.y_max + 1.0,
    }
}

struct ObjectState {
    rng: ChaCha8Rng,
    emitted: Option<TrackId>,
}

/// Simulated tracker output for `gt`.
///
/// Per ground-truth object and frame, four draws are consumed in order:
/// switch, drop, and two standard normals for the jitter. A switch retires
/// the object's current id (the next emission mints a fresh one); a drop
/// suppresses the emission. Ids are minted from one counter starting at 1
/// and are never reused. False positives get fresh ids, uniform positions
/// in the arena, uniform confidence, a class drawn from the ground-truth
/// classes and the dimensions of the first ground-truth box.
pub fn degrade(gt: &Sequence, spec: &DegradeSpec) -> Result<Sequence> {
    spec.validate()?;
    let arena = spec.fp_arena.unwrap_or_else(|| default_arena(gt));
    let classes = gt.classes();
    let template = gt
        .frames
        .iter()
        .flat_map(|f| &f.detections)
        .next()
        .map(|d| d.bbox)
        .unwrap_or(Box3D::new([0.0, 0.0, 0.9], 0.6, 0.6, 1.8, 0.0)?);
    let poisson = (spec.fp_rate > 0.0)
        .then(|| Poisson::new(spec.fp_rate))
        .transpose()
        .map_err(|e| Error::invalid(format!("fp_rate: {e}")))?;

    let mut fp_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    fp_rng.set_stream(0);
    let mut objects: HashMap<(ClassId, TrackId), ObjectState> = HashMap::new();
    let mut next_id: TrackId = 1;
    let mut mint = || {
        let id = next_id;
        next_id += 1;
        id
    };

    let mut out = Sequence {
        frames: Vec::with_capacity(gt.frames.len()),
        ..gt.clone().with_frames(Vec::new())
    };
    for frame in &gt.frames {
        let mut order: Vec<&Detection> = frame.detections.iter().collect();
        order.sort_by_key(|d| (d.track_id, d.class_id));
        let mut dets = Vec::with_capacity(order.len());
        for d in order {
            let Some(gid) = d.track_id else {
                return Err(Error::MissingTrackId {
                    frame: frame.index,
                    side: "ground-truth",
                });
            };
            let state = objects.entry((d.class_id, gid)).or_insert_with(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(gid.wrapping_add(1));
                ObjectState { rng, emitted: None }
            });
            let switch = state.rng.random::<f64>() < spec.id_switch_prob;
            let drop = state.rng.random::<f64>() < spec.drop_prob;
            let nx: f64 = StandardNormal.sample(&mut state.rng);
            let ny: f64 = StandardNormal.sample(&mut state.rng);
            if switch {
                state.emitted = None;
            }
            if drop {
                continue;
            }
            let id = *state.emitted.get_or_insert_with(&mut mint);
            let mut det = *d;
            det.bbox.x += spec.loc_noise_sigma * nx;
            det.bbox.y += spec.loc_noise_sigma * ny;
            det.track_id = Some(id);
            dets.push(det);
        }
        if let Some(p) = &poisson {
            let count = p.sample(&mut fp_rng) as u64;
            for _ in 0..count {
                let (x, y) = arena.sample(&mut fp_rng);
                let conf = fp_rng.random::<f64>();
                let class = match classes.len() {
                    0 => 0,
                    n => classes[fp_rng.random_range(0..n)],
                };
                let bbox = template.with_center(x, y, template.z);
                dets.push(Detection::new(bbox, class, conf, Some(mint())));
            }
        }
        out.frames.push(Frame::new(frame.index, dets));
    }
    Ok(out)
}

/// Scene and degradation bundled in one provenance file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub scene: SceneSpec,
    pub degrade: DegradeSpec,
}
