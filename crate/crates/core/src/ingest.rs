//! On-disk track format and grid-annotation conversion.
//!
//! Track files are UTF-8 CSV with LF endings:
//!
//! ```text
//! #frame,track_id,class_id,x,y,z,width,length,height,yaw,confidence
//! 0,7,0,1.0,2.0,0.9,0.6,0.6,1.8,0.0,0.98
//! ```
//!
//! Lines starting with `#` are comments. `track_id` may be empty for
//! detector-only files. Two optional trailing columns `vx,vy` carry
//! ground-plane velocity; both empty means unknown. Floats are written with
//! at most six fractional digits, so emitting quantizes to 1e-6.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::{Box3D, ClassId, Detection, Frame, Sequence, TrackId};
use crate::error::{Error, Result};

pub const TRACK_HEADER: &str = "#frame,track_id,class_id,x,y,z,width,length,height,yaw,confidence";
const POSITION_HEADER: &str = "frame,person_id,position_id";
const BASE_COLUMNS: usize = 11;
const VELOCITY_COLUMNS: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOptions {
    pub native_fps: f64,
    pub scene_name: String,
    /// Reject rows with an empty `track_id` column.
    pub require_track_ids: bool,
}

impl ParseOptions {
    pub fn tracks(native_fps: f64) -> Self {
        ParseOptions {
            native_fps,
            scene_name: String::new(),
            require_track_ids: true,
        }
    }

    pub fn detections(native_fps: f64) -> Self {
        ParseOptions {
            require_track_ids: false,
            ..Self::tracks(native_fps)
        }
    }

    pub fn scene(mut self, name: impl Into<String>) -> Self {
        self.scene_name = name.into();
        self
    }
}

/// Render a float with up to six fractional digits, keeping at least one.
pub fn format_float(v: f64) -> String {
    let mut s = format!("{v:.6}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    if s == "-0.0" {
        s = "0.0".into();
    }
    s
}

fn parse_float(field: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, column, format!("expected a number, got {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, column, format!("non-finite number {field:?}")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(field: &str, line: usize, column: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, column, format!("expected a non-negative integer, got {field:?}")))
}

fn read_lines<R: Read>(reader: R) -> impl Iterator<Item = (usize, Result<String>)> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let line = i + 1;
            (
                line,
                l.map_err(|e| Error::parse(line, 1, format!("unreadable line: {e}"))),
            )
        })
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn parse_row(text: &str, line: usize, opts: &ParseOptions) -> Result<(u64, Detection)> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != BASE_COLUMNS && fields.len() != VELOCITY_COLUMNS {
        return Err(Error::parse(
            line,
            fields.len().min(VELOCITY_COLUMNS) + 1,
            format!("expected {BASE_COLUMNS} or {VELOCITY_COLUMNS} columns, found {}", fields.len()),
        ));
    }
    let frame: u64 = parse_int(fields[0], line, 1)?;
    let track_id: Option<TrackId> = match fields[1].trim() {
        "" if opts.require_track_ids => {
            return Err(Error::parse(line, 2, "missing track id"));
        }
        "" => None,
        s => Some(parse_int(s, line, 2)?),
    };
    let class_id: ClassId = parse_int(fields[2], line, 3)?;
    let mut nums = [0.0f64; 8];
    for (k, slot) in nums.iter_mut().enumerate() {
        *slot = parse_float(fields[3 + k], line, 4 + k)?;
    }
    let [x, y, z, width, length, height, yaw, confidence] = nums;
    let bbox = Box3D::new([x, y, z], width, length, height, yaw).map_err(|e| {
        let column = match () {
            _ if width <= 0.0 => 7,
            _ if length <= 0.0 => 8,
            _ => 9,
        };
        Error::parse(line, column, e.to_string())
    })?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::parse(line, 11, format!("confidence {confidence} outside [0, 1]")));
    }
    let velocity = if fields.len() == VELOCITY_COLUMNS {
        match (fields[11].trim(), fields[12].trim()) {
            ("", "") => None,
            (a, b) => Some([parse_float(a, line, 12)?, parse_float(b, line, 13)?]),
        }
    } else {
        None
    };
    Ok((
        frame,
        Detection {
            bbox,
            class_id,
            confidence,
            track_id,
            velocity,
        },
    ))
}

/// Parse a track CSV stream into a [`Sequence`]. Rows are grouped by frame;
/// frame indices may repeat on consecutive rows but never decrease.
pub fn parse_tracks<R: Read>(reader: R, opts: &ParseOptions) -> Result<Sequence> {
    if !(opts.native_fps.is_finite() && opts.native_fps > 0.0) {
        return Err(Error::invalid(format!("native fps must be positive, got {}", opts.native_fps)));
    }
    let mut seq = Sequence::new(opts.scene_name.clone(), opts.native_fps);
    let mut seen: HashSet<(TrackId, ClassId)> = HashSet::new();
    for (line, text) in read_lines(reader) {
        let text = text?;
        if is_skippable(&text) {
            continue;
        }
        let (frame, det) = parse_row(&text, line, opts)?;
        match seq.frames.last_mut() {
            Some(last) if last.index == frame => {}
            Some(last) if last.index > frame => {
                return Err(Error::FrameRegression {
                    line,
                    frame,
                    previous: last.index,
                });
            }
            _ => {
                seq.frames.push(Frame::new(frame, Vec::new()));
                seen.clear();
            }
        }
        if let Some(id) = det.track_id {
            if !seen.insert((id, det.class_id)) {
                return Err(Error::parse(
                    line,
                    2,
                    format!("duplicate track {id} of class {} in frame {frame}", det.class_id),
                ));
            }
        }
        seq.frames.last_mut().expect("frame pushed above").detections.push(det);
    }
    Ok(seq)
}

pub fn read_tracks_file(path: &Path, opts: &ParseOptions) -> Result<Sequence> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut opts = opts.clone();
    if opts.scene_name.is_empty() {
        opts.scene_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    parse_tracks(file, &opts).map_err(|e| e.in_file(path))
}

fn sorted_rows(seq: &Sequence) -> Vec<(u64, &Detection)> {
    let mut rows: Vec<(u64, &Detection)> = seq
        .frames
        .iter()
        .flat_map(|f| f.detections.iter().map(move |d| (f.index, d)))
        .collect();
    rows.sort_by_key(|(frame, d)| (*frame, d.class_id, d.track_id));
    rows
}

/// Write `seq` as track CSV; returns the number of data rows.
/// Rows are ordered by `(frame, class_id, track_id)`. An empty sequence
/// writes nothing at all.
pub fn emit_tracks<W: Write>(seq: &Sequence, mut sink: W) -> Result<usize> {
    let rows = sorted_rows(seq);
    if rows.is_empty() {
        return Ok(0);
    }
    let with_velocity = rows.iter().any(|(_, d)| d.velocity.is_some());
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACK_HEADER);
    if with_velocity {
        out.push_str(",vx,vy");
    }
    out.push('\n');
    for (frame, d) in &rows {
        let b = &d.bbox;
        out.push_str(&frame.to_string());
        out.push(',');
        if let Some(id) = d.track_id {
            out.push_str(&id.to_string());
        }
        out.push(',');
        out.push_str(&d.class_id.to_string());
        for v in [b.x, b.y, b.z, b.width, b.length, b.height, b.yaw, d.confidence] {
            out.push(',');
            out.push_str(&format_float(v));
        }
        if with_velocity {
            match d.velocity {
                Some([vx, vy]) => {
                    out.push(',');
                    out.push_str(&format_float(vx));
                    out.push(',');
                    out.push_str(&format_float(vy));
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(rows.len())
}

pub fn write_tracks_file(seq: &Sequence, path: &Path) -> Result<usize> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    emit_tracks(seq, BufWriter::new(file))
}

/// Ground-plane grid used by position-id annotations.
/// `position_id = row * grid_width + col`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub origin_x: f64,
    pub origin_y: f64,
    pub step: f64,
    pub grid_width: u64,
    /// Number of rows; `None` leaves the grid unbounded along y.
    pub grid_height: Option<u64>,
    pub person_height: f64,
    pub person_width: f64,
    pub person_length: f64,
    /// Translation applied after mapping, re-centering the region of interest.
    pub offset: [f64; 2],
    pub class_id: ClassId,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            origin_x: -3.0,
            origin_y: -9.0,
            step: 0.025,
            grid_width: 480,
            grid_height: Some(1440),
            person_height: 1.8,
            person_width: 0.6,
            person_length: 0.6,
            offset: [0.0, 0.0],
            class_id: 0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!("grid step must be positive, got {}", self.step)));
        }
        if self.grid_width == 0 {
            return Err(Error::Config("grid_width must be at least 1".into()));
        }
        if self.grid_height == Some(0) {
            return Err(Error::Config("grid_height must be at least 1".into()));
        }
        for (name, v) in [
            ("person_height", self.person_height),
            ("person_width", self.person_width),
            ("person_length", self.person_length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite())
            || !self.offset.iter().all(|v| v.is_finite())
        {
            return Err(Error::Config("grid origin and offset must be finite".into()));
        }
        Ok(())
    }

    /// Metric ground-plane center of a grid cell.
    pub fn position_to_xy(&self, position_id: u64) -> Option<(f64, f64)> {
        let col = position_id % self.grid_width;
        let row = position_id / self.grid_width;
        if self.grid_height.is_some_and(|h| row >= h) {
            return None;
        }
        Some((
            self.origin_x + self.step * col as f64 + self.offset[0],
            self.origin_y + self.step * row as f64 + self.offset[1],
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PositionRecord {
    pub frame: u64,
    pub person_id: TrackId,
    pub position_id: u64,
}

/// Parse `frame,person_id,position_id` rows. A first line spelling out
/// those column names is accepted as a header.
pub fn parse_positions<R: Read>(reader: R) -> Result<Vec<PositionRecord>> {
    let mut out = Vec::new();
    for (line, text) in read_lines(reader) {
        let text = text?;
        if is_skippable(&text) || (line == 1 && text.trim() == POSITION_HEADER) {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line, fields.len().min(3) + 1, format!("expected 3 columns, found {}", fields.len())));
        }
        out.push(PositionRecord {
            frame: parse_int(fields[0], line, 1)?,
            person_id: parse_int(fields[1], line, 2)?,
            position_id: parse_int(fields[2], line, 3)?,
        });
    }
    Ok(out)
}

/// Turn grid annotations into world-frame person boxes centered at half the
/// person height. Output frames are ordered by index, detections by id.
pub fn convert_positions(
    records: &[PositionRecord],
    grid: &GridConfig,
    native_fps: f64,
) -> Result<Sequence> {
    grid.validate()?;
    if !(native_fps.is_finite() && native_fps > 0.0) {
        return Err(Error::invalid(format!("native fps must be positive, got {native_fps}")));
    }
    let mut by_frame: BTreeMap<u64, BTreeMap<TrackId, u64>> = BTreeMap::new();
    for r in records {
        if by_frame
            .entry(r.frame)
            .or_default()
            .insert(r.person_id, r.position_id)
            .is_some()
        {
            return Err(Error::invalid(format!(
                "person {} appears twice in frame {}",
                r.person_id, r.frame
            )));
        }
    }
    let z = grid.person_height / 2.0;
    let mut seq = Sequence::new("converted", native_fps);
    for (frame, people) in by_frame {
        let mut dets = Vec::with_capacity(people.len());
        for (person_id, position_id) in people {
            let (x, y) = grid
                .position_to_xy(position_id)
                .ok_or(Error::OutOfGrid { frame, position_id })?;
            let bbox = Box3D::new(
                [x, y, z],
                grid.person_width,
                grid.person_length,
                grid.person_height,
                0.0,
            )?;
            dets.push(Detection::new(bbox, grid.class_id, 1.0, Some(person_id)));
        }
        seq.frames.push(Frame::new(frame, dets));
    }
    Ok(seq)
}

/// Fill in per-detection ground-plane velocity from each identity's nearest
/// earlier and later observations. Identity endpoints use a one-sided
/// difference; identities seen once get zero velocity.
pub fn estimate_velocities(seq: &Sequence) -> Sequence {
    // (class, track) -> [(frame position, detection position)]
    let mut tracks: HashMap<(ClassId, TrackId), Vec<(usize, usize)>> = HashMap::new();
    for (fi, frame) in seq.frames.iter().enumerate() {
        for (di, det) in frame.detections.iter().enumerate() {
            if let Some(id) = det.track_id {
                tracks.entry((det.class_id, id)).or_default().push((fi, di));
            }
        }
    }
    let mut out = seq.clone();
    let time = |fi: usize| seq.time_seconds(seq.frames[fi].index);
    let xy = |(fi, di): (usize, usize)| {
        let b = &seq.frames[fi].detections[di].bbox;
        (b.x, b.y)
    };
    for obs in tracks.values() {
        for (k, &(fi, di)) in obs.iter().enumerate() {
            let velocity = if obs.len() == 1 {
                [0.0, 0.0]
            } else {
                let before = obs[k.saturating_sub(1)];
                let after = obs[(k + 1).min(obs.len() - 1)];
                let dt = time(after.0) - time(before.0);
                let (x0, y0) = xy(before);
                let (x1, y1) = xy(after);
                [(x1 - x0) / dt, (y1 - y0) / dt]
            };
            out.frames[fi].detections[di].velocity = Some(velocity);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::validate_sequence;

    #[test]
    fn single_row_parses() {
        let text = "0,7,0,1.0,2.0,0.9,0.6,0.6,1.8,0.0,0.98\n";
        let s = parse_tracks(text.as_bytes(), &ParseOptions::tracks(30.0)).unwrap();
        assert_eq!(s.frames.len(), 1);
        let d = &s.frames[0].detections[0];
        assert_eq!(d.track_id, Some(7));
        assert_eq!(d.class_id, 0);
        assert_eq!(d.bbox.center(), [1.0, 2.0, 0.9]);
        assert_eq!(d.confidence, 0.98);

        let mut buf = Vec::new();
        emit_tracks(&s, &mut buf).unwrap();
        let expected = format!("{TRACK_HEADER}\n{text}");
        assert_eq!(String::from_utf8(buf).unwrap(), expected);
    }

    #[test]
    fn empty_input_and_empty_output() {
        let s = parse_tracks(&b""[..], &ParseOptions::tracks(30.0)).unwrap();
        assert!(s.frames.is_empty());
        let mut buf = Vec::new();
        assert_eq!(emit_tracks(&s, &mut buf).unwrap(), 0);
        assert!(buf.is_empty());
    }

    #[test]
    fn rows_are_emitted_in_sorted_order() {
        let b = Box3D::new([0.0, 0.0, 0.9], 0.6, 0.6, 1.8, 0.0).unwrap();
        let s = Sequence::new("t", 2.0).with_frames(vec![Frame::new(
            3,
            vec![
                Detection::new(b, 1, 0.5, Some(2)),
                Detection::new(b, 0, 0.5, Some(9)),
            ],
        )]);
        let mut buf = Vec::new();
        assert_eq!(emit_tracks(&s, &mut buf).unwrap(), 2);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().skip(1).collect();
        assert!(lines[0].starts_with("3,9,0,"));
        assert!(lines[1].starts_with("3,2,1,"));
    }

    #[test]
    fn malformed_rows_name_line_and_column() {
        let text = "#header\n0,1,0,1.0,2.0,0.9,0.6,0.6,1.8,0.0,0.9\n0,2,0,abc,2.0,0.9,0.6,0.6,1.8,0.0,0.9\n";
        match parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)) {
            Err(Error::Parse { line: 3, column: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let text = "0,1,0,1.0,2.0,0.9,0.6,0.6\n";
        assert!(matches!(
            parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_finite_and_regression_are_rejected() {
        let text = "0,1,0,inf,2.0,0.9,0.6,0.6,1.8,0.0,0.9\n";
        assert!(matches!(
            parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)),
            Err(Error::Parse { column: 4, .. })
        ));
        let text = "5,1,0,1,2,0.9,0.6,0.6,1.8,0,0.9\n4,1,0,1,2,0.9,0.6,0.6,1.8,0,0.9\n";
        assert!(matches!(
            parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)),
            Err(Error::FrameRegression { line: 2, frame: 4, previous: 5 })
        ));
    }

    #[test]
    fn track_ids_optional_for_detections() {
        let text = "0,,0,1,2,0.9,0.6,0.6,1.8,0,0.9\n";
        assert!(parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)).is_err());
        let s = parse_tracks(text.as_bytes(), &ParseOptions::detections(1.0)).unwrap();
        assert_eq!(s.frames[0].detections[0].track_id, None);
    }

    #[test]
    fn duplicate_identity_rejected() {
        let text = "0,1,0,1,2,0.9,0.6,0.6,1.8,0,0.9\n0,1,0,3,2,0.9,0.6,0.6,1.8,0,0.9\n";
        assert!(matches!(
            parse_tracks(text.as_bytes(), &ParseOptions::tracks(1.0)),
            Err(Error::Parse { line: 2, column: 2, .. })
        ));
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(1.0), "1.0");
        assert_eq!(format_float(0.98), "0.98");
        assert_eq!(format_float(-2.975), "-2.975");
        assert_eq!(format_float(1e-7), "0.0");
        assert_eq!(format_float(-1e-9), "0.0");
        assert_eq!(format_float(123.4567891), "123.456789");
    }

    #[test]
    fn origin_cell_maps_to_origin() {
        let grid = GridConfig::default();
        let recs = [PositionRecord { frame: 0, person_id: 3, position_id: 0 }];
        let s = convert_positions(&recs, &grid, 2.0).unwrap();
        let b = s.frames[0].detections[0].bbox;
        assert_eq!((b.x, b.y, b.z), (-3.0, -9.0, 0.9));
        assert_eq!(s.frames[0].detections[0].track_id, Some(3));
        assert!(validate_sequence(&s).is_empty());
    }

    #[test]
    fn position_481_on_wildtrack_grid() {
        let grid = GridConfig::default();
        let (x, y) = grid.position_to_xy(481).unwrap();
        // col 1, row 1
        assert!((x - (-2.975)).abs() < 1e-12);
        assert!((y - (-8.975)).abs() < 1e-12);
    }

    #[test]
    fn z_is_half_person_height_and_offset_applies() {
        let grid = GridConfig {
            person_height: 1.7,
            offset: [1.0, -2.0],
            ..GridConfig::default()
        };
        let recs: Vec<_> = (0..50)
            .map(|i| PositionRecord { frame: i / 5, person_id: i % 5, position_id: i * 977 })
            .collect();
        let s = convert_positions(&recs, &grid, 2.0).unwrap();
        assert_eq!(s.frames.len(), 10);
        for d in s.frames.iter().flat_map(|f| &f.detections) {
            assert_eq!(d.bbox.z, 0.85);
        }
        let b = convert_positions(&recs[..1], &grid, 2.0).unwrap().frames[0].detections[0].bbox;
        assert_eq!((b.x, b.y), (-2.0, -11.0));
    }

    #[test]
    fn conversion_is_injective_per_frame() {
        let grid = GridConfig::default();
        let recs: Vec<_> = (0..2000u64)
            .map(|i| PositionRecord { frame: 0, person_id: i, position_id: (i * 7919) % (480 * 1440) })
            .collect();
        let s = convert_positions(&recs, &grid, 2.0).unwrap();
        let mut xy: Vec<(u64, u64)> = s.frames[0]
            .detections
            .iter()
            .map(|d| (d.bbox.x.to_bits(), d.bbox.y.to_bits()))
            .collect();
        xy.sort_unstable();
        xy.dedup();
        assert_eq!(xy.len(), 2000);
    }

    #[test]
    fn out_of_grid_rows_error() {
        let grid = GridConfig::default();
        let recs = [PositionRecord { frame: 2, person_id: 1, position_id: 480 * 1440 }];
        assert!(matches!(
            convert_positions(&recs, &grid, 2.0),
            Err(Error::OutOfGrid { frame: 2, .. })
        ));
        let unbounded = GridConfig { grid_height: None, ..grid };
        assert!(convert_positions(&recs, &unbounded, 2.0).is_ok());
    }

    #[test]
    fn position_rows_parse() {
        let text = "#frame,person_id,position_id\n0,1,481\n5,1,482\n";
        let recs = parse_positions(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1], PositionRecord { frame: 5, person_id: 1, position_id: 482 });
        assert!(matches!(
            parse_positions("0,1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    fn walker(points: &[(u64, f64)], fps: f64) -> Sequence {
        let frames = points
            .iter()
            .map(|&(f, x)| {
                let b = Box3D::new([x, 0.0, 0.9], 0.6, 0.6, 1.8, 0.0).unwrap();
                Frame::new(f, vec![Detection::new(b, 0, 1.0, Some(1))])
            })
            .collect();
        Sequence::new("w", fps).with_frames(frames)
    }

    #[test]
    fn constant_velocity_everywhere() {
        let s = estimate_velocities(&walker(&[(0, 0.0), (1, 1.0), (2, 2.0)], 1.0));
        for f in &s.frames {
            assert_eq!(f.detections[0].velocity, Some([1.0, 0.0]));
        }
    }

    #[test]
    fn singleton_identity_gets_zero_velocity() {
        let s = estimate_velocities(&walker(&[(4, 3.0)], 1.0));
        assert_eq!(s.frames[0].detections[0].velocity, Some([0.0, 0.0]));
    }

    #[test]
    fn gap_uses_nearest_neighbours() {
        // 2 fps; 0.25 m per frame, then 0.75 m over a 3-frame gap
        let s = estimate_velocities(&walker(&[(0, 0.0), (1, 0.25), (4, 1.0)], 2.0));
        let v: Vec<f64> = s.frames.iter().map(|f| f.detections[0].velocity.unwrap()[0]).collect();
        assert_eq!(v, vec![0.5, 0.5, 0.5]);

        let s = estimate_velocities(&walker(&[(0, 0.0), (3, 0.75)], 2.0));
        for f in &s.frames {
            assert_eq!(f.detections[0].velocity.unwrap()[0], 0.5);
        }
    }

    #[test]
    fn velocities_leave_everything_else_alone() {
        let s = walker(&[(0, 0.0), (1, 0.3), (5, 2.0)], 2.0);
        let v = estimate_velocities(&s);
        assert_eq!(v.frames.len(), s.frames.len());
        for (a, b) in s.frames.iter().zip(&v.frames) {
            assert_eq!(a.index, b.index);
            for (da, db) in a.detections.iter().zip(&b.detections) {
                assert_eq!(da.bbox, db.bbox);
                assert_eq!(da.track_id, db.track_id);
                assert_eq!(da.confidence, db.confidence);
            }
        }
    }

    #[test]
    fn velocity_columns_round_trip() {
        let s = estimate_velocities(&walker(&[(0, 0.0), (1, 0.5)], 2.0));
        let mut buf = Vec::new();
        emit_tracks(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().ends_with(",vx,vy"));
        let back = parse_tracks(&buf[..], &ParseOptions::tracks(2.0).scene("w")).unwrap();
        assert_eq!(back, s);
    }
}
