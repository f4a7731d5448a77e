//! Region-of-interest and confidence post-processing.

use serde::{Deserialize, Serialize};

use crate::datamodel::Sequence;
use crate::error::{Error, Result};

/// Ground-plane region. Boundary points count as inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Roi {
    Rect {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    /// Convex polygon, either winding.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Roi {
    pub fn everything() -> Self {
        Roi::Rect {
            x_min: f64::MIN,
            y_min: f64::MIN,
            x_max: f64::MAX,
            y_max: f64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Roi::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => {
                if !(x_max > x_min && y_max > y_min) {
                    return Err(Error::invalid("region of interest has zero area"));
                }
            }
            Roi::Polygon { vertices } => {
                if vertices.len() < 3 || signed_area(vertices) == 0.0 {
                    return Err(Error::invalid("region of interest has zero area"));
                }
                let sign = signed_area(vertices).signum();
                let n = vertices.len();
                for k in 0..n {
                    let turn = cross(vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
                    if turn * sign < 0.0 {
                        return Err(Error::invalid("region of interest polygon is not convex"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Roi::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (*x_min..=*x_max).contains(&x) && (*y_min..=*y_max).contains(&y),
            Roi::Polygon { vertices } => {
                let sign = signed_area(vertices).signum();
                let n = vertices.len();
                (0..n).all(|k| cross(vertices[k], vertices[(k + 1) % n], [x, y]) * sign >= 0.0)
            }
        }
    }
}

fn cross(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|k| v[k][0] * v[(k + 1) % n][1] - v[(k + 1) % n][0] * v[k][1])
        .sum::<f64>()
        / 2.0
}

/// Keep detections whose ground-plane center lies in `roi` and whose
/// confidence is at least `conf_threshold`. Frames are kept even when emptied.
pub fn postprocess_filter(seq: &Sequence, roi: &Roi, conf_threshold: f64) -> Result<Sequence> {
    roi.validate()?;
    let mut out = seq.clone();
    for frame in &mut out.frames {
        frame
            .detections
            .retain(|d| d.confidence >= conf_threshold && roi.contains(d.bbox.x, d.bbox.y));
    }
    Ok(out)
}
