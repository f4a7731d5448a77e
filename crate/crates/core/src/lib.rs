//! Evaluation toolkit for multi-camera 3D multi-object tracking.
//!
//! Scores tracker output against ground truth with the HOTA family, detection
//! AP and the mean duration of uninterrupted identity runs, and provides the
//! harnesses around them: frame-rate sweeps on a controlled window, grid
//! annotation conversion, anchor-bank generation and a synthetic scene
//! generator with a brute-force reference evaluator.

pub mod anchors;
pub mod config;
pub mod datamodel;
pub mod error;
pub mod fpslab;
pub mod ingest;
pub mod matching;
pub mod metrics;
pub mod synthgen;

pub use datamodel::{Box3D, ClassId, Detection, EvalWindow, Frame, Sequence, TrackId};
pub use error::{Error, Result};
pub use matching::{match_frame, FrameMatchSet, MatchedPair, SimilarityMode, SimilaritySpec};
pub use metrics::{class_report, ClassMetrics, MetricsReport, ReportOptions};
