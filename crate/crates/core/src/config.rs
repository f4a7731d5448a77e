//! Single-file JSON configuration shared by every command.
//!
//! Precedence: built-in defaults < config file < command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anchors::DEFAULT_K;
use crate::datamodel::ClassId;
use crate::error::{Error, Result};
use crate::ingest::GridConfig;
use crate::matching::SimilaritySpec;
use crate::metrics::{default_alpha_grid, ReportOptions, Roi};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub similarity: SimilaritySpec,
    pub alpha_grid: Vec<f64>,
    pub dur_alpha: f64,
    pub ap_alpha: f64,
    /// Display names keyed by class id.
    pub class_labels: BTreeMap<ClassId, String>,
    pub primary_class: Option<ClassId>,
    /// Applied to ground truth and predictions before scoring.
    pub roi: Option<Roi>,
    /// Predictions below this confidence are discarded before scoring.
    pub conf_threshold: f64,
    pub native_fps: f64,
    /// `None` scores every frame at the sequence's own rate.
    pub eval_fps: Option<f64>,
    /// Keep only the first N frames of both inputs.
    pub max_frames: Option<usize>,
    pub grid: GridConfig,
    pub anchor_k: usize,
    pub anchor_seed: u64,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            similarity: SimilaritySpec::default(),
            alpha_grid: default_alpha_grid(),
            dur_alpha: 0.5,
            ap_alpha: 0.5,
            class_labels: BTreeMap::new(),
            primary_class: None,
            roi: None,
            conf_threshold: 0.0,
            native_fps: 30.0,
            eval_fps: None,
            max_frames: None,
            grid: GridConfig::default(),
            anchor_k: DEFAULT_K,
            anchor_seed: 0,
        }
    }
}

impl ToolConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file; `None` yields the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            similarity: self.similarity,
            alpha_grid: self.alpha_grid.clone(),
            dur_alpha: self.dur_alpha,
            ap_alpha: self.ap_alpha,
            primary_class: self.primary_class,
            class_labels: self.class_labels.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.report_options().validate()?;
        if !(self.native_fps.is_finite() && self.native_fps > 0.0) {
            return Err(Error::Config(format!("native_fps must be positive, got {}", self.native_fps)));
        }
        if let Some(r) = self.eval_fps {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("eval_fps must be positive, got {r}")));
            }
        }
        if !self.conf_threshold.is_finite() {
            return Err(Error::Config("conf_threshold must be finite".into()));
        }
        if self.max_frames == Some(0) {
            return Err(Error::Config("max_frames must be at least 1".into()));
        }
        if let Some(roi) = &self.roi {
            roi.validate().map_err(|e| Error::Config(format!("roi: {e}")))?;
        }
        if self.anchor_k == 0 {
            return Err(Error::Config("anchor_k must be at least 1".into()));
        }
        self.grid.validate()
    }
}
