//! `run` configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use roadspeed_core::detection::DetectionParams;
use roadspeed_core::geometry::Point2;
use roadspeed_core::pipeline::PipelineConfig;
use roadspeed_core::speed::{EdgeMeasure, PairMode, SiteConfig};
use roadspeed_core::Homography;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Result};
use crate::formats::{read_json, Calibration};

fn default_fps() -> f64 {
    25.0
}

fn default_plate_length() -> f64 {
    0.52
}

fn default_min_track_frames() -> usize {
    3
}

/// Every free parameter of `run`. Relative paths are resolved against the
/// directory holding the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output of `calibrate`.
    #[serde(default)]
    pub calibration: Option<PathBuf>,
    /// Inline alternative to `calibration`.
    #[serde(default, rename = "H_world_to_image")]
    pub homography: Option<Homography>,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Overrides the camera height stored with the calibration.
    #[serde(default)]
    pub camera_height_m: Option<f64>,
    #[serde(default = "default_plate_length")]
    pub plate_standard_length_m: f64,
    /// JSON object mapping plate text to mounting height (m).
    #[serde(default)]
    pub plate_heights: Option<PathBuf>,
    /// Inline heights; entries here win over `plate_heights`.
    #[serde(default)]
    pub plate_height_db: BTreeMap<String, f64>,
    #[serde(default)]
    pub default_plate_height_m: Option<f64>,
    #[serde(default)]
    pub pair_mode: PairMode,
    /// How the plate top edge is measured for the length-based correction.
    #[serde(default)]
    pub edge_measure: EdgeMeasure,
    #[serde(default)]
    pub detection: DetectionParams,
    /// Plate/non-plate classifier from `train plate`.
    #[serde(default)]
    pub plate_model: Option<PathBuf>,
    /// Character network from `train ocr`.
    #[serde(default)]
    pub ocr_model: Option<PathBuf>,
    /// Directory of frames, used when none are given on the command line.
    #[serde(default)]
    pub frames: Option<PathBuf>,
    #[serde(default = "default_min_track_frames")]
    pub min_track_frames: usize,
    /// Re-locate the calibration markers every this many frames.
    #[serde(default)]
    pub homography_refresh_every_n_frames: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            calibration: None,
            homography: None,
            fps: default_fps(),
            camera_height_m: None,
            plate_standard_length_m: default_plate_length(),
            plate_heights: None,
            plate_height_db: BTreeMap::new(),
            default_plate_height_m: None,
            pair_mode: PairMode::default(),
            edge_measure: EdgeMeasure::default(),
            detection: DetectionParams::default(),
            plate_model: None,
            ocr_model: None,
            frames: None,
            min_track_frames: default_min_track_frames(),
            homography_refresh_every_n_frames: None,
        }
    }
}

fn resolve(base: &Path, p: &Option<PathBuf>) -> Option<PathBuf> {
    p.as_ref()
        .map(|p| if p.is_absolute() { p.clone() } else { base.join(p) })
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::new(format!("missing {what}"), path.display().to_string()))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.calibration = resolve(base, &cfg.calibration);
        cfg.plate_heights = resolve(base, &cfg.plate_heights);
        cfg.plate_model = resolve(base, &cfg.plate_model);
        cfg.ocr_model = resolve(base, &cfg.ocr_model);
        cfg.frames = resolve(base, &cfg.frames);
        Ok(cfg)
    }

    /// Checks values and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Failure::new("invalid parameter", "fps must be positive"));
        }
        match (&self.calibration, &self.homography) {
            (None, None) => {
                return Err(Failure::new(
                    "missing calibration",
                    "set `calibration` or `H_world_to_image` in the run configuration",
                ))
            }
            (Some(p), _) => require_file(p, "calibration")?,
            _ => {}
        }
        for (p, what) in [
            (&self.plate_heights, "plate height map"),
            (&self.plate_model, "plate model"),
            (&self.ocr_model, "ocr model"),
            (&self.frames, "frames"),
        ] {
            if let Some(p) = p {
                require_file(p, what)?;
            }
        }
        Ok(())
    }

    /// Reads the referenced calibration and height map into a pipeline
    /// configuration.
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        self.validate()?;
        let calibration: Option<Calibration> = self.calibration.as_deref().map(read_json).transpose()?;
        let homography = match (&self.homography, &calibration) {
            (Some(h), _) => *h,
            (None, Some(c)) => c.homography,
            (None, None) => unreachable!("validated"),
        };
        let mut site = SiteConfig::new(homography, self.fps);
        site.camera_height_m = self
            .camera_height_m
            .or(calibration.as_ref().and_then(|c| c.camera_height_m));
        site.plate_standard_length_m = self.plate_standard_length_m;
        site.default_plate_height_m = self.default_plate_height_m;
        site.pair_mode = self.pair_mode;
        site.edge_measure = self.edge_measure;
        if let Some(p) = &self.plate_heights {
            site.plate_height_db = read_json(p)?;
        }
        site.plate_height_db
            .extend(self.plate_height_db.iter().map(|(k, v)| (k.clone(), *v)));

        let mut cfg = PipelineConfig::new(site);
        cfg.detection = self.detection.clone();
        cfg.min_track_frames = self.min_track_frames;
        cfg.homography_refresh_every_n_frames = self.homography_refresh_every_n_frames;
        if let Some(c) = &calibration {
            cfg.markers = c.markers.iter().map(|m| Point2::new(m.world[0], m.world[1])).collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
