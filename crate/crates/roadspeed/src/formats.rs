//! JSON and CSV file schemas.

use std::fs;
use std::path::Path;

use roadspeed_core::pipeline::{DetectionRecord, TrackReport};
use roadspeed_core::simulator::SyntheticTrack;
use roadspeed_core::speed::mps_to_kmh;
use roadspeed_core::Homography;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::invalid_input(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::new("serialization error", e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// One surveyed marker: its pixel position and road-plane position (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerPair {
    pub image: [f64; 2],
    pub world: [f64; 2],
}

/// Calibration input. On disk either a bare array of markers or an object
/// `{"markers": [...], "camera_height_m": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CalibrationInputRepr")]
pub struct CalibrationInput {
    pub markers: Vec<MarkerPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera_height_m: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CalibrationInputRepr {
    Bare(Vec<MarkerPair>),
    Full {
        markers: Vec<MarkerPair>,
        #[serde(default)]
        camera_height_m: Option<f64>,
    },
}

impl From<CalibrationInputRepr> for CalibrationInput {
    fn from(r: CalibrationInputRepr) -> Self {
        match r {
            CalibrationInputRepr::Bare(markers) => Self {
                markers,
                camera_height_m: None,
            },
            CalibrationInputRepr::Full {
                markers,
                camera_height_m,
            } => Self {
                markers,
                camera_height_m,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerResidual {
    pub image: [f64; 2],
    pub world: [f64; 2],
    /// Distance between the observed pixel and the calibrated projection.
    pub residual_px: f64,
}

/// Calibration output, also the calibration input of `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(rename = "H_world_to_image")]
    pub homography: Homography,
    #[serde(default)]
    pub camera_height_m: Option<f64>,
    #[serde(default)]
    pub markers: Vec<MarkerResidual>,
    #[serde(default)]
    pub rms_px: f64,
    /// Set when the residual RMS exceeds [`RESIDUAL_WARNING_PX`].
    #[serde(default)]
    pub warning: bool,
}

pub const RESIDUAL_WARNING_PX: f64 = 2.0;

pub const TRACK_HEADER: [&str; 10] = [
    "frame",
    "timestamp_s",
    "px_x",
    "px_y",
    "world_x_m",
    "world_y_m",
    "edge_x0",
    "edge_y0",
    "edge_x1",
    "edge_y1",
];

pub const DETECTIONS_HEADER: [&str; 10] = [
    "frame",
    "track_id",
    "corner_x",
    "corner_y",
    "rect_cx",
    "rect_cy",
    "rect_w",
    "rect_h",
    "rect_angle_deg",
    "score",
];

pub const REPORT_HEADER: [&str; 10] = [
    "track_id",
    "plate_text",
    "n_frames",
    "n_pairs",
    "s_projected_mps",
    "rho_m1",
    "rho_m2",
    "v_m1_kmh",
    "v_m2_kmh",
    "flags",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub frame: usize,
    pub timestamp_s: f64,
    pub px_x: f64,
    pub px_y: f64,
    pub world_x_m: f64,
    pub world_y_m: f64,
    pub edge_x0: f64,
    pub edge_y0: f64,
    pub edge_x1: f64,
    pub edge_y1: f64,
}

impl TrackRow {
    pub fn rows(track: &SyntheticTrack) -> Vec<Self> {
        track
            .frames
            .iter()
            .map(|f| Self {
                frame: f.frame,
                timestamp_s: f.timestamp,
                px_x: f.pixel.x,
                px_y: f.pixel.y,
                world_x_m: f.world[0],
                world_y_m: f.world[1],
                edge_x0: f.edge[0].x,
                edge_y0: f.edge[0].y,
                edge_x1: f.edge[1].x,
                edge_y1: f.edge[1].y,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub frame: usize,
    /// Empty for detections that ended up in no reported track.
    pub track_id: Option<usize>,
    pub corner_x: f64,
    pub corner_y: f64,
    pub rect_cx: f64,
    pub rect_cy: f64,
    pub rect_w: f64,
    pub rect_h: f64,
    pub rect_angle_deg: f64,
    pub score: f64,
}

impl From<&DetectionRecord> for DetectionRow {
    fn from(d: &DetectionRecord) -> Self {
        Self {
            frame: d.frame,
            track_id: d.track_id,
            corner_x: d.corner.x,
            corner_y: d.corner.y,
            rect_cx: d.rect.center.x,
            rect_cy: d.rect.center.y,
            rect_w: d.rect.width,
            rect_h: d.rect.height,
            rect_angle_deg: d.rect.angle_deg,
            score: d.score,
        }
    }
}

/// One line of `report.csv`. Speeds that could not be estimated are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub track_id: usize,
    pub plate_text: String,
    pub n_frames: usize,
    pub n_pairs: Option<usize>,
    pub s_projected_mps: Option<f64>,
    pub rho_m1: Option<f64>,
    pub rho_m2: Option<f64>,
    pub v_m1_kmh: Option<f64>,
    pub v_m2_kmh: Option<f64>,
    /// `;`-separated.
    pub flags: String,
}

impl From<&TrackReport> for ReportRow {
    fn from(t: &TrackReport) -> Self {
        let e = t.estimate.as_ref();
        Self {
            track_id: t.track_id,
            plate_text: t.plate_text.clone(),
            n_frames: t.sequence.len(),
            n_pairs: e.map(|e| e.n_pairs),
            s_projected_mps: e.map(|e| e.s_projected),
            rho_m1: e.and_then(|e| e.rho_m1),
            rho_m2: e.and_then(|e| e.rho_m2),
            v_m1_kmh: e.and_then(|e| e.v_m1).map(mps_to_kmh),
            v_m2_kmh: e.and_then(|e| e.v_m2).map(mps_to_kmh),
            flags: t.flags.join(";"),
        }
    }
}

/// Writes `header` and then `rows`; the header is written even when there
/// are no rows.
pub fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    let err = |e: csv::Error| Failure::io(path, e);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Failure::io(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::invalid_input(path, e))
}
